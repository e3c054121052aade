// Copyright 2026 The maskbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maskbench/spans.h"

#include <algorithm>
#include <stdexcept>

#include "maskbench/errors.h"

namespace maskbench {
namespace {

std::size_t skip_digits(std::string_view s, std::size_t i) {
  while (i < s.size() && is_digit(s[i])) ++i;
  return i;
}

// End of the literal starting at `i`, which holds a digit.
std::size_t scan_literal(std::string_view s, std::size_t i) {
  std::size_t end = skip_digits(s, i);
  if (end - i <= 3) {
    while (end + 4 <= s.size() && s[end] == ',' && is_digit(s[end + 1]) &&
           is_digit(s[end + 2]) && is_digit(s[end + 3]) &&
           (end + 4 == s.size() || !is_digit(s[end + 4]))) {
      end += 4;
    }
  }
  if (end + 1 < s.size() && s[end] == '.' && is_digit(s[end + 1])) {
    end = skip_digits(s, end + 1);
  }
  return end;
}

struct Expansion {
  CharRange range;
  std::vector<std::size_t> groups;
};

Expansion expand_literal(std::string_view s, const NumericLiteral& lit,
                         std::size_t right_limit, const UnitLexicon& lexicon) {
  Expansion out{lit.signed_range, {}};
  // Left: one currency alias, optionally followed by spaces ("$ 35").
  std::size_t p = out.range.begin;
  while (p > 0 && (s[p - 1] == ' ' || s[p - 1] == '\t')) --p;
  if (auto m = lexicon.match_ending_at(s, p, GroupSelect::kCurrency)) {
    out.range.begin = m->begin;
    out.groups.push_back(m->group);
    // "-$5 million"
    if (!lit.negative && m->begin > 0 && s[m->begin - 1] == '-' &&
        (m->begin == 1 || !is_alnum(s[m->begin - 2]))) {
      out.range.begin = m->begin - 1;
    }
  }
  // Right: a greedy chain of aliases, each optionally after whitespace.
  std::size_t end = out.range.end;
  while (true) {
    std::size_t q = end;
    while (q < right_limit && is_space(s[q])) ++q;
    if (q >= right_limit) break;
    auto m = lexicon.match_at(s.substr(0, right_limit), q, GroupSelect::kAll,
                              q != end);
    if (!m) break;
    out.groups.push_back(m->group);
    end = m->end;
  }
  out.range.end = end;
  return out;
}

SpanKind classify(const std::vector<std::size_t>& groups,
                  const UnitLexicon& lexicon) {
  bool percent = false;
  bool quantity = false;
  for (std::size_t g : groups) {
    switch (lexicon.group(g).category) {
      case UnitCategory::kCurrency: return SpanKind::kMoney;
      case UnitCategory::kPercent: percent = true; break;
      case UnitCategory::kQuantity: quantity = true; break;
      default: break;
    }
  }
  if (percent) return SpanKind::kPercent;
  if (quantity) return SpanKind::kQuantity;
  return SpanKind::kCardinal;
}

NumericSpan make_span(std::string_view s, const Expansion& e,
                      std::size_t sentence_index, const UnitLexicon& lexicon) {
  NumericSpan span;
  span.sentence_index = sentence_index;
  span.char_range = e.range;
  span.surface = std::string(s.substr(e.range.begin, e.range.size()));
  span.kind = classify(e.groups, lexicon);
  span.has_unit_or_scale = !e.groups.empty();
  for (std::size_t g : e.groups) span.unit_groups.push_back(lexicon.group(g).id);
  return span;
}

}  // namespace

std::string_view to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::kMoney: return "money";
    case SpanKind::kPercent: return "percent";
    case SpanKind::kCardinal: return "cardinal";
    case SpanKind::kQuantity: return "quantity";
  }
  return "cardinal";
}

std::optional<SpanKind> span_kind_from_string(std::string_view text) {
  if (text == "money") return SpanKind::kMoney;
  if (text == "percent") return SpanKind::kPercent;
  if (text == "cardinal") return SpanKind::kCardinal;
  if (text == "quantity") return SpanKind::kQuantity;
  return std::nullopt;
}

std::vector<NumericLiteral> find_numeric_literals(std::string_view s,
                                                  const UnitLexicon& lexicon) {
  std::vector<NumericLiteral> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i]) || (i > 0 && (is_alnum(s[i - 1]) ||
                                      (s[i - 1] == '.' && i > 1 &&
                                       is_digit(s[i - 2]))))) {
      ++i;
      continue;
    }
    const std::size_t end = scan_literal(s, i);
    if (end < s.size() && is_alpha(s[end]) &&
        !lexicon.match_at(s, end, GroupSelect::kAll, false)) {
      i = end;
      while (i < s.size() && is_alnum(s[i])) ++i;
      continue;
    }
    NumericLiteral lit;
    lit.digits = {i, end};
    lit.signed_range = lit.digits;
    if (i > 0 && s[i - 1] == '(' && end < s.size() && s[end] == ')') {
      lit.signed_range = {i - 1, end + 1};
      lit.negative = true;
    } else if (i > 0 && s[i - 1] == '-' && (i == 1 || !is_alnum(s[i - 2]))) {
      lit.signed_range.begin = i - 1;
      lit.negative = true;
    }
    out.push_back(lit);
    i = end;
  }
  return out;
}

std::vector<NumericSpan> detect_numeric_entities(std::string_view sentence,
                                                 const UnitLexicon& lexicon,
                                                 std::size_t sentence_index) {
  const std::vector<NumericLiteral> lits = find_numeric_literals(sentence, lexicon);
  std::vector<NumericSpan> spans;
  for (std::size_t k = 0; k < lits.size(); ++k) {
    const std::size_t limit =
        k + 1 < lits.size() ? lits[k + 1].signed_range.begin : sentence.size();
    spans.push_back(make_span(sentence, expand_literal(sentence, lits[k], limit, lexicon),
                              sentence_index, lexicon));
  }
  // Overlaps (a currency alias claimed from both sides) merge into the
  // leftmost span.
  std::vector<NumericSpan> merged;
  for (NumericSpan& s : spans) {
    if (!merged.empty() && merged.back().char_range.overlaps(s.char_range)) {
      NumericSpan& left = merged.back();
      left.char_range.end = std::max(left.char_range.end, s.char_range.end);
      left.surface = std::string(sentence.substr(left.char_range.begin,
                                                 left.char_range.size()));
      left.has_unit_or_scale = left.has_unit_or_scale || s.has_unit_or_scale;
      continue;
    }
    merged.push_back(std::move(s));
  }
  return merged;
}

NumericSpan expand_span(std::string_view sentence, const NumericSpan& span,
                        const UnitLexicon& lexicon) {
  if (span.char_range.end > sentence.size() ||
      span.char_range.begin > span.char_range.end) {
    throw std::out_of_range("span outside sentence");
  }
  const std::vector<NumericLiteral> lits = find_numeric_literals(sentence, lexicon);
  for (std::size_t k = 0; k < lits.size(); ++k) {
    if (!span.char_range.overlaps(lits[k].digits)) continue;
    const std::size_t limit =
        k + 1 < lits.size() ? lits[k + 1].signed_range.begin : sentence.size();
    Expansion e = expand_literal(sentence, lits[k], limit, lexicon);
    e.range.begin = std::min(e.range.begin, span.char_range.begin);
    e.range.end = std::max(e.range.end, span.char_range.end);
    return make_span(sentence, e, span.sentence_index, lexicon);
  }
  return span;
}

std::vector<NumericSpan> filter_maskable(std::vector<NumericSpan> spans) {
  std::erase_if(spans, [](const NumericSpan& s) { return !s.has_unit_or_scale; });
  return spans;
}

nlohmann::ordered_json span_to_json(const NumericSpan& span) {
  nlohmann::ordered_json j;
  j["sentence_index"] = span.sentence_index;
  j["char_range"] = {span.char_range.begin, span.char_range.end};
  j["surface"] = span.surface;
  j["kind"] = std::string(to_string(span.kind));
  j["has_unit_or_scale"] = span.has_unit_or_scale;
  j["unit_groups"] = span.unit_groups;
  return j;
}

NumericSpan span_from_json(const nlohmann::json& j) {
  NumericSpan span;
  span.sentence_index = j.at("sentence_index").get<std::size_t>();
  span.char_range = {j.at("char_range").at(0).get<std::size_t>(),
                     j.at("char_range").at(1).get<std::size_t>()};
  span.surface = j.at("surface").get<std::string>();
  const auto kind = span_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw ParseError(0, "unknown span kind");
  span.kind = *kind;
  span.has_unit_or_scale = j.at("has_unit_or_scale").get<bool>();
  span.unit_groups = j.at("unit_groups").get<std::vector<std::string>>();
  return span;
}

}  // namespace maskbench
