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

#include "maskbench/matcher.h"

#include <algorithm>

#include "maskbench/errors.h"
#include "maskbench/spans.h"
#include "maskbench/text_util.h"

namespace maskbench {
namespace {

std::string strip_commas(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != ',') out.push_back(c);
  }
  return out;
}

bool has_scale_word(std::string_view text, const UnitLexicon& lexicon) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (lexicon.match_at(text, i, GroupSelect::kScale, true)) return true;
  }
  return false;
}

}  // namespace

Decimal literal_precision(std::string_view literal) {
  const std::string digits = strip_commas(literal);
  const auto value = Decimal::parse(digits);
  if (!value) throw AmbiguousNumber("not a numeric literal: " + std::string(literal));
  if (!value->is_zero()) return Decimal::pow10(value->exponent());
  const std::size_t point = digits.find('.');
  const int frac = point == std::string::npos
                       ? 0
                       : static_cast<int>(digits.size() - point - 1);
  return Decimal::pow10(-frac);
}

NormalizedNumber normalize_number(std::string_view text,
                                  const UnitLexicon& lexicon) {
  const std::vector<NumericLiteral> lits = find_numeric_literals(text, lexicon);
  if (lits.size() != 1) {
    throw AmbiguousNumber("expected one numeric literal in '" +
                          std::string(text) + "', found " +
                          std::to_string(lits.size()));
  }
  const NumericLiteral& lit = lits.front();
  const std::string_view digits = text.substr(lit.digits.begin, lit.digits.size());

  bool negative = lit.negative;
  const std::string_view whole = trim(text);
  if (!whole.empty() && (whole.front() == '-' ||
                         (whole.front() == '(' && whole.back() == ')'))) {
    negative = true;
  }

  NormalizedNumber n;
  n.mantissa = *Decimal::parse(strip_commas(digits));
  if (negative) n.mantissa = -n.mantissa;
  n.mantissa_precision = literal_precision(digits);

  // First scale word in the alias chain that follows the literal.
  Decimal factor(1);
  std::size_t end = lit.signed_range.end;
  while (true) {
    std::size_t q = end;
    while (q < text.size() && is_space(text[q])) ++q;
    if (q >= text.size()) break;
    const auto m = lexicon.match_at(text, q, GroupSelect::kAll, q != end);
    if (!m) break;
    const UnitGroup& g = lexicon.group(m->group);
    if (g.is_scale) {
      n.scale_group = g.id;
      factor = *g.scale_factor;
      break;
    }
    end = m->end;
  }
  n.value = n.mantissa * factor;
  n.precision = n.mantissa_precision * factor;
  return n;
}

UnitSet extract_units(std::string_view text, const UnitLexicon& lexicon) {
  UnitSet units;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_digit(text[i])) {
      while (i < text.size() &&
             (is_digit(text[i]) ||
              ((text[i] == ',' || text[i] == '.') && i + 1 < text.size() &&
               is_digit(text[i + 1])))) {
        ++i;
      }
      continue;
    }
    const bool attached = i > 0 && is_digit(text[i - 1]);
    if (const auto m = lexicon.match_at(text, i, GroupSelect::kAll, !attached)) {
      const UnitGroup& g = lexicon.group(m->group);
      if (!g.is_scale) units.insert(g.id);
      i = m->end;
      continue;
    }
    if (is_alpha(text[i])) {
      while (i < text.size() && is_alpha(text[i])) ++i;
    } else {
      ++i;
    }
  }
  return units;
}

bool numeric_match(const NormalizedNumber& a, const NormalizedNumber& b) {
  const Decimal& p = std::max(a.precision, b.precision);
  return divide_round_half_away(a.value, p) == divide_round_half_away(b.value, p);
}

bool mantissa_match(const NormalizedNumber& a, const NormalizedNumber& b) {
  const Decimal& p = std::max(a.mantissa_precision, b.mantissa_precision);
  return divide_round_half_away(a.mantissa, p) ==
         divide_round_half_away(b.mantissa, p);
}

std::string_view to_string(MatchReason reason) {
  switch (reason) {
    case MatchReason::kOk: return "ok";
    case MatchReason::kTruthNoNumber: return "truth_no_number";
    case MatchReason::kTruthAmbiguous: return "truth_ambiguous";
    case MatchReason::kPredictionNoNumber: return "prediction_no_number";
    case MatchReason::kPredictionAmbiguous: return "prediction_ambiguous";
    case MatchReason::kPredictionScaleOnly: return "prediction_scale_only";
  }
  return "ok";
}

std::optional<MatchReason> match_reason_from_string(std::string_view text) {
  for (MatchReason r :
       {MatchReason::kOk, MatchReason::kTruthNoNumber, MatchReason::kTruthAmbiguous,
        MatchReason::kPredictionNoNumber, MatchReason::kPredictionAmbiguous,
        MatchReason::kPredictionScaleOnly}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

MatchResult match_spans(std::string_view truth, std::string_view prediction,
                        const UnitLexicon& lexicon) {
  MatchResult r;
  const std::size_t nt = find_numeric_literals(truth, lexicon).size();
  if (nt != 1) {
    r.reason = nt == 0 ? MatchReason::kTruthNoNumber : MatchReason::kTruthAmbiguous;
    return r;
  }
  const std::size_t np = find_numeric_literals(prediction, lexicon).size();
  if (np != 1) {
    if (np > 0) {
      r.reason = MatchReason::kPredictionAmbiguous;
    } else if (has_scale_word(prediction, lexicon)) {
      r.reason = MatchReason::kPredictionScaleOnly;
    } else {
      r.reason = MatchReason::kPredictionNoNumber;
    }
    return r;
  }
  const NormalizedNumber t = normalize_number(truth, lexicon);
  const NormalizedNumber p = normalize_number(prediction, lexicon);
  r.is_numeric_match = numeric_match(t, p);
  const UnitSet ut = extract_units(truth, lexicon);
  const UnitSet up = extract_units(prediction, lexicon);
  r.is_unit_match = std::includes(up.begin(), up.end(), ut.begin(), ut.end());
  r.overall = r.is_numeric_match && r.is_unit_match;
  return r;
}

nlohmann::ordered_json match_to_json(const MatchResult& result) {
  nlohmann::ordered_json j;
  j["is_numeric_match"] = result.is_numeric_match;
  j["is_unit_match"] = result.is_unit_match;
  j["overall"] = result.overall;
  j["reason"] = std::string(to_string(result.reason));
  return j;
}

MatchResult match_from_json(const nlohmann::json& j) {
  MatchResult r;
  r.is_numeric_match = j.at("is_numeric_match").get<bool>();
  r.is_unit_match = j.at("is_unit_match").get<bool>();
  r.overall = j.at("overall").get<bool>();
  const auto reason = match_reason_from_string(j.at("reason").get<std::string>());
  if (!reason) throw ParseError(0, "unknown match reason");
  r.reason = *reason;
  return r;
}

}  // namespace maskbench
