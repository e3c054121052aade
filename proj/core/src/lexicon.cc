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

#include "maskbench/lexicon.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "maskbench/errors.h"
#include "maskbench/text_util.h"

namespace maskbench {

// Defined in the generated builtin_lexicon.cc.
extern const char* const kBuiltinLexiconJson;

namespace {

bool chars_equal(char a, char b, bool case_sensitive) {
  return case_sensitive ? a == b : ascii_lower(a) == ascii_lower(b);
}

// End offset when `alias` matches forward from `pos`, else npos.
std::size_t match_forward(std::string_view text, std::size_t pos,
                          const UnitAlias& alias) {
  std::size_t i = pos;
  for (char a : alias.text) {
    if (a == ' ') {
      if (i >= text.size() || !is_space(text[i])) return std::string_view::npos;
      while (i < text.size() && is_space(text[i])) ++i;
      continue;
    }
    if (i >= text.size() || !chars_equal(text[i], a, alias.case_sensitive)) {
      return std::string_view::npos;
    }
    ++i;
  }
  return i;
}

// Begin offset when `alias` matches backward ending at `end`, else npos.
std::size_t match_backward(std::string_view text, std::size_t end,
                           const UnitAlias& alias) {
  std::size_t i = end;
  for (auto it = alias.text.rbegin(); it != alias.text.rend(); ++it) {
    if (*it == ' ') {
      if (i == 0 || !is_space(text[i - 1])) return std::string_view::npos;
      while (i > 0 && is_space(text[i - 1])) --i;
      continue;
    }
    if (i == 0 || !chars_equal(text[i - 1], *it, alias.case_sensitive)) {
      return std::string_view::npos;
    }
    --i;
  }
  return i;
}

bool boundaries_ok(std::string_view text, std::size_t begin, std::size_t end,
                   const UnitAlias& alias) {
  if (is_alpha(alias.text.front()) && begin > 0 && is_alpha(text[begin - 1])) {
    return false;
  }
  if (is_alnum(alias.text.back()) && end < text.size() && is_alnum(text[end])) {
    return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(UnitCategory category) {
  switch (category) {
    case UnitCategory::kCurrency: return "currency";
    case UnitCategory::kPercent: return "percent";
    case UnitCategory::kQuantity: return "quantity";
    case UnitCategory::kScale: return "scale";
    case UnitCategory::kOther: return "other";
  }
  return "other";
}

UnitCategory unit_category_from_string(std::string_view text) {
  if (text == "currency") return UnitCategory::kCurrency;
  if (text == "percent") return UnitCategory::kPercent;
  if (text == "quantity") return UnitCategory::kQuantity;
  if (text == "scale") return UnitCategory::kScale;
  if (text == "other") return UnitCategory::kOther;
  throw LexiconError("unknown unit category '" + std::string(text) + "'");
}

UnitLexicon::UnitLexicon(std::vector<UnitGroup> groups)
    : groups_(std::move(groups)) {
  std::map<std::string, std::string> seen_ids;
  // Case-insensitive aliases collide with anything equal under folding.
  std::map<std::string, std::string> folded_owner;
  std::map<std::string, std::string> exact_owner;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const UnitGroup& group = groups_[g];
    if (group.id.empty()) throw LexiconError("unit group without id");
    if (!seen_ids.emplace(group.id, group.id).second) {
      throw LexiconError("duplicate unit group id '" + group.id + "'");
    }
    if (group.aliases.empty()) {
      throw LexiconError("unit group '" + group.id + "' has no aliases");
    }
    if (group.is_scale) {
      if (!group.scale_factor || group.scale_factor->sign() <= 0) {
        throw LexiconError("scale group '" + group.id +
                           "' needs a positive scale_factor");
      }
    } else if (group.scale_factor) {
      throw LexiconError("non-scale group '" + group.id +
                         "' must not carry a scale_factor");
    }
    for (std::size_t a = 0; a < group.aliases.size(); ++a) {
      const UnitAlias& alias = group.aliases[a];
      if (alias.text.empty() || alias.text.front() == ' ' ||
          alias.text.back() == ' ') {
        throw LexiconError("bad alias in group '" + group.id + "'");
      }
      const std::string lower = to_lower_ascii(alias.text);
      auto clash = [&](const std::string& other) {
        throw LexiconError("alias '" + alias.text + "' of group '" + group.id +
                           "' collides with group '" + other + "'");
      };
      if (auto it = folded_owner.find(lower); it != folded_owner.end()) {
        clash(it->second);
      }
      if (alias.case_sensitive) {
        if (auto it = exact_owner.find(alias.text); it != exact_owner.end()) {
          clash(it->second);
        }
        exact_owner.emplace(alias.text, group.id);
      } else {
        for (const auto& [text, owner] : exact_owner) {
          if (to_lower_ascii(text) == lower) clash(owner);
        }
        folded_owner.emplace(lower, group.id);
      }
      entries_.push_back(Entry{g, a});
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [this](const Entry& a, const Entry& b) {
                     return alias(a).text.size() > alias(b).text.size();
                   });
}

UnitLexicon UnitLexicon::from_json(const nlohmann::json& doc) {
  try {
    std::vector<UnitGroup> groups;
    for (const auto& g : doc.at("groups")) {
      UnitGroup group;
      group.id = g.at("id").get<std::string>();
      group.canonical = g.value("canonical", group.id);
      group.is_scale = g.value("is_scale", false);
      group.category = unit_category_from_string(
          g.value("category", group.is_scale ? "scale" : "other"));
      if (g.contains("scale_factor")) {
        const auto& f = g.at("scale_factor");
        const std::string text =
            f.is_string() ? f.get<std::string>() : f.dump();
        group.scale_factor = Decimal::parse(text);
        if (!group.scale_factor) {
          throw LexiconError("bad scale_factor '" + text + "' in group '" +
                             group.id + "'");
        }
      }
      for (const auto& a : g.at("aliases")) {
        UnitAlias alias;
        if (a.is_string()) {
          alias.text = a.get<std::string>();
        } else {
          alias.text = a.at("text").get<std::string>();
          alias.case_sensitive = a.value("case_sensitive", false);
          alias.attached_only = a.value("attached_only", false);
        }
        group.aliases.push_back(std::move(alias));
      }
      groups.push_back(std::move(group));
    }
    return UnitLexicon(std::move(groups));
  } catch (const nlohmann::json::exception& e) {
    throw LexiconError(std::string("malformed lexicon: ") + e.what());
  }
}

UnitLexicon UnitLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open lexicon " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw LexiconError("lexicon " + path.string() + ": " + e.what());
  }
}

const UnitLexicon& UnitLexicon::builtin() {
  static const UnitLexicon lexicon =
      from_json(nlohmann::json::parse(kBuiltinLexiconJson));
  return lexicon;
}

nlohmann::ordered_json UnitLexicon::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["groups"] = nlohmann::ordered_json::array();
  for (const UnitGroup& g : groups_) {
    nlohmann::ordered_json j;
    j["id"] = g.id;
    j["canonical"] = g.canonical;
    j["category"] = std::string(to_string(g.category));
    j["is_scale"] = g.is_scale;
    if (g.scale_factor) j["scale_factor"] = g.scale_factor->to_string();
    j["aliases"] = nlohmann::ordered_json::array();
    for (const UnitAlias& a : g.aliases) {
      nlohmann::ordered_json aj;
      aj["text"] = a.text;
      aj["case_sensitive"] = a.case_sensitive;
      if (a.attached_only) aj["attached_only"] = true;
      j["aliases"].push_back(std::move(aj));
    }
    doc["groups"].push_back(std::move(j));
  }
  return doc;
}

const UnitGroup* UnitLexicon::find(std::string_view id) const {
  for (const UnitGroup& g : groups_) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

bool UnitLexicon::selected(std::size_t group, GroupSelect select) const {
  const UnitGroup& g = groups_[group];
  switch (select) {
    case GroupSelect::kAll: return true;
    case GroupSelect::kScale: return g.is_scale;
    case GroupSelect::kNonScale: return !g.is_scale;
    case GroupSelect::kCurrency: return g.category == UnitCategory::kCurrency;
  }
  return false;
}

std::optional<AliasMatch> UnitLexicon::match_at(std::string_view text,
                                                std::size_t pos,
                                                GroupSelect select,
                                                bool after_gap) const {
  std::optional<AliasMatch> best;
  for (const Entry& e : entries_) {
    if (!selected(e.group, select)) continue;
    const UnitAlias& a = alias(e);
    if (after_gap && a.attached_only) continue;
    const std::size_t end = match_forward(text, pos, a);
    if (end == std::string_view::npos) continue;
    if (!boundaries_ok(text, pos, end, a)) continue;
    if (!best || end > best->end) best = AliasMatch{e.group, pos, end};
  }
  return best;
}

std::optional<AliasMatch> UnitLexicon::match_ending_at(std::string_view text,
                                                       std::size_t end,
                                                       GroupSelect select) const {
  std::optional<AliasMatch> best;
  for (const Entry& e : entries_) {
    if (!selected(e.group, select)) continue;
    const UnitAlias& a = alias(e);
    const std::size_t begin = match_backward(text, end, a);
    if (begin == std::string_view::npos) continue;
    if (!boundaries_ok(text, begin, end, a)) continue;
    if (!best || begin < best->begin) best = AliasMatch{e.group, begin, end};
  }
  return best;
}

}  // namespace maskbench
