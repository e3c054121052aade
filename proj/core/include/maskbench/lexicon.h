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

#ifndef MASKBENCH_LEXICON_H_
#define MASKBENCH_LEXICON_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/decimal.h"

namespace maskbench {

enum class UnitCategory { kCurrency, kPercent, kQuantity, kScale, kOther };

struct UnitAlias {
  std::string text;
  bool case_sensitive = false;
  // Only matches directly against the digits ("5M", never "5 M").
  bool attached_only = false;
};

struct UnitGroup {
  std::string id;
  std::string canonical;
  UnitCategory category = UnitCategory::kOther;
  std::vector<UnitAlias> aliases;
  bool is_scale = false;
  std::optional<Decimal> scale_factor;  // present iff is_scale
};

// Which groups an alias lookup may consider.
enum class GroupSelect { kAll, kScale, kNonScale, kCurrency };

struct AliasMatch {
  std::size_t group = 0;   // index into UnitLexicon::groups()
  std::size_t begin = 0;   // byte range of the matched text
  std::size_t end = 0;
};

// Immutable set of unit groups with greedy longest-alias lookup.
//
// An alias beginning with a letter cannot start right after another letter,
// and one ending with a letter or digit cannot be followed by a letter or
// digit. A space inside an alias matches any run of whitespace.
class UnitLexicon {
 public:
  // Throws LexiconError when aliases collide across groups or a scale group
  // lacks a positive factor.
  explicit UnitLexicon(std::vector<UnitGroup> groups);

  static UnitLexicon from_json(const nlohmann::json& doc);
  static UnitLexicon load(const std::filesystem::path& path);
  // The lexicon shipped in core/data/lexicon.json.
  static const UnitLexicon& builtin();

  nlohmann::ordered_json to_json() const;

  const std::vector<UnitGroup>& groups() const { return groups_; }
  const UnitGroup& group(std::size_t index) const { return groups_[index]; }
  const UnitGroup* find(std::string_view id) const;

  // Longest alias that starts exactly at `pos`. With `after_gap` set (the
  // alias would be separated from the digits by whitespace) attached-only
  // aliases are skipped.
  std::optional<AliasMatch> match_at(std::string_view text, std::size_t pos,
                                     GroupSelect select,
                                     bool after_gap = false) const;
  // Longest alias that ends exactly at `end`.
  std::optional<AliasMatch> match_ending_at(std::string_view text,
                                            std::size_t end,
                                            GroupSelect select) const;

 private:
  struct Entry {
    std::size_t group;
    std::size_t alias;
  };

  bool selected(std::size_t group, GroupSelect select) const;
  const UnitAlias& alias(const Entry& e) const {
    return groups_[e.group].aliases[e.alias];
  }

  std::vector<UnitGroup> groups_;
  std::vector<Entry> entries_;  // sorted by descending alias length
};

std::string_view to_string(UnitCategory category);
UnitCategory unit_category_from_string(std::string_view text);

}  // namespace maskbench

#endif  // MASKBENCH_LEXICON_H_
