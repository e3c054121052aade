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

#include <gtest/gtest.h>

#include "maskbench/errors.h"

namespace maskbench {
namespace {

UnitGroup group(std::string id, std::vector<UnitAlias> aliases,
                UnitCategory cat = UnitCategory::kOther) {
  UnitGroup g;
  g.id = id;
  g.canonical = id;
  g.category = cat;
  g.aliases = std::move(aliases);
  return g;
}

TEST(LexiconTest, BuiltinLoads) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  ASSERT_NE(lex.find("scale_million"), nullptr);
  EXPECT_EQ(*lex.find("scale_million")->scale_factor, Decimal(1, 6));
  EXPECT_EQ(lex.find("currency_usd")->category, UnitCategory::kCurrency);
}

TEST(LexiconTest, RoundTripsThroughJson) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  const UnitLexicon again = UnitLexicon::from_json(lex.to_json());
  EXPECT_EQ(again.to_json(), lex.to_json());
}

TEST(LexiconTest, LongestAliasWins) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  const std::string text = "180 basis points";
  const auto m = lex.match_at(text, 4, GroupSelect::kAll, true);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(lex.group(m->group).id, "basis_points");
  EXPECT_EQ(m->end, text.size());
}

TEST(LexiconTest, WhitespaceInAliasMatchesRuns) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  const std::string text = "1.2 percentage\n points";
  const auto m = lex.match_at(text, 4, GroupSelect::kAll, true);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(lex.group(m->group).id, "percentage_points");
}

TEST(LexiconTest, WordBoundaries) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  EXPECT_FALSE(lex.match_at("5 millions", 2, GroupSelect::kAll, true));
  EXPECT_FALSE(lex.match_at("5 Mike", 2, GroupSelect::kAll, true));
  EXPECT_TRUE(lex.match_at("5M", 1, GroupSelect::kAll, false));
  EXPECT_FALSE(lex.match_at("5 M", 2, GroupSelect::kAll, true));
}

TEST(LexiconTest, CaseSensitivity) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  EXPECT_TRUE(lex.match_at("5 MILLION", 2, GroupSelect::kAll, true));
  EXPECT_FALSE(lex.match_at("5m", 1, GroupSelect::kAll, false));
}

TEST(LexiconTest, BackwardMatch) {
  const UnitLexicon& lex = UnitLexicon::builtin();
  const std::string text = "was US$450";
  const auto m = lex.match_ending_at(text, 7, GroupSelect::kCurrency);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->begin, 4u);
}

TEST(LexiconTest, RejectsCollisions) {
  EXPECT_THROW(UnitLexicon({group("a", {{"mil"}}), group("b", {{"MIL"}})}),
               LexiconError);
  EXPECT_THROW(UnitLexicon({group("a", {{"x"}}), group("a", {{"y"}})}),
               LexiconError);
  EXPECT_THROW(UnitLexicon({group("a", {})}), LexiconError);
  // Case-sensitive aliases may differ by case.
  EXPECT_NO_THROW(UnitLexicon({group("a", {{"M", true}}),
                               group("b", {{"m", true}})}));
}

TEST(LexiconTest, ScaleGroupNeedsFactor) {
  UnitGroup g = group("s", {{"lakh"}}, UnitCategory::kScale);
  g.is_scale = true;
  EXPECT_THROW(UnitLexicon({g}), LexiconError);
  g.scale_factor = Decimal(100000);
  EXPECT_NO_THROW(UnitLexicon({g}));
}

TEST(LexiconTest, MalformedJson) {
  EXPECT_THROW(UnitLexicon::from_json(nlohmann::json::parse(R"({"x":1})")),
               LexiconError);
  EXPECT_THROW(UnitLexicon::load("/nonexistent/lexicon.json"), LexiconError);
}

}  // namespace
}  // namespace maskbench
