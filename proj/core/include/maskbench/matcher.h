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

// Precision-relaxed numeric matching with unit groups.
//
// Values are exact decimals end to end; no binary floating point is used.

#ifndef MASKBENCH_MATCHER_H_
#define MASKBENCH_MATCHER_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "maskbench/decimal.h"
#include "maskbench/lexicon.h"

namespace maskbench {

struct NormalizedNumber {
  Decimal value;      // literal × scale factor, sign included
  Decimal precision;  // 10^(least significant nonzero digit) × scale factor
  std::optional<std::string> scale_group;
  // The bare literal and its own precision, before scaling.
  Decimal mantissa;
  Decimal mantissa_precision;
};

// Parses the single numeric literal in `span_text` and the first scale word
// chained after it. Thousands separators are dropped; "(7.2)" and "-7.2" are
// negative; percent values are kept as written (10% -> 10).
// Throws AmbiguousNumber unless exactly one literal is present.
NormalizedNumber normalize_number(std::string_view span_text,
                                  const UnitLexicon& lexicon);

// 10^(position of the least significant nonzero digit) of a literal such as
// "1,230,000" (-> 10^4) or "0.50" (-> 10^-1). Zero gets the position of its
// last written digit.
Decimal literal_precision(std::string_view literal);

using UnitSet = std::set<std::string>;

// Non-scale group ids found by a greedy longest-alias scan; digits and scale
// words are never consumed as units.
UnitSet extract_units(std::string_view span_text, const UnitLexicon& lexicon);

enum class MatchReason {
  kOk,
  kTruthNoNumber,
  kTruthAmbiguous,
  kPredictionNoNumber,
  kPredictionAmbiguous,
  // A scale word without digits ("several million").
  kPredictionScaleOnly,
};

std::string_view to_string(MatchReason reason);
std::optional<MatchReason> match_reason_from_string(std::string_view text);

struct MatchResult {
  bool is_numeric_match = false;
  bool is_unit_match = false;
  bool overall = false;
  MatchReason reason = MatchReason::kOk;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// round(a / p*) == round(b / p*) with p* the coarser precision, halves away
// from zero.
bool numeric_match(const NormalizedNumber& a, const NormalizedNumber& b);

// The same comparison on the unscaled literals.
bool mantissa_match(const NormalizedNumber& a, const NormalizedNumber& b);

// Numeric match on values, subset match on units (truth ⊆ prediction).
MatchResult match_spans(std::string_view ground_truth,
                        std::string_view prediction,
                        const UnitLexicon& lexicon);

nlohmann::ordered_json match_to_json(const MatchResult& result);
MatchResult match_from_json(const nlohmann::json& j);

}  // namespace maskbench

#endif  // MASKBENCH_MATCHER_H_
