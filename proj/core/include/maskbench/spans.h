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

// Numeric span detection and lexicon-driven expansion.

#ifndef MASKBENCH_SPANS_H_
#define MASKBENCH_SPANS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/lexicon.h"
#include "maskbench/text_util.h"

namespace maskbench {

enum class SpanKind { kMoney, kPercent, kCardinal, kQuantity };

std::string_view to_string(SpanKind kind);
std::optional<SpanKind> span_kind_from_string(std::string_view text);

struct NumericSpan {
  std::size_t sentence_index = 0;
  CharRange char_range;  // within the sentence text
  std::string surface;
  SpanKind kind = SpanKind::kCardinal;
  bool has_unit_or_scale = false;
  // Ids of every lexicon group consumed by the span, in surface order.
  std::vector<std::string> unit_groups;

  friend bool operator==(const NumericSpan&, const NumericSpan&) = default;
};

// A bare numeric literal: digits with optional 3-digit comma groups and an
// optional fraction, plus the sign that belongs to it.
struct NumericLiteral {
  CharRange digits;  // "1,230.5"
  CharRange signed_range;  // includes a leading '-' or the "(...)" pair
  bool negative = false;
};

// Literals in `text`, left to right. A digit run glued to a letter that does
// not start a lexicon alias ("Q4", "3rd", "7A") is not a literal.
std::vector<NumericLiteral> find_numeric_literals(std::string_view text,
                                                  const UnitLexicon& lexicon);

// Detected and already expanded spans, non-overlapping and ordered.
std::vector<NumericSpan> detect_numeric_entities(
    std::string_view sentence, const UnitLexicon& lexicon,
    std::size_t sentence_index = 0);

// Grows `span` to the currency aliases on its left and the chain of
// scale/unit aliases on its right (longest alias first). Idempotent. The
// right chain stops before the next literal.
NumericSpan expand_span(std::string_view sentence, const NumericSpan& span,
                        const UnitLexicon& lexicon);

// Keeps spans carrying a unit or verbal scale.
std::vector<NumericSpan> filter_maskable(std::vector<NumericSpan> spans);

nlohmann::ordered_json span_to_json(const NumericSpan& span);
NumericSpan span_from_json(const nlohmann::json& j);

}  // namespace maskbench

#endif  // MASKBENCH_SPANS_H_
