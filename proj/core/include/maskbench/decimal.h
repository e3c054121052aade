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

#ifndef MASKBENCH_DECIMAL_H_
#define MASKBENCH_DECIMAL_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace maskbench {

// Exact base-ten number: coefficient * 10^exponent.
//
// Always kept canonical (no trailing zeros in the coefficient, zero has
// exponent 0), so structural equality is numeric equality.
class Decimal {
 public:
  using Int = boost::multiprecision::cpp_int;

  Decimal() = default;
  Decimal(Int coefficient, int exponent);
  explicit Decimal(long long value) : Decimal(Int(value), 0) {}

  static Decimal pow10(int exponent) { return Decimal(Int(1), exponent); }

  // Accepts an optional sign, digits, an optional fraction and an optional
  // e/E exponent ("-12.50", "1e6"). No grouping separators.
  static std::optional<Decimal> parse(std::string_view text);

  const Int& coefficient() const { return coefficient_; }
  int exponent() const { return exponent_; }
  int sign() const { return coefficient_.sign(); }
  bool is_zero() const { return coefficient_.is_zero(); }

  Decimal operator-() const { return Decimal(-coefficient_, exponent_); }
  Decimal abs() const { return sign() < 0 ? -*this : *this; }
  friend Decimal operator*(const Decimal& a, const Decimal& b);
  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return a + -b; }

  friend bool operator==(const Decimal&, const Decimal&) = default;
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

  // Plain positional notation without exponent: "1230000000", "-0.01".
  std::string to_string() const;

  // Nearest double; for reporting only.
  double to_double() const;

 private:
  void canonicalize();

  Int coefficient_ = 0;
  int exponent_ = 0;
};

// round(numerator / denominator) with halves rounded away from zero.
// Precondition: denominator is non-zero.
Decimal::Int divide_round_half_away(const Decimal& numerator,
                                    const Decimal& denominator);

}  // namespace maskbench

#endif  // MASKBENCH_DECIMAL_H_
