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

#include "maskbench/decimal.h"

#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

namespace maskbench {
namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_rational as_rational(const Decimal& d) {
  cpp_rational r(d.coefficient());
  cpp_int p = 1;
  for (int i = 0; i < std::abs(d.exponent()); ++i) p *= 10;
  return d.exponent() >= 0 ? cpp_rational(r * p) : cpp_rational(r / p);
}

TEST(DecimalTest, ParsesAndCanonicalizes) {
  const auto d = Decimal::parse("12.500");
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->coefficient(), 125);
  EXPECT_EQ(d->exponent(), -1);
  EXPECT_EQ(*Decimal::parse("1e6"), Decimal(1, 6));
  EXPECT_EQ(*Decimal::parse("-0.0"), Decimal(0));
  EXPECT_EQ(Decimal::parse("0.0")->exponent(), 0);
}

TEST(DecimalTest, RejectsGarbage) {
  EXPECT_FALSE(Decimal::parse("").has_value());
  EXPECT_FALSE(Decimal::parse("1,000").has_value());
  EXPECT_FALSE(Decimal::parse("abc").has_value());
  EXPECT_FALSE(Decimal::parse("1e").has_value());
  EXPECT_FALSE(Decimal::parse("-").has_value());
}

TEST(DecimalTest, ToStringIsPositional) {
  EXPECT_EQ(Decimal::parse("1.23e9")->to_string(), "1230000000");
  EXPECT_EQ(Decimal::parse("-0.01")->to_string(), "-0.01");
  EXPECT_EQ(Decimal(0).to_string(), "0");
  EXPECT_EQ(Decimal::parse("12.5")->to_string(), "12.5");
}

TEST(DecimalTest, RoundHalfAwayFromZero) {
  const Decimal one(1);
  EXPECT_EQ(divide_round_half_away(*Decimal::parse("12.5"), one), 13);
  EXPECT_EQ(divide_round_half_away(*Decimal::parse("-12.5"), one), -13);
  EXPECT_EQ(divide_round_half_away(*Decimal::parse("12.49"), one), 12);
  EXPECT_EQ(divide_round_half_away(Decimal(1250), Decimal(100)), 13);
  EXPECT_EQ(divide_round_half_away(Decimal(1, -1), Decimal(1, 2)), 0);
}

TEST(DecimalTest, ArithmeticAgreesWithRationalOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> coeff(-1'000'000, 1'000'000);
  std::uniform_int_distribution<int> exp(-6, 6);
  for (int i = 0; i < 2000; ++i) {
    const Decimal a(coeff(rng), exp(rng));
    const Decimal b(coeff(rng), exp(rng));
    EXPECT_EQ(as_rational(a + b), as_rational(a) + as_rational(b));
    EXPECT_EQ(as_rational(a * b), as_rational(a) * as_rational(b));
    EXPECT_EQ(a < b, as_rational(a) < as_rational(b));
    EXPECT_EQ(*Decimal::parse(a.to_string()), a);
  }
}

}  // namespace
}  // namespace maskbench
