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

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace maskbench {
namespace {

Decimal::Int pow10_int(int n) {
  Decimal::Int r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Decimal::Decimal(Int coefficient, int exponent)
    : coefficient_(std::move(coefficient)), exponent_(exponent) {
  canonicalize();
}

void Decimal::canonicalize() {
  if (coefficient_.is_zero()) {
    exponent_ = 0;
    return;
  }
  while (true) {
    Int q, r;
    boost::multiprecision::divide_qr(coefficient_, Int(10), q, r);
    if (!r.is_zero()) break;
    coefficient_ = std::move(q);
    ++exponent_;
  }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  int fraction_digits = 0;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++fraction_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) return std::nullopt;
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    const std::string rest(text.substr(i));
    if (rest.empty()) return std::nullopt;
    char* end = nullptr;
    const long e = std::strtol(rest.c_str(), &end, 10);
    if (end != rest.c_str() + rest.size()) return std::nullopt;
    exponent = static_cast<int>(e);
    i = text.size();
  }
  if (i != text.size()) return std::nullopt;
  // Leading zeros would make boost read the digits as octal.
  const std::size_t nz = digits.find_first_not_of('0');
  Int coefficient(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  if (negative) coefficient = -coefficient;
  return Decimal(std::move(coefficient), exponent - fraction_digits);
}

Decimal operator*(const Decimal& a, const Decimal& b) {
  return Decimal(a.coefficient_ * b.coefficient_, a.exponent_ + b.exponent_);
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  const int e = std::min(a.exponent_, b.exponent_);
  return Decimal(a.coefficient_ * pow10_int(a.exponent_ - e) +
                     b.coefficient_ * pow10_int(b.exponent_ - e),
                 e);
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  const int e = std::min(a.exponent_, b.exponent_);
  const Decimal::Int lhs = a.coefficient_ * pow10_int(a.exponent_ - e);
  const Decimal::Int rhs = b.coefficient_ * pow10_int(b.exponent_ - e);
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Decimal::to_string() const {
  std::string digits = Int(boost::multiprecision::abs(coefficient_)).str();
  std::string out = sign() < 0 ? "-" : "";
  if (exponent_ >= 0) {
    out += digits;
    if (!is_zero()) out.append(static_cast<std::size_t>(exponent_), '0');
    return out;
  }
  const std::size_t frac = static_cast<std::size_t>(-exponent_);
  if (digits.size() <= frac) {
    out += "0.";
    out.append(frac - digits.size(), '0');
    out += digits;
  } else {
    out += digits.substr(0, digits.size() - frac);
    out += '.';
    out += digits.substr(digits.size() - frac);
  }
  return out;
}

double Decimal::to_double() const { return std::stod(to_string()); }

Decimal::Int divide_round_half_away(const Decimal& numerator,
                                    const Decimal& denominator) {
  if (denominator.is_zero()) throw std::domain_error("division by zero");
  // numerator / denominator = (cn * 10^en) / (cd * 10^ed)
  Decimal::Int n = numerator.coefficient();
  Decimal::Int d = denominator.coefficient();
  const int shift = numerator.exponent() - denominator.exponent();
  if (shift >= 0) {
    n *= pow10_int(shift);
  } else {
    d *= pow10_int(-shift);
  }
  const bool negative = (n.sign() < 0) != (d.sign() < 0);
  n = Decimal::Int(boost::multiprecision::abs(n));
  d = Decimal::Int(boost::multiprecision::abs(d));
  Decimal::Int q, r;
  boost::multiprecision::divide_qr(n, d, q, r);
  if (r * 2 >= d) q += 1;
  return negative ? Decimal::Int(-q) : q;
}

}  // namespace maskbench
