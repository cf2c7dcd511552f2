#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "trdsa/errors.hpp"

namespace trdsa {

/// Arbitrary-precision nonnegative path count. Only ever built from sums and
/// products of nonnegative values.
using BigCount = boost::multiprecision::cpp_int;

/// Exact rational scalar used by the exact backend.
using Rational = boost::multiprecision::cpp_rational;

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  [[nodiscard]] double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// A double with a detached binary exponent: value = mantissa * 2^exponent.
/// Lets a huge path count meet a tiny probability power without overflow or
/// underflow in between.
class ScaledDouble {
 public:
  ScaledDouble() = default;
  explicit ScaledDouble(double x) { assign(x, 0); }

  /// Nearest-below 53-bit approximation of a big integer (error < 1 ulp).
  static ScaledDouble from_count(const BigCount& count) {
    if (count.is_zero()) return ScaledDouble{};
    const auto bits = static_cast<std::int64_t>(boost::multiprecision::msb(count)) + 1;
    if (bits <= 53) return ScaledDouble(count.convert_to<double>());
    const auto shift = static_cast<unsigned>(bits - 53);
    const BigCount top = count >> shift;
    ScaledDouble out;
    out.assign(top.convert_to<double>(), shift);
    return out;
  }

  /// base^exponent by repeated squaring, renormalizing every step.
  static ScaledDouble power(double base, std::uint64_t exponent) {
    ScaledDouble result(1.0);
    ScaledDouble square(base);
    while (exponent != 0) {
      if (exponent & 1U) result *= square;
      exponent >>= 1U;
      if (exponent != 0) square *= square;
    }
    return result;
  }

  ScaledDouble& operator*=(const ScaledDouble& other) {
    assign(mantissa_ * other.mantissa_, exponent_ + other.exponent_);
    return *this;
  }

  friend ScaledDouble operator*(ScaledDouble lhs, const ScaledDouble& rhs) {
    lhs *= rhs;
    return lhs;
  }

  [[nodiscard]] double to_double() const {
    if (mantissa_ == 0.0) return 0.0;
    if (exponent_ < -2200) return 0.0;
    if (exponent_ > 2200) return mantissa_ * HUGE_VAL;
    return std::ldexp(mantissa_, static_cast<int>(exponent_));
  }

  [[nodiscard]] bool is_zero() const { return mantissa_ == 0.0; }

 private:
  void assign(double mantissa, std::int64_t exponent) {
    if (mantissa == 0.0 || !std::isfinite(mantissa)) {
      mantissa_ = mantissa;
      exponent_ = 0;
      return;
    }
    int e = 0;
    mantissa_ = std::frexp(mantissa, &e);
    exponent_ = exponent + e;
  }

  double mantissa_ = 0.0;
  std::int64_t exponent_ = 0;
};

/// Exact value of a finite double as a rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw ValidationError("non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);
  // m * 2^53 is an integer for every finite double.
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  e -= 53;
  BigCount num(mant);
  BigCount den(1);
  if (e >= 0) {
    num <<= static_cast<unsigned>(e);
  } else {
    den <<= static_cast<unsigned>(-e);
  }
  return Rational(num, den);
}

/// Parses a plain or scientific decimal literal ("0.3", "1e-3", "-2.5E+1")
/// into the exact rational it denotes.
inline Rational parse_decimal(std::string_view text) {
  const std::string original(text);
  auto fail = [&original] {
    throw ValidationError("'" + original + "' is not a decimal number");
  };
  if (text.empty()) fail();
  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  BigCount digits(0);
  std::int64_t scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  std::size_t pos = 0;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (seen_point) --scale;
      seen_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) fail();
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') fail();
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    if (pos >= text.size()) fail();
    std::int64_t exponent = 0;
    for (; pos < text.size(); ++pos) {
      const char c = text[pos];
      if (c < '0' || c > '9') fail();
      exponent = exponent * 10 + (c - '0');
      if (exponent > 100000) fail();
    }
    scale += exp_negative ? -exponent : exponent;
  }
  BigCount num = negative ? BigCount(-digits) : digits;
  BigCount den(1);
  const BigCount ten_power = boost::multiprecision::pow(BigCount(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
  if (scale >= 0) {
    num *= ten_power;
  } else {
    den = ten_power;
  }
  return Rational(num, den);
}

/// Integer power for either scalar backend.
template <class T>
T int_power(T base, std::uint64_t exponent) {
  T result(1);
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    exponent >>= 1U;
    if (exponent != 0) base *= base;
  }
  return result;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

}  // namespace trdsa
