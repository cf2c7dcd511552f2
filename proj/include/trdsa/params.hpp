#pragma once

#include <string>
#include <string_view>
#include <type_traits>

#include "trdsa/errors.hpp"
#include "trdsa/numeric.hpp"

namespace trdsa {

/// Probability I that the next block is the attacker's, 0 <= I < 1.
///
/// Keeps the exact rational alongside the double so the same share drives
/// both backends. A share parsed from "0.3" is exactly 3/10 in the exact
/// backend; a share built from a double is that double's binary value.
class HashShare {
 public:
  explicit HashShare(const Rational& exact) : exact_(exact), approx_(exact.convert_to<double>()) { check(); }
  explicit HashShare(double value) : exact_(rational_from_double(value)), approx_(value) { check(); }

  static HashShare parse(std::string_view decimal) { return HashShare(parse_decimal(decimal)); }

  [[nodiscard]] const Rational& exact() const { return exact_; }
  [[nodiscard]] double value() const { return approx_; }

  template <class T>
  [[nodiscard]] T as() const {
    if constexpr (std::is_same_v<T, double>) {
      return approx_;
    } else {
      return exact_;
    }
  }

  [[nodiscard]] bool is_zero() const { return exact_ == 0; }
  /// True when I >= 1/2, the regime where the unbounded race is won surely.
  [[nodiscard]] bool is_majority() const { return exact_ * 2 >= 1; }

 private:
  void check() const {
    if (exact_ < 0 || exact_ >= 1) {
      throw ValidationError("hash share I must satisfy 0 <= I < 1 (got " + exact_.str() + ")");
    }
  }

  Rational exact_;
  double approx_;
};

/// State (l, m, n) of the catch-up race: deadline in honest blocks, attacker
/// lag, honest blocks already mined.
struct RaceQuery {
  long deadline = 1;
  long lag = 0;
  long elapsed = 0;

  void validate() const {
    if (deadline < 1) throw ValidationError("race deadline l must be >= 1 (got " + std::to_string(deadline) + ")");
    if (lag < -1) throw ValidationError("race lag m must be >= -1 (got " + std::to_string(lag) + ")");
    if (elapsed < 0 || elapsed > deadline) {
      throw ValidationError("elapsed honest blocks n must satisfy 0 <= n <= l (got n=" + std::to_string(elapsed) +
                            ", l=" + std::to_string(deadline) + ")");
    }
  }

  [[nodiscard]] long remaining() const { return deadline - elapsed; }
};

/// Attack parameters (I, Z, L).
struct AttackParams {
  HashShare share{0.0};
  long depth = 0;
  long window = 1;

  void validate() const {
    if (depth < 0) throw ValidationError("confirmation depth Z must be >= 0 (got " + std::to_string(depth) + ")");
    if (window < 1) {
      throw ValidationError("attack window L must be >= 1 (got " + std::to_string(window) +
                            "); L = 0 would reduce the attack to the confirmation-time lead alone");
    }
  }
};

}  // namespace trdsa
