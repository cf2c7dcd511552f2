#pragma once

#include <string>
#include <string_view>
#include <type_traits>

#include "trdsa/errors.hpp"
#include "trdsa/numeric.hpp"

namespace trdsa {

enum class Backend { float_compensated, exact_rational };

inline std::string_view to_string(Backend backend) {
  return backend == Backend::float_compensated ? "float" : "rational";
}

template <class T>
inline constexpr Backend backend_of = std::is_same_v<T, double> ? Backend::float_compensated : Backend::exact_rational;

/// Slack tolerated on the float backend before a value outside [0, 1] is
/// treated as an internal error instead of rounding noise.
inline constexpr double kProbabilitySlack = 1e-12;

/// A probability in [0, 1] carried by one of the two scalar backends.
template <class T>
class Probability {
 public:
  Probability() = default;

  /// Checks the range; float values within kProbabilitySlack outside [0, 1]
  /// are clamped and flagged.
  static Probability checked(T value, std::string_view what = "probability") {
    Probability p;
    if constexpr (std::is_same_v<T, double>) {
      if (!(value >= -kProbabilitySlack && value <= 1.0 + kProbabilitySlack)) {
        throw ConsistencyError(std::string(what) + " evaluated to " + std::to_string(value) + ", outside [0, 1]");
      }
      if (value > 1.0) {
        value = 1.0;
        p.clamped_ = true;
      } else if (value < 0.0) {
        value = 0.0;
        p.clamped_ = true;
      }
    } else {
      if (value < 0 || value > 1) {
        throw ConsistencyError(std::string(what) + " evaluated to " + value.str() + ", outside [0, 1]");
      }
    }
    p.value_ = std::move(value);
    return p;
  }

  [[nodiscard]] const T& value() const { return value_; }
  [[nodiscard]] double to_double() const { return trdsa::to_double(value_); }
  [[nodiscard]] Backend backend() const { return backend_of<T>; }
  /// Set when a float result was pulled back into [0, 1].
  [[nodiscard]] bool clamped() const { return clamped_; }

  friend bool operator==(const Probability& a, const Probability& b) { return a.value_ == b.value_; }

 private:
  T value_{0};
  bool clamped_ = false;
};

}  // namespace trdsa
