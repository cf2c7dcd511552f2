#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "trdsa/combinatorics.hpp"
#include "trdsa/errors.hpp"
#include "trdsa/numeric.hpp"
#include "trdsa/params.hpp"
#include "trdsa/probability.hpp"

namespace trdsa::analytics {

using combinatorics::CoefficientTable;

namespace detail {

// Accumulates terms of one backend: compensated for double, exact otherwise.
template <class T>
class Accumulator {
 public:
  void add(const T& x) {
    if constexpr (std::is_same_v<T, double>) {
      sum_.add(x);
    } else {
      sum_ += x;
    }
  }
  [[nodiscard]] T value() const {
    if constexpr (std::is_same_v<T, double>) {
      return sum_.value();
    } else {
      return sum_;
    }
  }

 private:
  std::conditional_t<std::is_same_v<T, double>, CompensatedSum, T> sum_{};
};

inline void check_depth(long depth) {
  if (depth < 0) throw ValidationError("confirmation depth Z must be >= 0 (got " + std::to_string(depth) + ")");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lead of the attacker at confirmation time.

/// Pr{b = k | E} = I^k (1-I)^{Z+1} binom(k+Z, k): probability the attacker
/// holds k blocks when the honest branch has mined Z+1 blocks.
template <class T>
Probability<T> lead_pmf(const HashShare& share, long depth, long k) {
  detail::check_depth(depth);
  if (k < 0 || k > depth + 1) {
    throw std::out_of_range("lead count k must satisfy 0 <= k <= Z+1 (got k=" + std::to_string(k) +
                            ", Z=" + std::to_string(depth) + ")");
  }
  const auto ku = static_cast<std::uint64_t>(k);
  const auto honest = static_cast<std::uint64_t>(depth + 1);
  const BigCount ways = combinatorics::binomial(static_cast<std::size_t>(k + depth), static_cast<std::size_t>(k));
  if constexpr (std::is_same_v<T, double>) {
    const double i = share.value();
    const ScaledDouble v = ScaledDouble::from_count(ways) * ScaledDouble::power(i, ku) *
                           ScaledDouble::power(1.0 - i, honest);
    return Probability<double>::checked(v.to_double(), "lead pmf");
  } else {
    const Rational& i = share.exact();
    return Probability<Rational>::checked(Rational(ways) * int_power(i, ku) * int_power(Rational(1 - i), honest),
                                          "lead pmf");
  }
}

/// The lead pmf on k = 0..Z+1 together with the remaining mass Pr{b > Z+1 | E}.
template <class T>
struct LeadDistribution {
  long depth = 0;
  std::vector<T> pmf;
  T tail{0};
};

template <class T>
LeadDistribution<T> lead_distribution(const HashShare& share, long depth) {
  detail::check_depth(depth);
  LeadDistribution<T> dist;
  dist.depth = depth;
  dist.pmf.reserve(static_cast<std::size_t>(depth + 2));
  detail::Accumulator<T> mass;
  for (long k = 0; k <= depth + 1; ++k) {
    dist.pmf.push_back(lead_pmf<T>(share, depth, k).value());
    mass.add(dist.pmf.back());
  }
  dist.tail = Probability<T>::checked(T(1) - mass.value(), "lead tail").value();
  return dist;
}

/// Pr{b > Z+1 | E}: the attacker is already ahead when the transaction confirms.
template <class T>
Probability<T> lead_tail(const HashShare& share, long depth) {
  return Probability<T>::checked(lead_distribution<T>(share, depth).tail, "lead tail");
}

// ---------------------------------------------------------------------------
// Catch-up race Q(l, m, n).

/// One addend a_{i,m} (1-I)^i I^{m+1+i} of the closed form.
struct CatchUpTerm {
  std::size_t index = 0;
  BigCount coefficient;
  double value = 0.0;
};

namespace detail {

// Boundary value of the race, or nullopt for an interior state.
template <class T>
std::optional<Probability<T>> race_boundary(const RaceQuery& query) {
  query.validate();
  if (query.lag == -1) return Probability<T>::checked(T(1));
  if (query.elapsed == query.deadline) return Probability<T>::checked(T(0));
  return std::nullopt;
}

inline void require_table(const CoefficientTable& table, const RaceQuery& query) {
  const auto top = static_cast<std::size_t>(query.remaining() - 1);
  const auto lag = static_cast<std::size_t>(query.lag);
  if (!table.covers(top, lag)) {
    throw ValidationError("coefficient table (i<=" + std::to_string(table.max_i()) + ", m<=" +
                          std::to_string(table.max_m()) + ") too small for Q(l=" + std::to_string(query.deadline) +
                          ", m=" + std::to_string(query.lag) + ", n=" + std::to_string(query.elapsed) + ")");
  }
}

inline CoefficientTable table_for(const RaceQuery& query) {
  const long rows = query.remaining() > 0 ? query.remaining() - 1 : 0;
  const long lag = query.lag > 0 ? query.lag : 0;
  return CoefficientTable(static_cast<std::size_t>(rows), static_cast<std::size_t>(lag));
}

}  // namespace detail

/// Probability that the attacker, lagging by m with n of l honest blocks
/// mined, gets ahead before the honest side reaches l:
///
///   Q(l, m, n) = sum_{i=0}^{l-n-1} a_{i,m} (1-I)^i I^{m+1+i}   (m >= 0, n < l)
///
/// with Q = 1 at m = -1 and Q = 0 at n = l for m >= 0. A tie at the deadline
/// (m = 0, n = l) counts as a loss.
template <class T>
Probability<T> catch_up_probability(const RaceQuery& query, const HashShare& share, const CoefficientTable& table) {
  if (auto boundary = detail::race_boundary<T>(query)) return *boundary;
  detail::require_table(table, query);
  if (share.is_zero()) return Probability<T>::checked(T(0));

  const auto lag = static_cast<std::size_t>(query.lag);
  const auto terms = static_cast<std::size_t>(query.remaining());
  if constexpr (std::is_same_v<T, double>) {
    const double i = share.value();
    ScaledDouble weight = ScaledDouble::power(i, lag + 1);
    const ScaledDouble step = ScaledDouble(1.0 - i) * ScaledDouble(i);
    CompensatedSum sum;
    for (std::size_t k = 0; k < terms; ++k) {
      sum.add((ScaledDouble::from_count(table.at(k, lag)) * weight).to_double());
      weight *= step;
    }
    return Probability<double>::checked(sum.value(), "Q(l,m,n)");
  } else {
    const Rational& i = share.exact();
    const Rational step = (1 - i) * i;
    Rational weight = int_power(i, lag + 1);
    Rational sum(0);
    for (std::size_t k = 0; k < terms; ++k) {
      sum += Rational(table.at(k, lag)) * weight;
      weight *= step;
    }
    return Probability<Rational>::checked(sum, "Q(l,m,n)");
  }
}

template <class T>
Probability<T> catch_up_probability(const RaceQuery& query, const HashShare& share) {
  if (auto boundary = detail::race_boundary<T>(query)) return *boundary;
  return catch_up_probability<T>(query, share, detail::table_for(query));
}

/// Term-by-term breakdown of the closed form (float values); empty on boundaries.
inline std::vector<CatchUpTerm> catch_up_terms(const RaceQuery& query, const HashShare& share,
                                               const CoefficientTable& table) {
  if (detail::race_boundary<double>(query)) return {};
  detail::require_table(table, query);
  const auto lag = static_cast<std::size_t>(query.lag);
  const double i = share.value();
  ScaledDouble weight = ScaledDouble::power(i, lag + 1);
  const ScaledDouble step = ScaledDouble(1.0 - i) * ScaledDouble(i);
  std::vector<CatchUpTerm> out;
  for (std::size_t k = 0; k < static_cast<std::size_t>(query.remaining()); ++k) {
    const BigCount& a = table.at(k, lag);
    out.push_back({k, a, (ScaledDouble::from_count(a) * weight).to_double()});
    weight *= step;
  }
  return out;
}

struct OracleLimits {
  long max_deadline = 64;
};

/// Backward dynamic programming on Q(l,m,n) = I Q(l,m-1,n) + (1-I) Q(l,m+1,n+1).
/// Returns Q(l, lag, elapsed) for lag = 0..max_lag.
///
/// Stages run from n = l-1 down to `elapsed`. At stage s only lags up to
/// max_lag + (s - elapsed) are reachable from the requested row. Within a
/// stage lags are swept upward because each value needs the one below it.
template <class T>
std::vector<T> catch_up_oracle_row(long deadline, long elapsed, long max_lag, const HashShare& share,
                                   OracleLimits limits = {}) {
  RaceQuery{deadline, max_lag, elapsed}.validate();
  if (max_lag < 0) throw ValidationError("oracle row needs max_lag >= 0");
  if (deadline > limits.max_deadline) {
    throw ResourceLimitError("oracle deadline l=" + std::to_string(deadline) + " exceeds cap " +
                             std::to_string(limits.max_deadline));
  }
  const T attacker = share.as<T>();
  const T honest = T(1) - attacker;
  const auto width_at = [&](long stage) { return static_cast<std::size_t>(max_lag + (stage - elapsed) + 1); };

  std::vector<T> next(width_at(deadline), T(0));  // stage l: every lag >= 0 has lost
  std::vector<T> cur;
  for (long stage = deadline - 1; stage >= elapsed; --stage) {
    const std::size_t width = width_at(stage);
    cur.assign(width, T(0));
    T below(1);  // lag -1 at this stage has won
    for (std::size_t lag = 0; lag < width; ++lag) {
      cur[lag] = attacker * below + honest * next[lag + 1];
      below = cur[lag];
    }
    next.swap(cur);
  }
  next.resize(static_cast<std::size_t>(max_lag + 1));
  return next;
}

/// Q(l, m, n) from the recursion alone; independent of the coefficient table.
template <class T>
Probability<T> catch_up_oracle(const RaceQuery& query, const HashShare& share, OracleLimits limits = {}) {
  if (auto boundary = detail::race_boundary<T>(query)) return *boundary;
  auto row = catch_up_oracle_row<T>(query.deadline, query.elapsed, query.lag, share, limits);
  return Probability<T>::checked(row[static_cast<std::size_t>(query.lag)], "oracle Q(l,m,n)");
}

// ---------------------------------------------------------------------------
// Time-unrestricted limit and end-to-end attack probabilities.

/// P(m): gambler's-ruin probability of ever getting ahead from lag m.
template <class T>
Probability<T> tu_catch_up_probability(long lag, const HashShare& share) {
  if (lag < -1) throw ValidationError("lag m must be >= -1 (got " + std::to_string(lag) + ")");
  if (share.is_majority()) return Probability<T>::checked(T(1));
  const T i = share.as<T>();
  const T ratio = i / (T(1) - i);
  return Probability<T>::checked(int_power(ratio, static_cast<std::uint64_t>(lag + 1)), "P(m)");
}

/// P_s^(TR) = Pr{b > Z+1} + sum_k Pr{b = k} Q(L, Z+1-k, 0).
template <class T>
Probability<T> tr_success_probability(const AttackParams& params, const CoefficientTable& table) {
  params.validate();
  const auto dist = lead_distribution<T>(params.share, params.depth);
  detail::Accumulator<T> sum;
  sum.add(dist.tail);
  for (long k = 0; k <= params.depth + 1; ++k) {
    const RaceQuery race{params.window, params.depth + 1 - k, 0};
    sum.add(dist.pmf[static_cast<std::size_t>(k)] * catch_up_probability<T>(race, params.share, table).value());
  }
  return Probability<T>::checked(sum.value(), "P_tr");
}

inline CoefficientTable table_for_attack(long window, long max_depth) {
  return CoefficientTable(static_cast<std::size_t>(window > 0 ? window - 1 : 0),
                          static_cast<std::size_t>(max_depth > 0 ? max_depth + 1 : 1));
}

template <class T>
Probability<T> tr_success_probability(const AttackParams& params) {
  params.validate();
  return tr_success_probability<T>(params, table_for_attack(params.window, params.depth));
}

/// P_s^(TU) = 1 - sum_k binom(k+Z,k) I^k (1-I)^{Z+1} [1 - (I/(1-I))^{Z+2-k}];
/// exactly 1 for I >= 1/2.
template <class T>
Probability<T> tu_success_probability(const HashShare& share, long depth) {
  detail::check_depth(depth);
  if (share.is_majority()) return Probability<T>::checked(T(1));
  const auto dist = lead_distribution<T>(share, depth);
  const T i = share.as<T>();
  const T ratio = i / (T(1) - i);
  detail::Accumulator<T> sum;
  sum.add(dist.tail);
  for (long k = 0; k <= depth + 1; ++k) {
    sum.add(dist.pmf[static_cast<std::size_t>(k)] * int_power(ratio, static_cast<std::uint64_t>(depth + 2 - k)));
  }
  return Probability<T>::checked(sum.value(), "P_tu");
}

// ---------------------------------------------------------------------------
// Confirmation-depth policy.

struct DepthProbe {
  long depth = 0;
  double success = 0.0;
};

struct DepthRecommendation {
  std::optional<long> depth;
  std::vector<DepthProbe> scan;
  /// Some step of the scan saw P_tr grow with Z.
  bool non_monotone = false;
};

/// Smallest Z in 0..max_depth with P_tr(I, Z, L) <= threshold. Every Z is
/// evaluated: P_tr is not monotone in Z once I is large.
template <class T = double>
DepthRecommendation min_confirmation_depth(const HashShare& share, long window, double threshold, long max_depth) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("threshold must satisfy 0 < threshold < 1 (got " + std::to_string(threshold) + ")");
  }
  detail::check_depth(max_depth);
  AttackParams{share, 0, window}.validate();
  const CoefficientTable table = table_for_attack(window, max_depth);
  const T limit = [&] {
    if constexpr (std::is_same_v<T, double>) {
      return threshold;
    } else {
      return rational_from_double(threshold);
    }
  }();

  DepthRecommendation out;
  std::optional<T> previous;
  for (long z = 0; z <= max_depth; ++z) {
    const auto p = tr_success_probability<T>(AttackParams{share, z, window}, table);
    out.scan.push_back({z, p.to_double()});
    if (!out.depth && p.value() <= limit) out.depth = z;
    if (previous && p.value() > *previous) out.non_monotone = true;
    previous = p.value();
  }
  return out;
}

/// Naive expected payoff p * value - sunk_cost; ignores mining revenue and
/// any cost that scales with the attack length.
inline double expected_reward(double success_probability, double value, double sunk_cost) {
  if (!(success_probability >= 0.0 && success_probability <= 1.0)) {
    throw ValidationError("success probability must lie in [0, 1]");
  }
  if (value < 0.0 || sunk_cost < 0.0) throw ValidationError("value and sunk cost must be >= 0");
  return success_probability * value - sunk_cost;
}

}  // namespace trdsa::analytics
