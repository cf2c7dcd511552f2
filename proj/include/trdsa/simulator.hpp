#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "trdsa/errors.hpp"
#include "trdsa/params.hpp"
#include "trdsa/rng.hpp"

namespace trdsa::sim {

struct SimConfig {
  std::uint64_t runs = 10000;
  std::uint64_t seed = 0;
  unsigned parallelism = 1;

  void validate() const {
    if (runs == 0) throw ValidationError("simulation needs runs >= 1");
    if (parallelism == 0) throw ValidationError("simulation needs parallelism >= 1");
  }
};

struct EmpiricalEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  std::uint64_t successes = 0;
};

/// One block of the walk: the attacker's with probability I, else honest.
enum class StepKind { attacker, honest };

inline StepKind draw_step(RngStream& stream, double attacker_share) {
  return stream.bernoulli(attacker_share) ? StepKind::attacker : StepKind::honest;
}

/// Runs `trial(stream)` once per run index and aggregates the successes.
/// Workers take contiguous index blocks; a run's outcome depends only on its
/// own stream, so the total is independent of the partition.
template <class Trial>
EmpiricalEstimate estimate(const SimConfig& config, const Trial& trial) {
  config.validate();
  const std::uint64_t workers = std::min<std::uint64_t>(config.parallelism, config.runs);
  std::vector<std::uint64_t> counts(workers, 0);
  auto work = [&](std::uint64_t w) {
    const std::uint64_t begin = config.runs * w / workers;
    const std::uint64_t end = config.runs * (w + 1) / workers;
    std::uint64_t hits = 0;
    for (std::uint64_t run = begin; run < end; ++run) {
      RngStream stream = rng_stream(config.seed, run);
      if (trial(stream)) ++hits;
    }
    counts[w] = hits;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  EmpiricalEstimate out;
  for (auto c : counts) out.successes += c;
  out.runs = config.runs;
  out.seed = config.seed;
  out.p_hat = static_cast<double>(out.successes) / static_cast<double>(config.runs);
  out.std_error = std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(config.runs));
  return out;
}

namespace detail {

// One catch-up race on the (lag, honest) lattice. Attacker steps move
// (-1, 0), honest steps (+1, +1); the walk stops on lag -1 (win) or on
// honest == deadline (loss, ties included).
inline bool race_once(long lag, long honest, long deadline, double attacker_share, RngStream& stream) {
  const long bound = lag + 1 + 2 * (deadline - honest);
  long steps = 0;
  while (true) {
    if (lag == -1) return true;
    if (honest == deadline) return false;
    if (draw_step(stream, attacker_share) == StepKind::attacker) {
      --lag;
    } else {
      ++lag;
      ++honest;
    }
    if (++steps > bound) throw ConsistencyError("race walk exceeded its step bound");
  }
}

}  // namespace detail

/// Monte Carlo estimate of Q(l, m, n).
inline EmpiricalEstimate simulate_race(const RaceQuery& query, const HashShare& share, const SimConfig& config) {
  query.validate();
  config.validate();
  const double i = share.value();
  return estimate(config, [&](RngStream& stream) {
    return detail::race_once(query.lag, query.elapsed, query.deadline, i, stream);
  });
}

/// Monte Carlo estimate of the full time-restricted attack: blocks are drawn
/// one by one until the honest side has mined Z+1 (TX_1's block plus Z
/// confirmations), then the attacker races from lag Z+1-b for L more honest
/// blocks.
inline EmpiricalEstimate simulate_attack(const AttackParams& params, const SimConfig& config) {
  params.validate();
  config.validate();
  const double i = params.share.value();
  const long honest_needed = params.depth + 1;
  return estimate(config, [&](RngStream& stream) {
    long honest = 0;
    long attacker = 0;
    while (honest < honest_needed) {
      if (draw_step(stream, i) == StepKind::attacker) {
        // b > Z+1 already holds whatever happens before confirmation.
        if (++attacker > honest_needed) return true;
      } else {
        ++honest;
      }
    }
    return detail::race_once(honest_needed - attacker, 0, params.window, i, stream);
  });
}

}  // namespace trdsa::sim
