#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "trdsa/analytics.hpp"
#include "trdsa/simulator.hpp"

namespace trdsa::sim {
namespace {

TEST(Rng, StreamsAreDeterministic) {
  RngStream a = rng_stream(7, 3);
  RngStream b = rng_stream(7, 3);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, StreamsAreDistinct) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t idx = 0; idx < 1000; ++idx) firsts.insert(rng_stream(1, idx).next());
  for (std::uint64_t seed = 2; seed < 1000; ++seed) firsts.insert(rng_stream(seed, 0).next());
  EXPECT_EQ(firsts.size(), 1998U);
}

TEST(Rng, UniformInUnitInterval) {
  RngStream s = rng_stream(99, 0);
  double sum = 0;
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Simulation, RunsMustBePositive) {
  EXPECT_THROW((void)simulate_race({3, 0, 0}, HashShare(0.3), {.runs = 0, .seed = 1}), ValidationError);
  EXPECT_THROW((void)simulate_attack({HashShare(0.3), 2, 5}, {.runs = 0, .seed = 1}), ValidationError);
  EXPECT_THROW((void)simulate_race({3, 0, 0}, HashShare(0.3), {.runs = 10, .seed = 1, .parallelism = 0}),
               ValidationError);
}

TEST(Simulation, SameSeedSameResult) {
  const SimConfig config{.runs = 20000, .seed = 42};
  const auto a = simulate_attack({HashShare(0.3), 4, 10}, config);
  const auto b = simulate_attack({HashShare(0.3), 4, 10}, config);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.p_hat, b.p_hat);
  EXPECT_EQ(a.seed, 42U);
  EXPECT_EQ(a.runs, 20000U);
}

TEST(Simulation, ParallelismDoesNotChangeResult) {
  for (unsigned p : {2U, 3U, 8U}) {
    const auto serial = simulate_attack({HashShare(0.35), 3, 7}, {.runs = 10007, .seed = 5, .parallelism = 1});
    const auto parallel = simulate_attack({HashShare(0.35), 3, 7}, {.runs = 10007, .seed = 5, .parallelism = p});
    EXPECT_EQ(serial.successes, parallel.successes) << p;
  }
}

TEST(Simulation, RaceExamples) {
  const auto one = simulate_race({1, 0, 0}, HashShare::parse("0.3"), {.runs = 10000, .seed = 42});
  EXPECT_NEAR(one.p_hat, 0.3, 4 * std::sqrt(0.3 * 0.7 / 10000));

  const auto won = simulate_race({5, -1, 0}, HashShare(0.3), {.runs = 500, .seed = 1});
  EXPECT_EQ(won.p_hat, 1.0);
  const auto lost = simulate_race({5, 2, 5}, HashShare(0.9), {.runs = 500, .seed = 1});
  EXPECT_EQ(lost.p_hat, 0.0);
  const auto never = simulate_race({20, 0, 0}, HashShare(0.0), {.runs = 500, .seed = 1});
  EXPECT_EQ(never.p_hat, 0.0);
}

TEST(Simulation, RaceAgreesWithClosedForm) {
  for (double i : {0.2, 0.45, 0.7}) {
    const HashShare s(i);
    for (long m : {0L, 2L, 5L}) {
      const RaceQuery q{12, m, 1};
      const double exact = analytics::catch_up_probability<double>(q, s).to_double();
      const auto est = simulate_race(q, s, {.runs = 40000, .seed = 11});
      const double sigma = std::sqrt(std::max(exact * (1 - exact), 1e-12) / 40000);
      EXPECT_NEAR(est.p_hat, exact, 4 * sigma + 1e-12) << "I=" << i << " m=" << m;
    }
  }
}

TEST(Simulation, AttackExamples) {
  const auto quick = simulate_attack({HashShare::parse("0.3"), 0, 1}, {.runs = 10000, .seed = 42});
  EXPECT_NEAR(quick.p_hat, 0.216, 4 * std::sqrt(0.216 * 0.784 / 10000));
  const auto zero = simulate_attack({HashShare(0.0), 4, 10}, {.runs = 1000, .seed = 3});
  EXPECT_EQ(zero.p_hat, 0.0);
  EXPECT_EQ(zero.std_error, 0.0);
}

TEST(Simulation, AttackAgreesWithClosedForm) {
  for (double i : {0.15, 0.3, 0.5}) {
    for (long window : {1L, 6L, 25L}) {
      const AttackParams params{HashShare(i), 3, window};
      const double exact = analytics::tr_success_probability<double>(params).to_double();
      const auto est = simulate_attack(params, {.runs = 40000, .seed = 19});
      const double sigma = std::sqrt(exact * (1 - exact) / 40000);
      EXPECT_NEAR(est.p_hat, exact, 4 * sigma) << "I=" << i << " L=" << window;
    }
  }
}

TEST(Simulation, LongWindowApproachesUnrestricted) {
  const HashShare s(0.3);
  const double tu = analytics::tu_success_probability<double>(s, 4).to_double();
  const auto est = simulate_attack({s, 4, 1000}, {.runs = 20000, .seed = 8});
  EXPECT_NEAR(est.p_hat, tu, 4 * std::sqrt(tu * (1 - tu) / 20000));
}

TEST(Simulation, StandardErrorIsPlugIn) {
  const auto est = simulate_attack({HashShare(0.3), 2, 5}, {.runs = 5000, .seed = 77});
  EXPECT_DOUBLE_EQ(est.std_error, std::sqrt(est.p_hat * (1 - est.p_hat) / 5000));
}

}  // namespace
}  // namespace trdsa::sim
