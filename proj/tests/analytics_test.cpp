#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "trdsa/analytics.hpp"

namespace trdsa::analytics {
namespace {

Rational R(long num, long den) { return Rational(num, den); }
HashShare share_of(long num, long den) { return HashShare(R(num, den)); }

// ---------------------------------------------------------------------------
// Lead distribution

TEST(LeadPmf, Examples) {
  EXPECT_EQ(lead_pmf<Rational>(share_of(0, 1), 6, 0).value(), 1);
  EXPECT_EQ(lead_pmf<Rational>(share_of(3, 10), 1, 1).value(), R(294, 1000));
  EXPECT_EQ(lead_pmf<Rational>(share_of(3, 10), 1, 0).value(), R(49, 100));
  EXPECT_DOUBLE_EQ(lead_pmf<double>(HashShare::parse("0.3"), 1, 1).to_double(), 0.294);
}

TEST(LeadPmf, RangeErrors) {
  const auto s = HashShare::parse("0.3");
  EXPECT_THROW((void)lead_pmf<double>(s, 2, -1), std::out_of_range);
  EXPECT_THROW((void)lead_pmf<double>(s, 2, 4), std::out_of_range);
  EXPECT_THROW((void)lead_pmf<double>(s, -1, 0), ValidationError);
}

TEST(LeadTail, Examples) {
  EXPECT_EQ(lead_tail<Rational>(share_of(0, 1), 4).value(), 0);
  EXPECT_EQ(lead_tail<Rational>(share_of(3, 10), 1).value(), R(837, 10000));
  EXPECT_EQ(lead_tail<Rational>(share_of(1, 2), 0).value(), R(1, 4));
  EXPECT_NEAR(lead_tail<double>(HashShare::parse("0.3"), 1).to_double(), 0.0837, 1e-15);
}

TEST(LeadDistribution, NormalizesExactly) {
  for (long num = 0; num < 10; ++num) {
    for (long z = 0; z <= 12; ++z) {
      const auto dist = lead_distribution<Rational>(share_of(num, 10), z);
      Rational total = dist.tail;
      for (const auto& p : dist.pmf) {
        EXPECT_GE(p, 0);
        EXPECT_LE(p, 1);
        total += p;
      }
      EXPECT_EQ(total, 1);
      const auto approx = lead_distribution<double>(share_of(num, 10), z);
      double ftotal = approx.tail;
      for (double p : approx.pmf) ftotal += p;
      EXPECT_NEAR(ftotal, 1.0, 1e-12);
    }
  }
}

// ---------------------------------------------------------------------------
// Catch-up race

TEST(CatchUp, Boundaries) {
  const auto s = HashShare::parse("0.4");
  EXPECT_EQ(catch_up_probability<double>({5, -1, 2}, s).to_double(), 1.0);
  EXPECT_EQ(catch_up_probability<double>({5, 3, 5}, s).to_double(), 0.0);
  EXPECT_EQ(catch_up_probability<Rational>({5, 0, 5}, s).value(), 0);  // tie at the deadline
  EXPECT_EQ(catch_up_probability<Rational>({5, -1, 5}, s).value(), 1);
}

TEST(CatchUp, SmallExamples) {
  EXPECT_EQ(catch_up_probability<Rational>({1, 0, 0}, share_of(3, 10)).value(), R(3, 10));
  EXPECT_EQ(catch_up_probability<Rational>({2, 1, 0}, share_of(3, 10)).value(), R(1278, 10000));
  EXPECT_NEAR(catch_up_probability<double>({2, 1, 0}, HashShare::parse("0.3")).to_double(), 0.1278, 1e-15);
  EXPECT_EQ(catch_up_probability<Rational>({3, 0, 0}, share_of(1, 2)).value(), R(11, 16));
}

TEST(CatchUp, ZeroShareNeverWins) {
  for (long m = 0; m <= 5; ++m) EXPECT_EQ(catch_up_probability<double>({10, m, 0}, HashShare(0.0)).to_double(), 0.0);
}

TEST(CatchUp, TermBreakdownSumsToValue) {
  const RaceQuery q{8, 2, 1};
  const auto s = HashShare::parse("0.35");
  const CoefficientTable table(7, 2);
  const auto terms = catch_up_terms(q, s, table);
  ASSERT_EQ(terms.size(), 7U);
  EXPECT_EQ(terms[0].coefficient, 1);
  EXPECT_EQ(terms[1].coefficient, 3);
  double sum = 0;
  for (const auto& t : terms) sum += t.value;
  EXPECT_NEAR(sum, catch_up_probability<double>(q, s).to_double(), 1e-15);
}

TEST(CatchUp, TableTooSmallIsRejected) {
  const CoefficientTable table(2, 2);
  EXPECT_THROW((void)catch_up_probability<double>({10, 2, 0}, HashShare(0.3), table), ValidationError);
}

TEST(CatchUp, MalformedQueries) {
  const auto s = HashShare(0.3);
  EXPECT_THROW((void)catch_up_probability<double>({0, 0, 0}, s), ValidationError);
  EXPECT_THROW((void)catch_up_probability<double>({3, -2, 0}, s), ValidationError);
  EXPECT_THROW((void)catch_up_probability<double>({3, 0, 4}, s), ValidationError);
  EXPECT_THROW((void)catch_up_probability<double>({3, 0, -1}, s), ValidationError);
}

TEST(CatchUpOracle, Examples) {
  EXPECT_EQ(catch_up_oracle<Rational>({1, 0, 0}, share_of(3, 10)).value(), R(3, 10));
  EXPECT_EQ(catch_up_oracle<Rational>({3, 0, 0}, share_of(1, 2)).value(), R(11, 16));
  EXPECT_EQ(catch_up_oracle<Rational>({2, 1, 2}, share_of(7, 10)).value(), 0);
}

TEST(CatchUpOracle, CapIsEnforced) {
  EXPECT_THROW((void)catch_up_oracle<double>({65, 0, 0}, HashShare(0.3)), ResourceLimitError);
  EXPECT_NO_THROW((void)catch_up_oracle<double>({65, 0, 0}, HashShare(0.3), {.max_deadline = 100}));
}

TEST(CatchUpOracle, AgreesWithClosedFormExactly) {
  for (long num = 0; num < 10; ++num) {
    const auto s = share_of(num, 10);
    for (long l = 1; l <= 8; ++l) {
      for (long n = 0; n <= l; ++n) {
        for (long m = -1; m <= 6; ++m) {
          EXPECT_EQ(catch_up_probability<Rational>({l, m, n}, s).value(), catch_up_oracle<Rational>({l, m, n}, s).value())
              << l << "," << m << "," << n << " I=" << num << "/10";
        }
      }
    }
  }
}

TEST(CatchUp, AgreesWithWalkEnumeration) {
  for (const auto& s : {share_of(1, 3), share_of(3, 5)}) {
    for (long l = 1; l <= 6; ++l) {
      for (long m = 0; m <= 4; ++m) {
        EXPECT_EQ(catch_up_probability<Rational>({l, m, 0}, s).value(), testing::enumerate_race(l, m, 0, s.exact()));
      }
    }
  }
}

TEST(CatchUp, RecursionAndShiftIdentities) {
  const auto s = share_of(2, 7);
  const Rational i = s.exact();
  for (long l = 1; l <= 12; ++l) {
    for (long n = 0; n < l; ++n) {
      for (long m = 0; m <= 8; ++m) {
        const auto q = catch_up_probability<Rational>({l, m, n}, s).value();
        const auto below = catch_up_probability<Rational>({l, m - 1, n}, s).value();
        const auto ahead = catch_up_probability<Rational>({l, m + 1, n + 1}, s).value();
        EXPECT_EQ(q, i * below + (1 - i) * ahead);
        EXPECT_EQ(catch_up_probability<Rational>({l + 1, m + 1, n + 1}, s).value(),
                  catch_up_probability<Rational>({l, m + 1, n}, s).value());
      }
    }
  }
}

TEST(CatchUp, FloatMatchesRational) {
  for (long num = 0; num < 10; ++num) {
    const auto s = share_of(num, 10);
    for (long l = 1; l <= 15; ++l) {
      for (long m = -1; m <= 10; ++m) {
        const double f = catch_up_probability<double>({l, m, 0}, s).to_double();
        const double r = catch_up_probability<Rational>({l, m, 0}, s).to_double();
        EXPECT_NEAR(f, r, 1e-10);
      }
    }
  }
}

TEST(CatchUp, HugeCoefficientsStayFinite) {
  // a_{i,0} = C_i reaches ~1e418 at i = 700; the weight (1/4)^i is ~1e-421.
  const CoefficientTable table(700, 0);
  const double term = (ScaledDouble::from_count(table.at(700, 0)) * ScaledDouble::power(0.25, 700)).to_double();
  const Rational exact = Rational(table.at(700, 0)) / int_power(BigCount(4), 700);
  EXPECT_NEAR(term / exact.convert_to<double>(), 1.0, 1e-14);

  const double q = catch_up_probability<double>({800, 0, 0}, HashShare(0.5), CoefficientTable(799, 0)).to_double();
  EXPECT_GT(q, 0.97);
  EXPECT_LT(q, 1.0);
}

// Theorem-level properties of Q in l.

TEST(CatchUp, StrictlyIncreasingInDeadline) {
  for (double i : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const HashShare s(i);
    for (long m = 0; m <= 5; ++m) {
      for (long n = 0; n <= 3; ++n) {
        const double limit = tu_catch_up_probability<double>(m, s).to_double();
        double prev = catch_up_probability<double>({n + 1, m, n}, s).to_double();
        for (long l = n + 2; l <= 40; ++l) {
          const double cur = catch_up_probability<double>({l, m, n}, s).to_double();
          if (limit - cur < 1e-14) break;  // increments below double resolution
          EXPECT_GT(cur, prev) << "I=" << i << " m=" << m << " n=" << n << " l=" << l;
          prev = cur;
        }
      }
    }
  }
  const HashShare zero(0.0);
  EXPECT_EQ(catch_up_probability<double>({10, 2, 0}, zero).to_double(),
            catch_up_probability<double>({11, 2, 0}, zero).to_double());
}

TEST(CatchUp, ExactStrictMonotonicityOnGrid) {
  for (long num = 1; num < 10; ++num) {
    const auto s = share_of(num, 10);
    for (long m = 0; m <= 4; ++m) {
      for (long l = 1; l <= 10; ++l) {
        EXPECT_GT(catch_up_probability<Rational>({l + 1, m, 0}, s).value(), catch_up_probability<Rational>({l, m, 0}, s).value());
      }
    }
  }
}

TEST(CatchUp, ConvergesToGamblersRuinLimit) {
  for (double i : {0.2, 0.4, 0.6}) {
    const HashShare s(i);
    for (long m : {0L, 3L, 6L}) {
      const double limit = tu_catch_up_probability<double>(m, s).to_double();
      double prev_gap = 2.0;
      for (long l : {10L, 50L, 100L, 300L}) {
        const double q = catch_up_probability<double>({l, m, 0}, s).to_double();
        EXPECT_LE(q, limit + 1e-15);
        const double gap = limit - q;
        if (prev_gap > 1e-15) {
          EXPECT_LT(gap, prev_gap);
        }
        prev_gap = gap;
      }
      EXPECT_LT(prev_gap, i == 0.4 ? 1e-3 : 1e-6);
    }
  }
}

TEST(TuCatchUp, Examples) {
  EXPECT_EQ(tu_catch_up_probability<Rational>(-1, share_of(3, 10)).value(), 1);
  EXPECT_EQ(tu_catch_up_probability<Rational>(3, share_of(2, 5)).value(), R(16, 81));
  EXPECT_NEAR(tu_catch_up_probability<double>(3, HashShare(0.4)).to_double(), 0.197530864, 1e-9);
  EXPECT_EQ(tu_catch_up_probability<double>(3, HashShare(0.5)).to_double(), 1.0);
  EXPECT_THROW((void)tu_catch_up_probability<double>(-2, HashShare(0.5)), ValidationError);
}

// ---------------------------------------------------------------------------
// End-to-end attack probabilities

// P_tr(I=1/2, Z=4, L=10); frozen from an independent Python Fraction evaluation.
const Rational kTrHalfZ4L10(96536871, 134217728);
// P_tu(I=1/10, Z=6); same source.
const Rational kTuTenthZ6(BigCount(1050777749), BigCount("28125000000000"));

TEST(TrSuccess, Examples) {
  EXPECT_EQ(tr_success_probability<Rational>({share_of(0, 1), 4, 10}).value(), 0);
  EXPECT_EQ(tr_success_probability<Rational>({share_of(3, 10), 0, 1}).value(), R(216, 1000));
  EXPECT_NEAR(tr_success_probability<double>({HashShare::parse("0.3"), 0, 1}).to_double(), 0.216, 1e-15);
  const auto half = tr_success_probability<Rational>({share_of(1, 2), 4, 10}).value();
  EXPECT_EQ(half, kTrHalfZ4L10);
  EXPECT_LT(half, 1);
}

TEST(TrSuccess, WindowZeroRejected) {
  EXPECT_THROW((void)tr_success_probability<double>({HashShare(0.3), 2, 0}), ValidationError);
  EXPECT_THROW((void)tr_success_probability<double>({HashShare(0.3), -1, 3}), ValidationError);
}

TEST(TrSuccess, IncreasesWithWindowAndStaysBelowTu) {
  for (long num = 1; num < 10; ++num) {
    const auto s = share_of(num, 10);
    for (long z : {0L, 2L, 5L}) {
      const auto tu = tu_success_probability<Rational>(s, z).value();
      Rational prev(0);
      for (long window : {1L, 2L, 5L, 12L}) {
        const auto tr = tr_success_probability<Rational>({s, z, window}).value();
        EXPECT_GT(tr, prev);
        EXPECT_LT(tr, tu);
        EXPECT_LT(tr, 1);
        prev = tr;
      }
    }
  }
}

TEST(TuSuccess, Examples) {
  EXPECT_EQ(tu_success_probability<Rational>(share_of(0, 1), 4).value(), 0);
  EXPECT_EQ(tu_success_probability<Rational>(share_of(1, 2), 4).value(), 1);
  EXPECT_EQ(tu_success_probability<double>(HashShare(0.7), 4).to_double(), 1.0);
  EXPECT_EQ(tu_success_probability<Rational>(share_of(1, 10), 6).value(), kTuTenthZ6);
}

TEST(TuSuccess, MatchesLongHorizonRecursion) {
  const HashShare s = share_of(1, 10);
  const long z = 6;
  const long horizon = 10000;
  const auto row = catch_up_oracle_row<double>(horizon, 0, z + 1, s, {.max_deadline = horizon});
  const auto dist = lead_distribution<double>(s, z);
  double p = dist.tail;
  for (long k = 0; k <= z + 1; ++k) p += dist.pmf[static_cast<std::size_t>(k)] * row[static_cast<std::size_t>(z + 1 - k)];
  EXPECT_NEAR(p, tu_success_probability<double>(s, z).to_double(), 1e-9);
  EXPECT_NEAR(p, kTuTenthZ6.convert_to<double>(), 1e-9);
}

// ---------------------------------------------------------------------------
// Depth policy and helpers

TEST(MinConfirmationDepth, Examples) {
  const auto none = min_confirmation_depth(HashShare(0.0), 10, 0.01, 12);
  ASSERT_TRUE(none.depth);
  EXPECT_EQ(*none.depth, 0);
  EXPECT_EQ(none.scan.size(), 13U);

  // Brute-force scan with Python Fractions: P_tr(0.1, Z=2, 10) = 0.00303...,
  // P_tr(0.1, Z=3, 10) = 0.000989909...
  const auto tenth = min_confirmation_depth(HashShare::parse("0.1"), 10, 0.001, 25);
  ASSERT_TRUE(tenth.depth);
  EXPECT_EQ(*tenth.depth, 3);
  EXPECT_NEAR(tenth.scan[3].success, 0.0009899093447767139, 1e-15);
  EXPECT_EQ(tenth.scan.size(), 26U);

  const auto majority = min_confirmation_depth(HashShare::parse("0.6"), 10, 0.5, 8);
  EXPECT_FALSE(majority.depth);
  EXPECT_TRUE(majority.non_monotone);
  EXPECT_EQ(majority.scan.size(), 9U);
}

TEST(MinConfirmationDepth, RationalBackendAgrees) {
  const auto f = min_confirmation_depth<double>(HashShare::parse("0.2"), 5, 0.01, 15);
  const auto r = min_confirmation_depth<Rational>(HashShare::parse("0.2"), 5, 0.01, 15);
  EXPECT_EQ(f.depth, r.depth);
}

TEST(MinConfirmationDepth, InvalidThreshold) {
  EXPECT_THROW((void)min_confirmation_depth(HashShare(0.1), 10, 0.0, 5), ValidationError);
  EXPECT_THROW((void)min_confirmation_depth(HashShare(0.1), 10, 1.0, 5), ValidationError);
}

TEST(ExpectedReward, Examples) {
  EXPECT_DOUBLE_EQ(expected_reward(0.0, 100, 10), -10.0);
  EXPECT_DOUBLE_EQ(expected_reward(1.0, 100, 10), 90.0);
  EXPECT_NEAR(expected_reward(0.216, 1000, 50), 166.0, 1e-12);
  EXPECT_THROW((void)expected_reward(0.5, -1, 0), ValidationError);
}

// ---------------------------------------------------------------------------
// Value types

TEST(HashShare, Validation) {
  EXPECT_THROW(HashShare(1.0), ValidationError);
  EXPECT_THROW(HashShare(-0.1), ValidationError);
  EXPECT_THROW(HashShare::parse("1"), ValidationError);
  EXPECT_THROW(HashShare::parse("abc"), ValidationError);
  EXPECT_EQ(HashShare::parse("0.3").exact(), R(3, 10));
  EXPECT_EQ(HashShare::parse("2.5e-1").exact(), R(1, 4));
  EXPECT_TRUE(HashShare::parse("0.5").is_majority());
  EXPECT_FALSE(HashShare::parse("0.4999").is_majority());
}

TEST(Probability, ClampsOnlyRoundingNoise) {
  EXPECT_EQ(Probability<double>::checked(1.0 + 5e-13).to_double(), 1.0);
  EXPECT_TRUE(Probability<double>::checked(1.0 + 5e-13).clamped());
  EXPECT_EQ(Probability<double>::checked(-5e-13).to_double(), 0.0);
  EXPECT_THROW(Probability<double>::checked(1.0 + 1e-9), ConsistencyError);
  EXPECT_THROW(Probability<Rational>::checked(R(11, 10)), ConsistencyError);
  EXPECT_FALSE(Probability<double>::checked(0.5).clamped());
}

// Hand-rolled property check: random rational states satisfy Q in [0, 1] and
// the oracle equality.
TEST(CatchUp, RandomStatesProperty) {
  std::mt19937_64 gen(12345);
  for (int trial = 0; trial < 200; ++trial) {
    const long den = std::uniform_int_distribution<long>(2, 40)(gen);
    const long num = std::uniform_int_distribution<long>(0, den - 1)(gen);
    const long l = std::uniform_int_distribution<long>(1, 20)(gen);
    const long n = std::uniform_int_distribution<long>(0, l)(gen);
    const long m = std::uniform_int_distribution<long>(-1, 12)(gen);
    const auto s = share_of(num, den);
    const auto q = catch_up_probability<Rational>({l, m, n}, s).value();
    EXPECT_GE(q, 0);
    EXPECT_LE(q, 1);
    EXPECT_EQ(q, catch_up_oracle<Rational>({l, m, n}, s).value());
  }
}

}  // namespace
}  // namespace trdsa::analytics
