#include "mwem/mech.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace mwem {
namespace {

using testing::chi_square_pvalue;
using testing::tv_distance;

TEST(Ledger, AccumulatesAndEnforcesCap) {
  BudgetLedger ledger(1.0);
  EXPECT_DOUBLE_EQ(ledger.total(), 0.0);
  const int t = 10;
  for (int i = 0; i < t; ++i) {
    ledger.charge("select", 1.0 / (2 * t));
    ledger.charge("measure", 1.0 / (2 * t));
  }
  EXPECT_NEAR(ledger.total(), 1.0, 1e-12);
  EXPECT_EQ(ledger.entries().size(), 20u);
  EXPECT_THROW(ledger.charge("extra", 0.01), BudgetExhaustedError);

  BudgetLedger small(0.5);
  EXPECT_THROW(small.charge("oversized", 0.75), BudgetExhaustedError);
  EXPECT_DOUBLE_EQ(small.total(), 0.0);
  EXPECT_THROW(small.charge("zero", 0.0), DomainError);
}

TEST(Laplace, UnitDrawOfOneGivesZero) {
  EXPECT_DOUBLE_EQ(laplace_from_uniform(1.0, false, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(laplace_from_uniform(1.0, true, 3.0), -0.0);
}

TEST(Laplace, RejectsNonPositiveScale) {
  RngStream rng(1);
  EXPECT_THROW(laplace_sample(0.0, rng), DomainError);
  EXPECT_THROW(laplace_sample(-1.0, rng), DomainError);
}

TEST(Laplace, MomentsMatchAtScaleTwo) {
  const double b = 2.0;
  const int n = 1000000;
  RngStream rng(101);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = laplace_sample(b, rng);
    sum += s;
    sum_sq += s * s;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);          // +- 0.01
  EXPECT_NEAR(var, 2 * b * b, 0.04 * 8);  // within 4% of 2b^2
}

TEST(Laplace, TailsMatchExponentialLaw) {
  const double b = 2.0;
  const int n = 1000000;
  RngStream rng(577);
  std::vector<int> exceed(4, 0);
  for (int i = 0; i < n; ++i) {
    const double s = std::abs(laplace_sample(b, rng));
    for (int r = 1; r <= 3; ++r) {
      if (s > r * b) ++exceed[r];
    }
  }
  for (int r = 1; r <= 3; ++r) {
    const double expected = std::exp(-r);
    EXPECT_NEAR(exceed[r] / double(n), expected, 0.05 * expected) << "r=" << r;
  }
}

TEST(Laplace, SignIndependentOfMagnitude) {
  const int n = 1000000;
  RngStream rng(31337);
  double sum_s = 0, sum_m = 0, sum_sm = 0, sum_ss = 0, sum_mm = 0;
  for (int i = 0; i < n; ++i) {
    const double x = laplace_sample(1.0, rng);
    const double s = x < 0 ? -1.0 : 1.0;
    const double m = std::abs(x);
    sum_s += s;
    sum_m += m;
    sum_sm += s * m;
    sum_ss += s * s;
    sum_mm += m * m;
  }
  const double mean_s = sum_s / n, mean_m = sum_m / n;
  const double cov = sum_sm / n - mean_s * mean_m;
  const double var_s = sum_ss / n - mean_s * mean_s;
  const double var_m = sum_mm / n - mean_m * mean_m;
  EXPECT_LT(std::abs(cov / std::sqrt(var_s * var_m)), 0.01);
}

TEST(ExponentialMechanism, SingleCandidateAlwaysReturned) {
  RngStream rng(5);
  const std::vector<double> scores{3.7};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(exponential_mechanism(scores, 1.0, rng), 0u);
  }
}

TEST(ExponentialMechanism, RejectsBadInput) {
  RngStream rng(5);
  EXPECT_THROW(exponential_mechanism(std::vector<double>{}, 1.0, rng), DomainError);
  EXPECT_THROW(exponential_mechanism(std::vector<double>{1.0}, 0.0, rng), DomainError);
  EXPECT_THROW(exponential_mechanism(std::vector<double>{std::nan("")}, 1.0, rng), DomainError);
}

TEST(ExponentialMechanism, EqualScoresSampleUniformly) {
  RngStream rng(8);
  const std::vector<double> scores{5.0, 5.0, 5.0};
  const int draws = 100000;
  std::vector<double> freq(3, 0.0);
  for (int i = 0; i < draws; ++i) freq[exponential_mechanism(scores, 1.0, rng)] += 1.0 / draws;
  EXPECT_LE(tv_distance(freq, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}), 0.01);
}

TEST(ExponentialMechanism, TwoPointSoftmaxMatchesClosedForm) {
  // scores (0, ln 9) at epsilon 2: weights 1 and 9.
  RngStream rng(12);
  const std::vector<double> scores{0.0, std::log(9.0)};
  const int draws = 100000;
  std::vector<double> freq(2, 0.0);
  for (int i = 0; i < draws; ++i) freq[exponential_mechanism(scores, 2.0, rng)] += 1.0 / draws;
  EXPECT_LE(tv_distance(freq, std::vector<double>{0.1, 0.9}), 0.01);
}

TEST(ExponentialMechanism, ShiftingScoresLeavesDrawsUnchanged) {
  // Integer scores and an exactly representable shift keep the stabilized
  // exponents bitwise identical, so the sampled sequence matches exactly.
  const std::vector<double> base{0.0, 3.0, 1.0, 7.0, 2.0};
  std::vector<double> shifted(base);
  for (double& s : shifted) s += 64.0;
  RngStream a(99), b(99);
  for (int i = 0; i < 2000; ++i) {
    ASSERT_EQ(exponential_mechanism(base, 0.8, a), exponential_mechanism(shifted, 0.8, b));
  }
}

TEST(ExponentialMechanism, EmpiricalDistributionMatchesSoftmax) {
  RngStream score_rng(2718);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t k = 3 + score_rng.next_below(8);
    std::vector<double> scores(k);
    for (double& s : scores) s = 5.0 * score_rng.next_double();
    const double epsilon = trial % 2 ? 0.5 : 2.0;

    std::vector<double> expected(k);
    double top = -1e300;
    for (double s : scores) top = std::max(top, epsilon * s / 2);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      expected[i] = std::exp(epsilon * scores[i] / 2 - top);
      z += expected[i];
    }
    for (double& e : expected) e /= z;

    const int draws = 100000;
    std::vector<double> freq(k, 0.0);
    std::vector<int> counts(k, 0);
    RngStream rng(1000 + trial);
    for (int i = 0; i < draws; ++i) ++counts[exponential_mechanism(scores, epsilon, rng)];
    for (std::size_t i = 0; i < k; ++i) freq[i] = counts[i] / double(draws);

    EXPECT_LE(tv_distance(freq, expected), 0.01);
    double chi = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double e = expected[i] * draws;
      chi += (counts[i] - e) * (counts[i] - e) / e;
    }
    EXPECT_GT(chi_square_pvalue(chi, static_cast<int>(k) - 1), 0.001);
  }
}

TEST(Recharacterize, MatchesHandEvaluation) {
  // sqrt(2 ln(1e6) / 10) + (e^0.1 - 1) = 1.76743...
  EXPECT_NEAR(eps_delta_recharacterize(1.0, 10, 1e-6), 1.7675, 1e-3);
}

TEST(Recharacterize, DeltaNearOneLeavesOnlyTheExponentialTerm) {
  const double eps = 2.0;
  const int t = 5;
  const double near_one = 1.0 - 1e-12;
  EXPECT_NEAR(eps_delta_recharacterize(eps, t, near_one), eps * (std::exp(eps / t) - 1.0), 1e-5);
}

TEST(Recharacterize, RejectsDegenerateDelta) {
  EXPECT_THROW(eps_delta_recharacterize(1.0, 10, 0.0), DomainError);
  EXPECT_THROW(eps_delta_recharacterize(1.0, 10, 1.0), DomainError);
  EXPECT_THROW(eps_delta_recharacterize(0.0, 10, 0.5), DomainError);
}

TEST(Recharacterize, MonotoneDecreasingInIterations) {
  double previous = eps_delta_recharacterize(1.0, 1, 1e-6);
  for (int t = 2; t <= 100; ++t) {
    const double current = eps_delta_recharacterize(1.0, t, 1e-6);
    EXPECT_LT(current, previous) << "T=" << t;
    previous = current;
  }
}

TEST(PrivacyParams, Validation) {
  PrivacyParams params;
  EXPECT_NO_THROW(params.validate());
  params.epsilon = 0.0;
  EXPECT_THROW(params.validate(), ConfigError);
  params.epsilon = 1.0;
  params.delta = 1.0;
  EXPECT_THROW(params.validate(), ConfigError);
  params.delta = 0.0;
  params.iterations = 0;
  EXPECT_THROW(params.validate(), ConfigError);
}

TEST(RngStream, SameSeedSameSequence) {
  RngStream a(77), b(77), c(78);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double va = a.next_double();
    ASSERT_EQ(va, b.next_double());
    if (va != c.next_double()) differs = true;
    ASSERT_GE(va, 0.0);
    ASSERT_LT(va, 1.0);
  }
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace mwem
