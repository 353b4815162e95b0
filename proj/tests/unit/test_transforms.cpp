#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pollingkit/distributions.hpp"
#include "pollingkit/errors.hpp"
#include "pollingkit/transforms.hpp"

using namespace pollingkit;

namespace {

Lst exponential_lst(double mu) {
  return Lst::from_complement([mu](double w) { return w / (mu + w); },
                              [mu](double w) { return mu / ((mu + w) * (mu + w)); });
}

}  // namespace

TEST(BusyPeriod, MatchesMM1ClosedForm) {
  const double lambda = 0.7;
  const double mu = 1.0;
  const Lst beta = exponential_lst(mu);
  for (double w : {0.0, 1e-8, 1e-3, 0.1, 1.0, 5.0, 50.0}) {
    EXPECT_NEAR(busy_period_lst(beta, lambda, w), oracle::mm1_busy_period_lst(lambda, mu, w), 1e-13)
        << "w=" << w;
  }
}

TEST(BusyPeriod, ComplementKeepsRelativePrecisionNearZero) {
  const double lambda = 0.5;
  const Lst beta = exponential_lst(1.0);
  // 1 - pi(w) ~ w E(BP) with E(BP) = 1 / (mu - lambda) = 2.
  const double w = 1e-12;
  EXPECT_NEAR(busy_period_complement(beta, lambda, w) / w, 2.0, 1e-9);
}

TEST(BusyPeriod, MomentsMatchMG1Formulas) {
  // Deterministic unit service: E(BP) = 1/(1-rho), E(BP^2) = E(B^2)/(1-rho)^3.
  const double lambda = 0.4;
  const auto bp = busy_period(Distribution::deterministic(1.0).transform(), lambda);
  const auto m = lst_moments(bp, {2, 1e-9});
  EXPECT_NEAR(m[0], 1.0 / 0.6, 1e-9);
  EXPECT_NEAR(m[1] / (1.0 / std::pow(0.6, 3)), 1.0, 1e-8);
}

TEST(BusyPeriod, UsesSlopeWhenAvailable) {
  const double lambda = 0.9;
  const Lst with_slope = exponential_lst(1.0);
  const Lst without = Lst::from_complement([](double w) { return w / (1.0 + w); });
  for (double w : {1e-4, 0.3, 3.0}) {
    EXPECT_NEAR(busy_period_lst(with_slope, lambda, w), busy_period_lst(without, lambda, w), 1e-12);
  }
}

TEST(BusyPeriod, RejectsBadConfig) {
  FixedPointConfig cfg;
  cfg.tolerance = -1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Residual, ExponentialIsMemoryless) {
  const Lst x = exponential_lst(2.0);
  for (double w : {0.0, 1e-9, 1e-4, 0.5, 10.0}) {
    EXPECT_NEAR(residual_lst(x, 0.5, w), 2.0 / (2.0 + w), 1e-12) << "w=" << w;
  }
}

TEST(Residual, DeterministicIsUniform) {
  // Residual of the constant d is uniform on (0, d): (1 - e^{-wd}) / (wd).
  const Lst d = Distribution::deterministic(3.0).transform();
  for (double w : {1e-3, 0.2, 2.0}) {
    EXPECT_NEAR(residual_lst(d, 3.0, w), -std::expm1(-3.0 * w) / (3.0 * w), 1e-12);
  }
}

TEST(SafeRatio, InterpolatesTowardTheLimit) {
  auto num = [](double w) { return -std::expm1(-2.0 * w); };
  auto den = [](double w) { return -std::expm1(-w); };
  for (double w : {0.0, 1e-9, 1e-5, 0.1, 3.0}) {
    EXPECT_NEAR(safe_ratio(num, den, w, 1e-6, 2.0), 1.0 + std::exp(-w), 1e-9) << "w=" << w;
  }
}

TEST(SafeRatio, EstimatesMissingLimit) {
  auto num = [](double w) { return std::sin(3.0 * w); };
  auto den = [](double w) { return w; };
  EXPECT_NEAR(safe_ratio(num, den, 0.0, 1e-4, std::nullopt), 3.0, 1e-6);
}

TEST(Moments, ExponentialFactorials) {
  const double mu = 0.5;
  const auto m = lst_moments(exponential_lst(mu), {3, 1e-9});
  EXPECT_NEAR(m[0] / 2.0, 1.0, 1e-9);
  EXPECT_NEAR(m[1] / 8.0, 1.0, 1e-9);
  EXPECT_NEAR(m[2] / 48.0, 1.0, 1e-8);
}

TEST(Moments, ValueBasedTransformReachesSecondOrder) {
  // Gamma(2, 1) through its value only: E(X) = 2, E(X^2) = 6.
  const Lst g = Lst::from_value([](double w) { return 1.0 / ((1.0 + w) * (1.0 + w)); });
  EXPECT_TRUE(g.value_based());
  const auto m = lst_moments(g, {2, 1e-8});
  EXPECT_NEAR(m[0], 2.0, 1e-8);
  EXPECT_NEAR(m[1], 6.0, 6e-8);
}

TEST(Moments, SingleMomentCarriesAnErrorEstimate) {
  const auto e = lst_moment(exponential_lst(1.0), 2);
  EXPECT_NEAR(e.value, 2.0, 1e-9);
  EXPECT_LT(e.error, 1e-8 * 2.0);
}

TEST(Moments, UnreachableTargetThrowsAccuracyError) {
  // A heavy-ish noisy transform cannot give 1e-15.
  const Lst g = Lst::from_value([](double w) { return 1.0 / (1.0 + w); });
  EXPECT_THROW(lst_moment(g, 3, 1e-15), AccuracyError);
}

TEST(Moments, RejectsBadRequests) {
  EXPECT_THROW(lst_moments(exponential_lst(1.0), {0, 1e-8}), DomainError);
  EXPECT_THROW(lst_moments(exponential_lst(1.0), {2, 0.0}), DomainError);
}
