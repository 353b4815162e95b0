#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pollingkit/distributions.hpp"
#include "pollingkit/errors.hpp"

using namespace pollingkit;

namespace {

struct Case {
  std::string name;
  Distribution dist;
  std::function<double(double)> density;
  double lower;
  double upper;
  /// Atom location, when the law is a point mass.
  std::optional<double> atom;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  out.push_back({"exponential", Distribution::exponential(1.5),
                 [](double x) { return 1.5 * std::exp(-1.5 * x); }, 0.0, 40.0, std::nullopt});
  out.push_back({"truncated", Distribution::truncated_exponential(0.8, 2.5),
                 [](double x) { return 0.8 * std::exp(-0.8 * x) / (1.0 - std::exp(-2.0)); }, 0.0,
                 2.5, std::nullopt});
  out.push_back({"shifted", Distribution::shifted_exponential(0.7, 2.0),
                 [](double x) { return 2.0 * std::exp(-2.0 * (x - 0.7)); }, 0.7, 30.7,
                 std::nullopt});
  out.push_back({"deterministic", Distribution::deterministic(1.25), nullptr, 0, 0, 1.25});
  return out;
}

double expectation(const Case& c, const std::function<double(double)>& g) {
  if (c.atom) return g(*c.atom);
  return oracle::simpson([&](double x) { return g(x) * c.density(x); }, c.lower, c.upper, 40000);
}

}  // namespace

TEST(Distributions, MomentsMatchQuadrature) {
  for (const auto& c : cases()) {
    for (int k = 1; k <= 3; ++k) {
      const double ref = expectation(c, [k](double x) { return std::pow(x, k); });
      EXPECT_NEAR(c.dist.moment(k) / ref, 1.0, 1e-9) << c.name << " k=" << k;
    }
  }
}

TEST(Distributions, TransformMatchesQuadrature) {
  for (const auto& c : cases()) {
    for (double w : {0.01, 0.3, 2.0}) {
      const double ref = expectation(c, [w](double x) { return std::exp(-w * x); });
      EXPECT_NEAR(c.dist.lst(w), ref, 1e-10) << c.name << " w=" << w;
      EXPECT_NEAR(c.dist.lst_complement(w), 1.0 - ref, 1e-10) << c.name;
      const double slope = expectation(c, [w](double x) { return x * std::exp(-w * x); });
      EXPECT_NEAR(c.dist.lst_slope(w), slope, 1e-10) << c.name;
    }
  }
}

TEST(Distributions, ComplementIsAccurateAtTinyArguments) {
  for (const auto& c : cases()) {
    const double w = 1e-12;
    EXPECT_NEAR(c.dist.lst_complement(w) / (w * c.dist.mean()), 1.0, 1e-9) << c.name;
  }
}

TEST(Distributions, MixtureIsWeightedAverage) {
  const auto a = Distribution::exponential(1.0);
  const auto b = Distribution::deterministic(2.0);
  const auto m = Distribution::mixture({0.25, 0.75}, {a, b});
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(m.moment(k), 0.25 * a.moment(k) + 0.75 * b.moment(k), 1e-14);
  }
  EXPECT_NEAR(m.lst(0.4), 0.25 * a.lst(0.4) + 0.75 * b.lst(0.4), 1e-15);
  EXPECT_EQ(m.kind_name(), "mixture");
}

TEST(Distributions, SampleMeansAgreeWithMoments) {
  Rng rng(12345);
  const int n = 200000;
  std::vector<Case> all = cases();
  all.push_back({"mixture",
                 Distribution::mixture({0.3, 0.7}, {Distribution::exponential(0.5),
                                                    Distribution::shifted_exponential(1.0, 3.0)}),
                 nullptr, 0, 0, std::nullopt});
  for (const auto& c : all) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = c.dist.sample(rng);
      ASSERT_GE(x, 0.0);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = c.dist.moment(2) - c.dist.mean() * c.dist.mean();
    const double se = std::sqrt(std::max(var, 1e-30) / n);
    EXPECT_LE(std::abs(mean - c.dist.mean()), 5.0 * se + 1e-12) << c.name;
    EXPECT_NEAR(sum_sq / n / c.dist.moment(2), 1.0, 0.02) << c.name;
  }
}

TEST(Distributions, TransformCarriesComplementAndSlope) {
  const auto d = Distribution::truncated_exponential(1.0, 3.0);
  const Lst f = d.transform();
  ASSERT_TRUE(f.has_slope());
  EXPECT_FALSE(f.value_based());
  EXPECT_DOUBLE_EQ(f.complement(0.2), d.lst_complement(0.2));
  EXPECT_DOUBLE_EQ(f.slope(0.2), d.lst_slope(0.2));
}

TEST(Distributions, FactoriesRejectInvalidParameters) {
  EXPECT_THROW(Distribution::exponential(0.0), DomainError);
  EXPECT_THROW(Distribution::exponential(-1.0), DomainError);
  EXPECT_THROW(Distribution::deterministic(0.0), DomainError);
  EXPECT_THROW(Distribution::truncated_exponential(1.0, 0.0), DomainError);
  EXPECT_THROW(Distribution::shifted_exponential(-0.1, 1.0), DomainError);
  EXPECT_THROW(Distribution::mixture({0.5, 0.4}, {Distribution::exponential(1.0),
                                                  Distribution::exponential(2.0)}),
               DomainError);
  EXPECT_THROW(Distribution::mixture({1.0}, {}), DomainError);
  EXPECT_THROW(Distribution::exponential(1.0).moment(4), DomainError);
  EXPECT_THROW(Distribution::exponential(1.0).lst(-0.1), DomainError);
}

TEST(Distributions, UniformOpenNeverHitsEndpoints) {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_open(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(ThresholdSplit, MatchesConditionalExponential) {
  const double lambda = 0.6;
  for (double t : {0.1, 1.0, 1.38, 4.0}) {
    const auto split = split_by_threshold(Distribution::exponential(1.0), lambda, t);
    const auto ref = oracle::exponential_split(lambda, 1.0, t);
    EXPECT_NEAR(split.lambda_high, ref.lambda_high, 1e-14);
    EXPECT_NEAR(split.lambda_low, ref.lambda_low, 1e-14);
    EXPECT_NEAR(split.service_high.mean(), ref.mean_high, 1e-10);
    EXPECT_NEAR(split.service_high.moment(2), ref.second_high, 1e-10);
    EXPECT_NEAR(split.service_low.mean(), ref.mean_low, 1e-12);
    EXPECT_NEAR(split.service_low.moment(2), ref.second_low, 1e-12);
    // Work is conserved by the split.
    EXPECT_NEAR(split.lambda_high * split.service_high.mean() +
                    split.lambda_low * split.service_low.mean(),
                lambda, 1e-13);
  }
}

TEST(ThresholdSplit, RequiresExponentialBase) {
  EXPECT_THROW(split_by_threshold(Distribution::deterministic(1.0), 0.5, 1.0), DomainError);
}
