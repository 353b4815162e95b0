#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pollingkit/errors.hpp"
#include "pollingkit/model.hpp"

using namespace pollingkit;

TEST(Model, DerivedQuantitiesOfTheExample) {
  const auto d = derive(oracle::example_model(1.0, Discipline::Gated));
  EXPECT_NEAR(d.lambda_1, 0.6, 1e-15);
  EXPECT_NEAR(d.rho_1, 0.6, 1e-13);
  EXPECT_NEAR(d.rho_2, 0.2, 1e-15);
  EXPECT_NEAR(d.rho, 0.8, 1e-13);
  // E(C) = E(S) / (1 - rho) with E(S) = 2.
  EXPECT_NEAR(d.mean_cycle, 10.0, 1e-12);
  EXPECT_NEAR(d.mean_visit_1, 6.0, 1e-12);
  EXPECT_NEAR(d.mean_visit_2, 2.0, 1e-12);
  EXPECT_NEAR(d.mean_intervisit_1, 4.0, 1e-12);
  EXPECT_NEAR(d.mean_intervisit_2, 8.0, 1e-12);
  EXPECT_NEAR(d.rho_high + d.rho_low, d.rho_1, 1e-15);
}

TEST(Model, DisciplineNamesRoundTrip) {
  for (auto d : {Discipline::Gated, Discipline::GloballyGated, Discipline::Exhaustive}) {
    EXPECT_EQ(parse_discipline(to_string(d)), d);
  }
  EXPECT_EQ(to_string(Discipline::GloballyGated), "globally-gated");
  EXPECT_THROW(parse_discipline("round-robin"), DomainError);
}

TEST(Model, ValidateNamesRhoWhenUnstable) {
  const auto unit = Distribution::exponential(1.0);
  const auto m = threshold_model(0.6, unit, 0.5, unit, unit, unit, 1.0, Discipline::Gated);
  const auto v = validate(m);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().field, "rho");
  EXPECT_THROW(require_valid(m), ModelError);
}

TEST(Model, ValidateRejectsNegativeRates) {
  auto m = oracle::example_model(1.0, Discipline::Exhaustive);
  m.lambda_2 = -0.1;
  EXPECT_FALSE(validate(m).empty());
}

TEST(Model, ValidateAcceptsTheExample) {
  EXPECT_TRUE(validate(oracle::example_model(1.38, Discipline::Exhaustive)).empty());
  EXPECT_NO_THROW(require_valid(oracle::example_model(0.5, Discipline::GloballyGated)));
}

TEST(Model, ThresholdModelSplitsQueueOne) {
  const auto m = oracle::example_model(1.0, Discipline::Gated);
  const auto ref = oracle::exponential_split(0.6, 1.0, 1.0);
  EXPECT_NEAR(m.lambda_high, ref.lambda_high, 1e-14);
  EXPECT_NEAR(m.lambda_low, ref.lambda_low, 1e-14);
  EXPECT_NEAR(m.service_high.mean(), ref.mean_high, 1e-10);
  EXPECT_NEAR(m.service_low.mean(), ref.mean_low, 1e-12);
  // The pooled queue-1 service is the original unit exponential.
  const auto s1 = m.service_1();
  EXPECT_NEAR(s1.mean(), 1.0, 1e-13);
  EXPECT_NEAR(s1.moment(2), 2.0, 1e-12);
  EXPECT_NEAR(s1.lst(0.5), 1.0 / 1.5, 1e-13);
}

TEST(Model, WithoutPrioritiesPoolsQueueOne) {
  const auto m = without_priorities(oracle::example_model(1.0, Discipline::Exhaustive));
  EXPECT_NEAR(m.lambda_high, 0.6, 1e-15);
  EXPECT_EQ(m.lambda_low, 0.0);
  EXPECT_NEAR(m.service_high.moment(2), 2.0, 1e-12);
  EXPECT_EQ(m.discipline, Discipline::Exhaustive);
}
