#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pollingkit/branching.hpp"
#include "pollingkit/errors.hpp"

using namespace pollingkit;

namespace {

const Discipline kAll[] = {Discipline::Gated, Discipline::GloballyGated, Discipline::Exhaustive};

/// One queue with Exp(mu) service; queue 2 receives no customers.
PollingModel single_queue(double lambda, double mu, Discipline d) {
  const auto svc = Distribution::exponential(mu);
  return PollingModel{lambda,
                      0.0,
                      0.0,
                      svc,
                      svc,
                      Distribution::exponential(1.0),
                      Distribution::exponential(2.0),
                      Distribution::deterministic(0.5),
                      d};
}

}  // namespace

TEST(Branching, RecursionResidualIsTiny) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto d : kAll) {
    const ModelTransforms mt(oracle::example_model(1.0, d));
    for (int i = 0; i < 20; ++i) {
      const double y1 = u(rng);
      const double y2 = u(rng);
      EXPECT_NEAR(mt.p1_complement(y1, y2), mt.p1_recursion_complement(y1, y2), 1e-12)
          << to_string(d) << " y=(" << y1 << "," << y2 << ")";
    }
  }
}

TEST(Branching, VisitPgfsNormalize) {
  for (auto d : {Discipline::Gated, Discipline::Exhaustive}) {
    const ModelTransforms mt(oracle::example_model(1.38, d));
    const auto v = mt.visit_pgfs(1.0, 1.0);
    EXPECT_NEAR(v.begin_1, 1.0, 1e-15);
    EXPECT_NEAR(v.begin_2, 1.0, 1e-15);
    EXPECT_NEAR(v.end_1, 1.0, 1e-15);
    EXPECT_NEAR(v.end_2, 1.0, 1e-15);
  }
}

TEST(Branching, GatedVisitStartCountsCycleArrivals) {
  const ModelTransforms mt(oracle::example_model(1.0, Discipline::Gated));
  for (int i = 0; i <= 10; ++i) {
    const double z = i / 10.0;
    EXPECT_NEAR(mt.visit_pgfs(z, 1.0).begin_1,
                mt.cycle_lst(0.6 * (1.0 - z), CycleAnchor::Queue1Begin), 1e-10)
        << "z=" << z;
  }
}

TEST(Branching, ExhaustiveVisitStartCountsIntervisitArrivals) {
  const ModelTransforms mt(oracle::example_model(1.38, Discipline::Exhaustive));
  for (int i = 0; i <= 10; ++i) {
    const double z = i / 10.0;
    EXPECT_NEAR(mt.visit_pgfs(z, 1.0).begin_1, mt.intervisit_lst(0.6 * (1.0 - z)), 1e-10)
        << "z=" << z;
  }
}

TEST(Branching, MeanCycleIsAnchorFree) {
  for (auto d : {Discipline::Gated, Discipline::Exhaustive}) {
    const ModelTransforms mt(oracle::example_model(0.7, d));
    for (auto a : {CycleAnchor::Queue1Begin, CycleAnchor::Queue1End, CycleAnchor::Queue2Begin,
                   CycleAnchor::Queue2End}) {
      EXPECT_NEAR(lst_moments(mt.cycle(a), {1, 1e-10})[0], 10.0, 1e-8) << to_string(d);
    }
  }
  const ModelTransforms gg(oracle::example_model(0.7, Discipline::GloballyGated));
  EXPECT_NEAR(lst_moments(gg.cycle(CycleAnchor::Queue1Begin), {1, 1e-10})[0], 10.0, 1e-8);
}

TEST(Branching, EvaluationFormsAgree) {
  for (auto d : {Discipline::Gated, Discipline::Exhaustive}) {
    const ModelTransforms mt(oracle::example_model(1.2, d));
    // The shortcut reads the anchor at which the discipline empties its batch
    // and needs its PGF argument inside [0, 1], which holds for small w.
    const auto a = d == Discipline::Gated ? CycleAnchor::Queue1Begin : CycleAnchor::Queue1End;
    for (double w : {1e-4, 0.01, 0.05, 0.15}) {
      EXPECT_NEAR(mt.cycle_lst(w, a, EvalForm::General), mt.cycle_lst(w, a, EvalForm::Shortcut),
                  1e-12)
          << to_string(d) << " w=" << w;
      if (d == Discipline::Exhaustive) {
        const double direct = mt.intervisit_lst(w, false, IntervisitForm::Direct);
        EXPECT_NEAR(direct, mt.intervisit_lst(w, false, IntervisitForm::General), 1e-12);
        EXPECT_NEAR(direct, mt.intervisit_lst(w, false, IntervisitForm::ViaCycle), 1e-12);
      } else {
        EXPECT_THROW(mt.intervisit_lst(w, false, IntervisitForm::Direct), DisciplineMismatch);
      }
    }
  }
}

TEST(Branching, GloballyGatedProductMatchesCycle) {
  const ModelTransforms mt(oracle::example_model(1.0, Discipline::GloballyGated));
  for (double w : {1e-5, 0.02, 0.3, 3.0}) {
    EXPECT_NEAR(mt.gg_cycle_lst(w), mt.cycle_lst(w, CycleAnchor::Queue1Begin), 1e-12);
    EXPECT_NEAR(1.0 - mt.gg_cycle_product(w).complement, mt.gg_cycle_lst(w), 1e-15);
  }
}

TEST(Branching, SingleQueueExhaustiveIntervisitIsSwitchOvers) {
  // With an empty second queue the intervisit period is S1 + S2 and the
  // completion-anchored cycle adds the busy period its arrivals generate.
  const double lambda = 0.5;
  const double mu = 1.25;
  const auto m = single_queue(lambda, mu, Discipline::Exhaustive);
  const ModelTransforms mt(m);
  for (double w : {1e-6, 0.01, 0.4, 2.5, 10.0}) {
    const double s = m.switch_1.lst(w) * m.switch_2.lst(w);
    EXPECT_NEAR(mt.intervisit_lst(w), s, 1e-13);
    const double pi = oracle::mm1_busy_period_lst(lambda, mu, w);
    const double u = w + lambda * (1.0 - pi);
    EXPECT_NEAR(mt.cycle_lst(w, CycleAnchor::Queue1End),
                m.switch_1.lst(u) * m.switch_2.lst(u), 1e-12);
  }
}

TEST(Branching, SingleQueueGatedCycleIsAnIteratedProduct) {
  // C(w) = S(w) C(lambda (1 - beta(w))); unrolled until the argument vanishes.
  const double lambda = 0.5;
  const double mu = 1.25;
  const auto m = single_queue(lambda, mu, Discipline::Gated);
  const ModelTransforms mt(m);
  auto reference = [&](double w) {
    double value = 1.0;
    for (int k = 0; k < 2000 && w > 1e-300; ++k) {
      value *= m.switch_1.lst(w) * m.switch_2.lst(w);
      w = lambda * (1.0 - mu / (mu + w));
    }
    return value;
  };
  for (double w : {1e-3, 0.2, 1.0, 8.0}) {
    EXPECT_NEAR(mt.cycle_lst(w, CycleAnchor::Queue1Begin), reference(w), 1e-12) << "w=" << w;
  }
}

TEST(Branching, QueueContentAtVisitStart) {
  // Mean number present at a visit beginning: lambda_1 E(C) when gated,
  // lambda_1 E(I_1) when exhaustive. The derivative is a difference quotient.
  const double h = 1e-6;
  const ModelTransforms gated(oracle::example_model(1.0, Discipline::Gated));
  EXPECT_NEAR(gated.visit_begin_2_complement(0.0, 0.0), 0.0, 1e-15);
  const double n_gated = (1.0 - gated.visit_pgfs(1.0 - h, 1.0).begin_1) / h;
  EXPECT_NEAR(n_gated, 6.0, 1e-4);
  const ModelTransforms exh(oracle::example_model(1.0, Discipline::Exhaustive));
  const double n_exh = (1.0 - exh.visit_pgfs(1.0 - h, 1.0).begin_1) / h;
  EXPECT_NEAR(n_exh, 2.4, 1e-4);
}

TEST(Branching, PriorityPgfReducesToPooledQueue) {
  const ModelTransforms mt(oracle::example_model(1.0, Discipline::Gated));
  for (double z : {0.0, 0.3, 0.9}) {
    EXPECT_NEAR(mt.p1_priority(z, z, 0.5), mt.p1(z, 0.5), 1e-12);
  }
}

TEST(Branching, CompletionTimeOfLowService) {
  // E = E(B_L) / (1 - rho_H) for the low-priority completion time.
  const auto m = oracle::example_model(1.0, Discipline::Exhaustive);
  const ModelTransforms mt(m);
  const double rho_h = m.lambda_high * m.service_high.mean();
  EXPECT_NEAR(lst_moments(mt.completion_time_low(), {1, 1e-10})[0],
              m.service_low.mean() / (1.0 - rho_h), 1e-8);
}

TEST(Branching, TruncationLimitIsEnforced) {
  ProductTruncation tight;
  tight.max_terms = 1;
  const ModelTransforms mt(oracle::example_model(1.0, Discipline::Gated), tight);
  EXPECT_THROW(mt.p1_complement(0.5, 0.5), TruncationError);
  ProductTruncation bad;
  bad.epsilon = 0.0;
  EXPECT_THROW(bad.validate(), DomainError);
}
