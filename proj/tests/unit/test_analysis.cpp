#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pollingkit/analysis.hpp"
#include "pollingkit/errors.hpp"

using namespace pollingkit;

namespace {

/// One priority queue (queue 2 never receives customers), so the server sees
/// an M/G/1 queue with multiple vacations V = S1 + S2.
PollingModel vacation_model(Discipline d) {
  return PollingModel{0.3,
                      0.2,
                      0.0,
                      Distribution::exponential(2.0),
                      Distribution::shifted_exponential(0.5, 1.0),
                      Distribution::exponential(1.0),
                      Distribution::exponential(2.0),
                      Distribution::deterministic(0.5),
                      d};
}

struct VacationOracle {
  double rho_high;
  double rho;
  double residual_work;  // sum lambda E(B^2) / 2
  double mean_vacation;
  double residual_vacation;
};

VacationOracle vacation_oracle(const PollingModel& m) {
  VacationOracle o{};
  o.rho_high = m.lambda_high * m.service_high.mean();
  o.rho = o.rho_high + m.lambda_low * m.service_low.mean();
  o.residual_work =
      0.5 * (m.lambda_high * m.service_high.moment(2) + m.lambda_low * m.service_low.moment(2));
  o.mean_vacation = m.switch_1.mean() + m.switch_2.mean();
  const double second = m.switch_1.moment(2) + 2.0 * m.switch_1.mean() * m.switch_2.mean() +
                        m.switch_2.moment(2);
  o.residual_vacation = second / (2.0 * o.mean_vacation);
  return o;
}

/// Right-hand side of the Boxma-Groenendijk pseudo-conservation law for
/// sum rho_i E(W_i), with queue 1 counted as one queue.
double pseudo_conservation(const PollingModel& m) {
  const double lambda_b2 = m.lambda_high * m.service_high.moment(2) +
                           m.lambda_low * m.service_low.moment(2) +
                           m.lambda_2 * m.service_2.moment(2);
  const double rho_1 = m.lambda_high * m.service_high.mean() + m.lambda_low * m.service_low.mean();
  const double rho_2 = m.lambda_2 * m.service_2.mean();
  const double rho = rho_1 + rho_2;
  const double es = m.switch_1.mean() + m.switch_2.mean();
  const double es2 = m.switch_1.moment(2) + 2.0 * m.switch_1.mean() * m.switch_2.mean() +
                     m.switch_2.moment(2);
  const double sum_sq = rho_1 * rho_1 + rho_2 * rho_2;
  double value = rho / (2.0 * (1.0 - rho)) * lambda_b2 + rho * es2 / (2.0 * es) +
                 es / (2.0 * (1.0 - rho)) * (rho * rho - sum_sq);
  if (m.discipline == Discipline::Gated) value += es * sum_sq / (1.0 - rho);
  return value;
}

double weighted_work(const PollingModel& m, const PerformanceReport& r) {
  return m.lambda_high * m.service_high.mean() * r.high.mean_wait +
         m.lambda_low * m.service_low.mean() * r.low.mean_wait +
         m.lambda_2 * m.service_2.mean() * r.queue_2.mean_wait;
}

/// A non-exponential two-queue model with priorities given explicitly.
PollingModel mixed_model(Discipline d) {
  return PollingModel{
      0.25,
      0.15,
      0.3,
      Distribution::truncated_exponential(1.0, 1.5),
      Distribution::mixture({0.4, 0.6},
                            {Distribution::exponential(0.8), Distribution::deterministic(1.0)}),
      Distribution::shifted_exponential(0.2, 2.0),
      Distribution::deterministic(0.3),
      Distribution::exponential(1.5),
      d};
}

}  // namespace

TEST(Analysis, ExhaustiveVacationModelMatchesCobhamWithVacations) {
  const auto m = vacation_model(Discipline::Exhaustive);
  const auto o = vacation_oracle(m);
  const auto r = report(ModelTransforms(m));
  const double work = o.residual_work + (1.0 - o.rho) * o.residual_vacation;
  EXPECT_NEAR(r.high.mean_wait, work / (1.0 - o.rho_high), 1e-10);
  EXPECT_NEAR(r.low.mean_wait, work / ((1.0 - o.rho_high) * (1.0 - o.rho)), 1e-10);
  EXPECT_NEAR(r.queue_1_no_priority.mean_wait,
              o.residual_work / (1.0 - o.rho) + o.residual_vacation, 1e-10);
}

TEST(Analysis, ExhaustiveVacationWaitTransformIsDecomposed) {
  // Fuhrmann-Cooper: the M/G/1 waiting time plus an independent residual vacation.
  const auto m = without_priorities(vacation_model(Discipline::Exhaustive));
  const ModelTransforms mt(m);
  const auto o = vacation_oracle(m);
  const double lambda = m.lambda_high;
  for (double w : {0.01, 0.3, 1.0, 6.0}) {
    const double mg1 = (1.0 - o.rho) * w / (w - lambda + lambda * m.service_high.lst(w));
    const double v = m.switch_1.lst(w) * m.switch_2.lst(w);
    const double ref = mg1 * (1.0 - v) / (w * o.mean_vacation);
    EXPECT_NEAR(wait_lst(mt, WaitClass::High, w), ref, 1e-12) << "w=" << w;
  }
}

TEST(Analysis, GatedVacationModelMatchesTakagi) {
  const auto m = vacation_model(Discipline::Gated);
  const auto o = vacation_oracle(m);
  const auto r = report(ModelTransforms(m));
  EXPECT_NEAR(r.queue_1_no_priority.mean_wait,
              o.residual_work / (1.0 - o.rho) + o.residual_vacation +
                  o.rho * o.mean_vacation / (1.0 - o.rho),
              1e-10);
}

TEST(Analysis, PseudoConservationLawHolds) {
  for (auto d : {Discipline::Gated, Discipline::Exhaustive}) {
    for (const auto& m : {mixed_model(d), oracle::example_model(0.4, d),
                          oracle::example_model(2.5, d), vacation_model(d)}) {
      const auto r = report(ModelTransforms(m));
      EXPECT_NEAR(weighted_work(m, r) / pseudo_conservation(m), 1.0, 1e-10) << to_string(d);
    }
  }
}

TEST(Analysis, GatedGapIsQueueOneLoadTimesResidualCycle) {
  for (auto d : {Discipline::Gated, Discipline::GloballyGated}) {
    for (double t : {0.3, 1.0, 3.0}) {
      const auto r = report(ModelTransforms(oracle::example_model(t, d)));
      EXPECT_NEAR((r.low.mean_wait_transform - r.high.mean_wait_transform) /
                      (r.derived.rho_1 * r.residual_cycle),
                  1.0, 1e-8);
    }
  }
}

TEST(Analysis, ExhaustiveRatioIsOneMinusRhoOne) {
  for (double t : {0.2, 1.38, 4.0}) {
    const auto r = report(ModelTransforms(oracle::example_model(t, Discipline::Exhaustive)));
    EXPECT_NEAR(r.high.mean_wait_transform / r.low.mean_wait_transform, 0.4, 1e-8);
  }
}

TEST(Analysis, WeightedQueueOneIsArrivalAverage) {
  const auto m = oracle::example_model(1.0, Discipline::Gated);
  const auto r = report(ModelTransforms(m));
  EXPECT_NEAR(r.queue_1.mean_wait,
              (m.lambda_high * r.high.mean_wait + m.lambda_low * r.low.mean_wait) / 0.6, 1e-12);
}

TEST(Analysis, NoPriorityReferenceIsThresholdFree) {
  for (auto d : {Discipline::Gated, Discipline::GloballyGated, Discipline::Exhaustive}) {
    const auto a = report(ModelTransforms(oracle::example_model(0.5, d)));
    const auto b = report(ModelTransforms(oracle::example_model(3.0, d)));
    EXPECT_NEAR(a.queue_1_no_priority.mean_wait, b.queue_1_no_priority.mean_wait, 1e-9);
    EXPECT_NEAR(a.queue_2.mean_wait, b.queue_2.mean_wait, 1e-9) << to_string(d);
  }
}

TEST(Analysis, SkippingNoPriorityLeavesItZero) {
  ReportOptions options;
  options.include_no_priority = false;
  const auto r = report(ModelTransforms(oracle::example_model(1.0, Discipline::Gated)), options);
  EXPECT_EQ(r.queue_1_no_priority.mean_wait, 0.0);
  EXPECT_GT(r.high.mean_wait, 0.0);
}

TEST(Analysis, ExhaustiveAlternateFormsAgree) {
  const ModelTransforms mt(oracle::example_model(1.38, Discipline::Exhaustive));
  for (auto cls : {WaitClass::High, WaitClass::Low, WaitClass::Queue2, WaitClass::Queue1NoPriority}) {
    for (int k = 1; k <= 10; ++k) {
      const double w = 2.0 * k;
      EXPECT_NEAR(wait_lst_exhaustive(mt, cls, w, WaitForm::Primary),
                  wait_lst_exhaustive(mt, cls, w, WaitForm::Alternate), 1e-10)
          << to_string(cls) << " w=" << w;
    }
  }
}

TEST(Analysis, TransformsAreProperLsts) {
  for (auto d : {Discipline::Gated, Discipline::GloballyGated, Discipline::Exhaustive}) {
    const ModelTransforms mt(mixed_model(d));
    for (auto cls : {WaitClass::High, WaitClass::Low, WaitClass::Queue2}) {
      double previous = 1.0;
      EXPECT_NEAR(wait_lst(mt, cls, 0.0), 1.0, 1e-12);
      for (double w : {0.01, 0.1, 1.0, 10.0}) {
        const double v = wait_lst(mt, cls, w);
        EXPECT_LE(v, previous + 1e-12) << to_string(d) << " " << to_string(cls);
        EXPECT_GT(v, 0.0);
        previous = v;
      }
    }
  }
}

TEST(Analysis, PreemptionWithoutLowClassChangesNothing) {
  auto m = oracle::example_model(1.0, Discipline::Exhaustive);
  m.lambda_low = 0.0;
  const ModelTransforms mt(m);
  for (double w : {1e-3, 0.1, 1.0, 5.0, 20.0}) {
    EXPECT_NEAR(wait_lst_preemptive_high(mt, w), wait_lst_exhaustive(mt, WaitClass::High, w), 1e-12);
  }
}

TEST(Analysis, PreemptiveHighMatchesVacationOracle) {
  // Under preemption a high-priority arrival only waits for high-priority
  // work and, during a vacation, its residual.
  const auto m = vacation_model(Discipline::Exhaustive);
  const auto o = vacation_oracle(m);
  ReportOptions options;
  options.preemptive_high = true;
  const auto r = report(ModelTransforms(m), options);
  const double ref = (0.5 * m.lambda_high * m.service_high.moment(2) +
                      (1.0 - o.rho) * o.residual_vacation) /
                     (1.0 - o.rho_high);
  EXPECT_NEAR(r.high.mean_wait, ref, 1e-10);
  // Low-priority waiting is unaffected by preemption; its stay is longer.
  const auto plain = report(ModelTransforms(m));
  EXPECT_NEAR(r.low.mean_wait, plain.low.mean_wait, 1e-12);
  EXPECT_GT(r.low.mean_queue_length, plain.low.mean_queue_length);
}

TEST(Analysis, QueueLengthFormsAgree) {
  for (auto d : {Discipline::Gated, Discipline::GloballyGated}) {
    const ModelTransforms mt(oracle::example_model(1.0, d));
    for (auto cls : {WaitClass::High, WaitClass::Low, WaitClass::Queue2}) {
      for (double z : {0.0, 0.4, 0.9, 0.999}) {
        EXPECT_NEAR(queue_length_pgf(mt, cls, z, QueueLengthForm::Explicit),
                    queue_length_pgf(mt, cls, z, QueueLengthForm::Little), 1e-10)
            << to_string(d) << " " << to_string(cls) << " z=" << z;
      }
    }
  }
}

TEST(Analysis, QueueLengthMeanMatchesLittle) {
  for (auto d : {Discipline::Gated, Discipline::Exhaustive}) {
    const auto m = oracle::example_model(1.0, d);
    const ModelTransforms mt(m);
    const auto r = report(mt);
    const double h = 1e-5;
    // Central difference of the PGF at z = 1 from the left only: second order.
    auto derivative = [&](WaitClass cls) {
      const double f1 = queue_length_pgf(mt, cls, 1.0 - h);
      const double f2 = queue_length_pgf(mt, cls, 1.0 - 2.0 * h);
      return (3.0 - 4.0 * f1 + f2) / (2.0 * h);
    };
    EXPECT_NEAR(derivative(WaitClass::High) / r.high.mean_queue_length, 1.0, 1e-5);
    EXPECT_NEAR(derivative(WaitClass::Low) / r.low.mean_queue_length, 1.0, 1e-5);
    EXPECT_NEAR(r.high.mean_queue_length,
                m.lambda_high * (r.high.mean_wait + m.service_high.mean()), 1e-12);
  }
}

TEST(Analysis, CrossChecksAreRecorded) {
  const auto r = report(ModelTransforms(oracle::example_model(1.38, Discipline::Exhaustive)));
  EXPECT_GE(r.cross_checks.size(), 8u);
  for (const auto& c : r.cross_checks) EXPECT_LE(c.relative_difference, 1e-6) << c.quantity;
}

TEST(Analysis, DisciplineMisuseThrows) {
  const ModelTransforms gated(oracle::example_model(1.0, Discipline::Gated));
  EXPECT_THROW(wait_lst_exhaustive(gated, WaitClass::High, 0.5), DisciplineMismatch);
  EXPECT_THROW(wait_lst(gated, WaitClass::High, 0.5, WaitForm::Alternate), DisciplineMismatch);
  ReportOptions options;
  options.preemptive_high = true;
  EXPECT_THROW(report(gated, options), DisciplineMismatch);
}
