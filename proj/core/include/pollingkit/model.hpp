#pragma once

#include <string>
#include <vector>

#include "pollingkit/distributions.hpp"

namespace pollingkit {

enum class Discipline { Gated, GloballyGated, Exhaustive };

std::string to_string(Discipline d);
/// Accepts "gated", "globally-gated" and "exhaustive".
Discipline parse_discipline(const std::string& name);

/// Two-queue cyclic polling system. Queue 1 holds a high and a low priority
/// class; queue 2 holds a single class. One discipline governs both queues.
struct PollingModel {
  double lambda_high;
  double lambda_low;
  double lambda_2;
  Distribution service_high;
  Distribution service_low;
  Distribution service_2;
  /// Switch-over from queue 1 to queue 2.
  Distribution switch_1;
  /// Switch-over from queue 2 back to queue 1.
  Distribution switch_2;
  Discipline discipline;

  double lambda_1() const { return lambda_high + lambda_low; }
  /// Service of an arbitrary queue-1 customer, ignoring priorities.
  Distribution service_1() const;
};

struct DerivedQuantities {
  double lambda_1;
  double rho_high;
  double rho_low;
  double rho_1;
  double rho_2;
  double rho;
  double mean_cycle;
  double mean_visit_1;
  double mean_visit_2;
  double mean_intervisit_1;
  double mean_intervisit_2;
};

DerivedQuantities derive(const PollingModel& m);

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant; empty when the model is usable.
std::vector<Violation> validate(const PollingModel& m);

/// Throws ModelError listing all violations.
void require_valid(const PollingModel& m);

/// Queue 1 gets Poisson(lambda1) jobs with exponential service `base_1`; jobs
/// shorter than `threshold` become high priority.
PollingModel threshold_model(double lambda1, const Distribution& base_1, double lambda2,
                             const Distribution& service_2, const Distribution& switch_1,
                             const Distribution& switch_2, double threshold,
                             Discipline discipline);

/// The same system without priorities: every queue-1 job is a high-priority job.
PollingModel without_priorities(const PollingModel& m);

}  // namespace pollingkit
