#pragma once

#include <string>
#include <vector>

#include "pollingkit/branching.hpp"

namespace pollingkit {

/// Customer classes a waiting time can be asked for. `Queue1NoPriority` is a
/// queue-1 customer in the same system served without priorities.
enum class WaitClass { High, Low, Queue2, Queue1NoPriority };

/// Primary is the Fuhrmann-Cooper / intervisit form; Alternate rewrites it
/// through a cycle-time transform where such a rewrite exists.
enum class WaitForm { Primary, Alternate };

std::string to_string(WaitClass c);

/// Waiting-time LSTs, one per discipline. Each throws DisciplineMismatch when
/// the model's discipline differs.
double wait_lst_gated(const ModelTransforms& mt, WaitClass cls, double omega);
double wait_lst_globally_gated(const ModelTransforms& mt, WaitClass cls, double omega);
/// Alternate forms exist for every class; the queue-2 and no-priority ones
/// use the completion-anchored cycle of their own queue.
double wait_lst_exhaustive(const ModelTransforms& mt, WaitClass cls, double omega,
                           WaitForm form = WaitForm::Primary);
/// High-priority waiting time when high-priority arrivals preempt a
/// low-priority service, which later resumes.
double wait_lst_preemptive_high(const ModelTransforms& mt, double omega);

/// Dispatches on the model's discipline. Alternate is only accepted for
/// exhaustive service.
double wait_lst(const ModelTransforms& mt, WaitClass cls, double omega,
                WaitForm form = WaitForm::Primary, bool preemptive = false);
Lst wait_transform(const ModelTransforms& mt, WaitClass cls, WaitForm form = WaitForm::Primary,
                   bool preemptive = false);

/// Explicit composes the queue-length decomposition directly; Little applies
/// the distributional Little law to the waiting-time transform.
enum class QueueLengthForm { Auto, Explicit, Little };

/// PGF of the number of customers of a class in the system at an arbitrary
/// epoch. Explicit forms exist for the gated and globally gated disciplines;
/// Auto uses them there and the Little composition otherwise. Under
/// preemption a low-priority customer stays for its completion time.
double queue_length_pgf(const ModelTransforms& mt, WaitClass cls, double z,
                        QueueLengthForm form = QueueLengthForm::Auto, bool preemptive = false);

struct ClassMetrics {
  double arrival_rate = 0.0;
  double mean_service = 0.0;
  /// Closed form.
  double mean_wait = 0.0;
  /// From the derivative of the waiting-time transform at 0.
  double mean_wait_transform = 0.0;
  double second_moment = 0.0;
  double std_wait = 0.0;
  /// Customers in the system (waiting or in service).
  double mean_queue_length = 0.0;
};

struct CrossCheck {
  std::string quantity;
  double closed_form;
  double transform;
  double relative_difference;
};

struct PerformanceReport {
  Discipline discipline;
  bool preemptive_high = false;
  DerivedQuantities derived;

  ClassMetrics high;
  ClassMetrics low;
  /// Arrival-weighted aggregate of the two priority classes.
  ClassMetrics queue_1;
  ClassMetrics queue_1_no_priority;
  ClassMetrics queue_2;

  /// Cycle anchored at the visit beginning of queue 1 for gated disciplines,
  /// at its completion for exhaustive service.
  CycleAnchor cycle_anchor;
  double cycle_mean = 0.0;
  double cycle_second_moment = 0.0;
  /// E(C^2) / 2E(C) for the visit-beginning and visit-completion anchors.
  double residual_cycle = 0.0;
  double residual_cycle_completion = 0.0;
  double intervisit_mean = 0.0;
  double intervisit_second_moment = 0.0;
  double residual_intervisit = 0.0;

  std::vector<CrossCheck> cross_checks;
};

struct ReportOptions {
  bool preemptive_high = false;
  /// Closed-form and transform means must agree to this relative tolerance.
  double cross_check_tolerance = 1e-6;
  /// Requested accuracy of differentiated moments.
  double moment_tolerance = 1e-8;
  /// When false, queue_1_no_priority is left zeroed. Sweeps evaluate the
  /// unsplit reference once instead of at every threshold.
  bool include_no_priority = true;
};

/// Means in closed form, second moments by differentiation, with a mandatory
/// cross-check of every mean against the derivative of its transform.
/// Throws InternalDisagreement when a cross-check fails.
PerformanceReport report(const ModelTransforms& mt, const ReportOptions& options = {});

}  // namespace pollingkit
