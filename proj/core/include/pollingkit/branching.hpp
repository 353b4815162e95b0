#pragma once

#include <memory>

#include "pollingkit/model.hpp"
#include "pollingkit/transforms.hpp"

namespace pollingkit {

/// Truncation rule for the infinite products over branching generations.
struct ProductTruncation {
  /// A generation whose factor differs from 1 by less than epsilon times the
  /// accumulated complement (capped at epsilon) ends the product.
  double epsilon = 1e-14;
  int max_terms = 100'000;

  void validate() const;
};

/// Offspring and immigration PGFs at one point of the unit square.
struct ComponentPgfs {
  double h1;
  double h2;
  double f1;
  double f2;
  double g1;
  double g2;
  double g;
};

/// Joint queue-length PGFs at the four polling epochs of a cycle.
struct VisitPgfs {
  double begin_1;
  double begin_2;
  double end_1;
  double end_2;
};

/// A product evaluated in complement form, with the number of generations used.
struct ProductEvaluation {
  double complement;
  int terms;
};

/// Where a cycle starts: the beginning or the completion of a visit to a queue.
enum class CycleAnchor { Queue1Begin, Queue1End, Queue2Begin, Queue2End };

/// Auto picks the discipline shortcut when its argument is in range.
enum class EvalForm { Auto, General, Shortcut };

/// Intervisit representations: Direct reads the queue content at the next
/// visit beginning, ViaCycle maps the completion-anchored cycle, General
/// composes switch-overs with the other queue's visit.
enum class IntervisitForm { Auto, Direct, ViaCycle, General };

/// Every transform attached to a polling model.
///
/// PGF points are accepted either as z in [0,1]^2 or, in the `_complement`
/// variants, as y = 1 - z. Values of the `_complement` functions are
/// 1 - (PGF or LST). Internally everything runs on complements so that
/// derivatives at the normalization point keep full relative precision.
///
/// Instances are cheap to copy and immutable; transforms returned as Lst
/// share ownership of the model state and stay valid on their own.
class ModelTransforms {
 public:
  explicit ModelTransforms(const PollingModel& model, ProductTruncation truncation = {},
                           FixedPointConfig fixed_point = {});

  const PollingModel& model() const;
  const DerivedQuantities& derived() const;
  const ProductTruncation& truncation() const;

  const Lst& service_high() const;
  const Lst& service_low() const;
  const Lst& service_1() const;
  const Lst& service_2() const;
  const Lst& switch_1() const;
  const Lst& switch_2() const;
  /// Busy periods of the single-class M/G/1 queues.
  const Lst& busy_period_high() const;
  const Lst& busy_period_1() const;
  const Lst& busy_period_2() const;
  /// Server time caused by one customer at a queue: service for gated
  /// disciplines, a busy period for exhaustive.
  const Lst& visit_unit_1() const;
  const Lst& visit_unit_2() const;

  ComponentPgfs component_pgfs(double z1, double z2) const;

  double p1(double z1, double z2) const;
  double p1_complement(double y1, double y2) const;
  ProductEvaluation p1_product(double y1, double y2) const;
  /// Joint PGF at a cycle start with queue 1 split into its two classes.
  double p1_priority(double z_high, double z_low, double z2) const;
  /// g(z) P1(f(z)), the right-hand side of the one-step recursion.
  double p1_recursion_complement(double y1, double y2) const;

  VisitPgfs visit_pgfs(double z1, double z2) const;
  double visit_end_1_complement(double y1, double y2) const;
  double visit_begin_2_complement(double y1, double y2) const;
  double visit_end_2_complement(double y1, double y2) const;

  double cycle_lst(double omega, CycleAnchor anchor, EvalForm form = EvalForm::Auto) const;
  double cycle_complement(double omega, CycleAnchor anchor,
                          EvalForm form = EvalForm::Auto) const;
  Lst cycle(CycleAnchor anchor, EvalForm form = EvalForm::Auto) const;

  /// The aggregated offspring rate of a globally gated cycle.
  double delta(double omega) const;
  /// Cycle LST of the globally gated system as a product over iterates of delta.
  double gg_cycle_lst(double omega) const;
  ProductEvaluation gg_cycle_product(double omega) const;

  /// Intervisit period of queue 1; `extended` adds the high-priority work
  /// that arrives during it and its high-priority descendants.
  double intervisit_lst(double omega, bool extended = false,
                        IntervisitForm form = IntervisitForm::Auto) const;
  double intervisit_complement(double omega, bool extended = false,
                               IntervisitForm form = IntervisitForm::Auto) const;
  Lst intervisit(bool extended = false, IntervisitForm form = IntervisitForm::Auto) const;

  double intervisit_2_complement(double omega,
                                 IntervisitForm form = IntervisitForm::Auto) const;
  Lst intervisit_2(IntervisitForm form = IntervisitForm::Auto) const;

  /// Completion time of a low-priority service: the service plus all
  /// high-priority busy periods started during it.
  double completion_time_low_complement(double omega) const;
  Lst completion_time_low() const;

  struct State;

 private:
  std::shared_ptr<const State> state_;
};

}  // namespace pollingkit
