#include "pollingkit/branching.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

#include "pollingkit/errors.hpp"

namespace pollingkit {

void ProductTruncation::validate() const {
  if (!(epsilon > 0.0)) throw DomainError("product truncation epsilon must be positive");
  if (max_terms < 1) throw DomainError("product truncation max_terms must be >= 1");
}

namespace {

// 1 - prod(1 - c_i), accurate when every c_i is small.
double complement_of_product(std::initializer_list<double> complements) {
  double log_sum = 0.0;
  for (double c : complements) log_sum += std::log1p(-c);
  return -std::expm1(log_sum);
}

void check_unit(double z, const char* name) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw DomainError(std::string("PGF argument ") + name + " must lie in [0, 1]");
  }
}

void check_omega(double omega) {
  if (!(omega >= 0.0)) throw DomainError("transform argument must be >= 0");
}

struct Point {
  double y1;
  double y2;
};

}  // namespace

struct ModelTransforms::State {
  State(const PollingModel& m, ProductTruncation trunc, FixedPointConfig fp)
      : model(m),
        derived(derive(m)),
        truncation(trunc),
        fixed_point(fp),
        beta_high(m.service_high.transform()),
        beta_low(m.service_low.transform()),
        beta_1(m.service_1().transform()),
        beta_2(m.service_2.transform()),
        sigma_1(m.switch_1.transform()),
        sigma_2(m.switch_2.transform()),
        pi_high(busy_period(beta_high, m.lambda_high, fp)),
        pi_1(busy_period(beta_1, m.lambda_1(), fp)),
        pi_2(busy_period(beta_2, m.lambda_2, fp)),
        lambda_1(m.lambda_1()),
        lambda_2(m.lambda_2) {}

  PollingModel model;
  DerivedQuantities derived;
  ProductTruncation truncation;
  FixedPointConfig fixed_point;

  Lst beta_high;
  Lst beta_low;
  Lst beta_1;
  Lst beta_2;
  Lst sigma_1;
  Lst sigma_2;
  Lst pi_high;
  Lst pi_1;
  Lst pi_2;

  double lambda_1;
  double lambda_2;

  bool exhaustive() const { return model.discipline == Discipline::Exhaustive; }
  bool globally_gated() const { return model.discipline == Discipline::GloballyGated; }

  const Lst& unit_1() const { return exhaustive() ? pi_1 : beta_1; }
  const Lst& unit_2() const { return exhaustive() ? pi_2 : beta_2; }

  // Offspring complements of one customer of each queue.
  double h1(Point y) const {
    if (exhaustive()) return pi_1.complement(lambda_2 * y.y2);
    return beta_1.complement(lambda_1 * y.y1 + lambda_2 * y.y2);
  }
  double h2(Point y) const {
    if (exhaustive()) return pi_2.complement(lambda_1 * y.y1);
    return beta_2.complement(lambda_1 * y.y1 + lambda_2 * y.y2);
  }

  // One generation step: returns log g(y) and moves y to f(y).
  double step(Point& y) const {
    const double rate = lambda_1 * y.y1 + lambda_2 * y.y2;
    if (globally_gated()) {
      const double log_g = std::log1p(-sigma_1.complement(rate)) +
                           std::log1p(-sigma_2.complement(rate));
      y = {beta_1.complement(rate), beta_2.complement(rate)};
      return log_g;
    }
    const double next_2 = h2(y);
    const double log_g = std::log1p(-sigma_2.complement(rate)) +
                         std::log1p(-sigma_1.complement(lambda_1 * y.y1 + lambda_2 * next_2));
    y = {h1({y.y1, next_2}), next_2};
    return log_g;
  }

  ProductEvaluation p1(Point y) const {
    double log_sum = 0.0;
    double gap = 0.0;
    for (int n = 0; n < truncation.max_terms; ++n) {
      const double log_g = step(y);
      log_sum += log_g;
      gap = -std::expm1(log_g);
      const double accumulated = -log_sum;
      if (gap <= truncation.epsilon * std::min(1.0, accumulated)) {
        return {-std::expm1(log_sum), n + 1};
      }
    }
    throw TruncationError("joint queue-length product did not converge within " +
                              std::to_string(truncation.max_terms) + " terms",
                          std::exp(log_sum), gap);
  }

  ProductEvaluation gg_product(double omega) const {
    double log_sum = 0.0;
    double gap = 0.0;
    double x = omega;
    for (int n = 0; n < truncation.max_terms; ++n) {
      const double log_s = std::log1p(-sigma_1.complement(x)) + std::log1p(-sigma_2.complement(x));
      log_sum += log_s;
      gap = -std::expm1(log_s);
      if (gap <= truncation.epsilon * std::min(1.0, -log_sum)) {
        return {-std::expm1(log_sum), n + 1};
      }
      x = delta(x);
    }
    throw TruncationError("globally gated cycle product did not converge within " +
                              std::to_string(truncation.max_terms) + " terms",
                          std::exp(log_sum), gap);
  }

  double delta(double omega) const {
    return model.lambda_high * beta_high.complement(omega) +
           model.lambda_low * beta_low.complement(omega) + lambda_2 * beta_2.complement(omega);
  }

  void require_branching(const char* what) const {
    if (globally_gated()) {
      throw DomainError(std::string(what) +
                        " is not available for the globally gated discipline");
    }
  }

  double visit_end_1(Point y) const {
    require_branching("visit-completion PGF");
    return p1({h1(y), y.y2}).complement;
  }
  double visit_begin_2(Point y) const {
    return complement_of_product(
        {visit_end_1(y), sigma_1.complement(lambda_1 * y.y1 + lambda_2 * y.y2)});
  }
  double visit_end_2(Point y) const { return visit_begin_2({y.y1, h2(y)}); }

  double cycle(double omega, CycleAnchor anchor, EvalForm form) const;
  double cycle_q1_begin(double omega, EvalForm form) const;
  double cycle_q1_end(double omega, EvalForm form) const;
  double cycle_q2_begin(double omega, EvalForm form) const;
  double cycle_q2_end(double omega, EvalForm form) const;

  double intervisit_1(double omega, IntervisitForm form) const;
  double intervisit_2(double omega, IntervisitForm form) const;
  double extension(double omega) const { return omega + model.lambda_high * pi_high.complement(omega); }
};

namespace {

[[noreturn]] void shortcut_out_of_range(const char* what, double arg) {
  throw DomainError(std::string(what) + " shortcut needs its PGF argument in [0, 1] (got 1 - " +
                    std::to_string(arg) + "); use the general form");
}

}  // namespace

double ModelTransforms::State::cycle_q1_begin(double omega, EvalForm form) const {
  if (globally_gated()) {
    if (form == EvalForm::General) {
      const double s = sigma_1.complement(omega);
      const double t = sigma_2.complement(omega);
      return complement_of_product(
          {s, t, p1({beta_1.complement(omega), beta_2.complement(omega)}).complement});
    }
    return gg_product(omega).complement;
  }
  const bool shortcut_ok =
      model.discipline == Discipline::Gated && lambda_1 > 0.0 && omega <= lambda_1;
  if (form == EvalForm::Shortcut) {
    if (model.discipline != Discipline::Gated) {
      throw DomainError("the visit-beginning cycle shortcut needs gated service");
    }
    if (!shortcut_ok) shortcut_out_of_range("cycle-time", lambda_1 > 0.0 ? omega / lambda_1 : INFINITY);
  }
  if (shortcut_ok && form != EvalForm::General) return p1({omega / lambda_1, 0.0}).complement;
  const double a = omega + lambda_2 * unit_2().complement(omega);
  return complement_of_product({sigma_1.complement(a), sigma_2.complement(omega),
                                p1({unit_1().complement(a), unit_2().complement(omega)}).complement});
}

double ModelTransforms::State::cycle_q1_end(double omega, EvalForm form) const {
  if (globally_gated()) {
    if (form == EvalForm::Shortcut) {
      throw DomainError("no completion-anchored cycle shortcut for globally gated service");
    }
    const double b1 = beta_1.complement(omega);
    const double a = omega + lambda_1 * b1;
    return complement_of_product(
        {sigma_1.complement(a), sigma_2.complement(a),
         p1({beta_1.complement(lambda_1 * b1), beta_2.complement(a)}).complement});
  }
  double shortcut_arg = INFINITY;
  if (exhaustive() && lambda_1 > 0.0) shortcut_arg = pi_1.complement(omega) + omega / lambda_1;
  const bool shortcut_ok = shortcut_arg <= 1.0;
  if (form == EvalForm::Shortcut) {
    if (!exhaustive()) {
      throw DisciplineMismatch("the visit-completion cycle shortcut needs exhaustive service");
    }
    if (!shortcut_ok) shortcut_out_of_range("completion-anchored cycle", shortcut_arg);
  }
  if (shortcut_ok && form != EvalForm::General) return p1({shortcut_arg, 0.0}).complement;
  const double u1 = unit_1().complement(omega);
  const double b = omega + lambda_1 * u1;
  const double u2 = unit_2().complement(b);
  return complement_of_product({sigma_1.complement(b + lambda_2 * u2), sigma_2.complement(b),
                                visit_end_1({u1, u2})});
}

double ModelTransforms::State::cycle_q2_begin(double omega, EvalForm form) const {
  require_branching("the queue-2 anchored cycle");
  const bool shortcut_ok =
      model.discipline == Discipline::Gated && lambda_2 > 0.0 && omega <= lambda_2;
  if (form == EvalForm::Shortcut) {
    if (model.discipline != Discipline::Gated) {
      throw DomainError("the visit-beginning cycle shortcut needs gated service");
    }
    if (!shortcut_ok) shortcut_out_of_range("cycle-time", lambda_2 > 0.0 ? omega / lambda_2 : INFINITY);
  }
  if (shortcut_ok && form != EvalForm::General) return visit_begin_2({0.0, omega / lambda_2});
  const double b = omega + lambda_1 * unit_1().complement(omega);
  return complement_of_product({sigma_2.complement(b), sigma_1.complement(omega),
                                visit_begin_2({unit_1().complement(omega), unit_2().complement(b)})});
}

double ModelTransforms::State::cycle_q2_end(double omega, EvalForm form) const {
  require_branching("the queue-2 anchored cycle");
  double shortcut_arg = INFINITY;
  if (exhaustive() && lambda_2 > 0.0) shortcut_arg = pi_2.complement(omega) + omega / lambda_2;
  const bool shortcut_ok = shortcut_arg <= 1.0;
  if (form == EvalForm::Shortcut) {
    if (!exhaustive()) {
      throw DisciplineMismatch("the visit-completion cycle shortcut needs exhaustive service");
    }
    if (!shortcut_ok) shortcut_out_of_range("completion-anchored cycle", shortcut_arg);
  }
  if (shortcut_ok && form != EvalForm::General) return visit_begin_2({0.0, shortcut_arg});
  const double u2 = unit_2().complement(omega);
  const double b = omega + lambda_2 * u2;
  const double u1 = unit_1().complement(b);
  return complement_of_product({sigma_2.complement(b + lambda_1 * u1), sigma_1.complement(b),
                                visit_end_2({u1, u2})});
}

double ModelTransforms::State::cycle(double omega, CycleAnchor anchor, EvalForm form) const {
  check_omega(omega);
  switch (anchor) {
    case CycleAnchor::Queue1Begin:
      return cycle_q1_begin(omega, form);
    case CycleAnchor::Queue1End:
      return cycle_q1_end(omega, form);
    case CycleAnchor::Queue2Begin:
      return cycle_q2_begin(omega, form);
    case CycleAnchor::Queue2End:
      return cycle_q2_end(omega, form);
  }
  throw DomainError("unknown cycle anchor");
}

double ModelTransforms::State::intervisit_1(double omega, IntervisitForm form) const {
  check_omega(omega);
  if (form == IntervisitForm::Direct || form == IntervisitForm::ViaCycle) {
    if (!exhaustive()) {
      throw DisciplineMismatch("this intervisit representation needs exhaustive service");
    }
  }
  const bool direct_ok = exhaustive() && lambda_1 > 0.0 && omega <= lambda_1;
  if (form == IntervisitForm::Direct && !direct_ok) {
    shortcut_out_of_range("intervisit", lambda_1 > 0.0 ? omega / lambda_1 : INFINITY);
  }
  if (form == IntervisitForm::ViaCycle) {
    return cycle_q1_end(omega - lambda_1 * beta_1.complement(omega), EvalForm::General);
  }
  if (direct_ok && (form == IntervisitForm::Direct || form == IntervisitForm::Auto)) {
    return p1({omega / lambda_1, 0.0}).complement;
  }
  if (globally_gated()) {
    return complement_of_product({sigma_1.complement(omega), sigma_2.complement(omega),
                                  p1({0.0, beta_2.complement(omega)}).complement});
  }
  const double u2 = unit_2().complement(omega);
  return complement_of_product({sigma_1.complement(omega + lambda_2 * u2),
                                sigma_2.complement(omega), visit_end_1({0.0, u2})});
}

double ModelTransforms::State::intervisit_2(double omega, IntervisitForm form) const {
  check_omega(omega);
  require_branching("the queue-2 intervisit transform");
  if (form == IntervisitForm::Direct || form == IntervisitForm::ViaCycle) {
    if (!exhaustive()) {
      throw DisciplineMismatch("this intervisit representation needs exhaustive service");
    }
  }
  const bool direct_ok = exhaustive() && lambda_2 > 0.0 && omega <= lambda_2;
  if (form == IntervisitForm::Direct && !direct_ok) {
    shortcut_out_of_range("intervisit", lambda_2 > 0.0 ? omega / lambda_2 : INFINITY);
  }
  if (form == IntervisitForm::ViaCycle) {
    return cycle_q2_end(omega - lambda_2 * beta_2.complement(omega), EvalForm::General);
  }
  if (direct_ok && (form == IntervisitForm::Direct || form == IntervisitForm::Auto)) {
    return visit_begin_2({0.0, omega / lambda_2});
  }
  const double u1 = unit_1().complement(omega);
  return complement_of_product({sigma_2.complement(omega + lambda_1 * u1),
                                sigma_1.complement(omega), visit_end_2({u1, 0.0})});
}

ModelTransforms::ModelTransforms(const PollingModel& model, ProductTruncation truncation,
                                 FixedPointConfig fixed_point) {
  require_valid(model);
  truncation.validate();
  fixed_point.validate();
  state_ = std::make_shared<const State>(model, truncation, fixed_point);
}

const PollingModel& ModelTransforms::model() const { return state_->model; }
const DerivedQuantities& ModelTransforms::derived() const { return state_->derived; }
const ProductTruncation& ModelTransforms::truncation() const { return state_->truncation; }

const Lst& ModelTransforms::service_high() const { return state_->beta_high; }
const Lst& ModelTransforms::service_low() const { return state_->beta_low; }
const Lst& ModelTransforms::service_1() const { return state_->beta_1; }
const Lst& ModelTransforms::service_2() const { return state_->beta_2; }
const Lst& ModelTransforms::switch_1() const { return state_->sigma_1; }
const Lst& ModelTransforms::switch_2() const { return state_->sigma_2; }
const Lst& ModelTransforms::busy_period_high() const { return state_->pi_high; }
const Lst& ModelTransforms::busy_period_1() const { return state_->pi_1; }
const Lst& ModelTransforms::busy_period_2() const { return state_->pi_2; }
const Lst& ModelTransforms::visit_unit_1() const { return state_->unit_1(); }
const Lst& ModelTransforms::visit_unit_2() const { return state_->unit_2(); }

ComponentPgfs ModelTransforms::component_pgfs(double z1, double z2) const {
  check_unit(z1, "z1");
  check_unit(z2, "z2");
  const State& s = *state_;
  const Point y{1.0 - z1, 1.0 - z2};
  const double rate = s.lambda_1 * y.y1 + s.lambda_2 * y.y2;
  ComponentPgfs out{};
  if (s.globally_gated()) {
    out.h1 = 1.0 - s.beta_1.complement(rate);
    out.h2 = 1.0 - s.beta_2.complement(rate);
    out.f1 = out.h1;
    out.f2 = out.h2;
    out.g1 = 1.0 - s.sigma_1.complement(rate);
    out.g2 = 1.0 - s.sigma_2.complement(rate);
  } else {
    const double h2 = s.h2(y);
    out.h1 = 1.0 - s.h1(y);
    out.h2 = 1.0 - h2;
    out.f1 = 1.0 - s.h1({y.y1, h2});
    out.f2 = out.h2;
    out.g1 = 1.0 - s.sigma_1.complement(s.lambda_1 * y.y1 + s.lambda_2 * h2);
    out.g2 = 1.0 - s.sigma_2.complement(rate);
  }
  out.g = out.g1 * out.g2;
  return out;
}

double ModelTransforms::p1(double z1, double z2) const {
  check_unit(z1, "z1");
  check_unit(z2, "z2");
  return 1.0 - state_->p1({1.0 - z1, 1.0 - z2}).complement;
}

double ModelTransforms::p1_complement(double y1, double y2) const {
  return p1_product(y1, y2).complement;
}

ProductEvaluation ModelTransforms::p1_product(double y1, double y2) const {
  check_unit(y1, "y1");
  check_unit(y2, "y2");
  return state_->p1({y1, y2});
}

double ModelTransforms::p1_priority(double z_high, double z_low, double z2) const {
  check_unit(z_high, "z_high");
  check_unit(z_low, "z_low");
  check_unit(z2, "z2");
  const State& s = *state_;
  const double y1 =
      (s.model.lambda_high * (1.0 - z_high) + s.model.lambda_low * (1.0 - z_low)) / s.lambda_1;
  return 1.0 - s.p1({y1, 1.0 - z2}).complement;
}

double ModelTransforms::p1_recursion_complement(double y1, double y2) const {
  check_unit(y1, "y1");
  check_unit(y2, "y2");
  Point y{y1, y2};
  const double log_g = state_->step(y);
  const double rest = state_->p1(y).complement;
  return -std::expm1(log_g + std::log1p(-rest));
}

VisitPgfs ModelTransforms::visit_pgfs(double z1, double z2) const {
  check_unit(z1, "z1");
  check_unit(z2, "z2");
  const State& s = *state_;
  const Point y{1.0 - z1, 1.0 - z2};
  return {1.0 - s.p1(y).complement, 1.0 - s.visit_begin_2(y), 1.0 - s.visit_end_1(y),
          1.0 - s.visit_end_2(y)};
}

double ModelTransforms::visit_end_1_complement(double y1, double y2) const {
  check_unit(y1, "y1");
  check_unit(y2, "y2");
  return state_->visit_end_1({y1, y2});
}

double ModelTransforms::visit_begin_2_complement(double y1, double y2) const {
  check_unit(y1, "y1");
  check_unit(y2, "y2");
  return state_->visit_begin_2({y1, y2});
}

double ModelTransforms::visit_end_2_complement(double y1, double y2) const {
  check_unit(y1, "y1");
  check_unit(y2, "y2");
  return state_->visit_end_2({y1, y2});
}

double ModelTransforms::cycle_lst(double omega, CycleAnchor anchor, EvalForm form) const {
  return 1.0 - state_->cycle(omega, anchor, form);
}

double ModelTransforms::cycle_complement(double omega, CycleAnchor anchor, EvalForm form) const {
  return state_->cycle(omega, anchor, form);
}

Lst ModelTransforms::cycle(CycleAnchor anchor, EvalForm form) const {
  return Lst::from_complement(
      [s = state_, anchor, form](double w) { return s->cycle(w, anchor, form); });
}

double ModelTransforms::delta(double omega) const {
  check_omega(omega);
  return state_->delta(omega);
}

double ModelTransforms::gg_cycle_lst(double omega) const {
  return 1.0 - gg_cycle_product(omega).complement;
}

ProductEvaluation ModelTransforms::gg_cycle_product(double omega) const {
  check_omega(omega);
  if (!state_->globally_gated()) {
    throw DisciplineMismatch("the delta-product cycle transform needs globally gated service");
  }
  return state_->gg_product(omega);
}

double ModelTransforms::intervisit_lst(double omega, bool extended, IntervisitForm form) const {
  return 1.0 - intervisit_complement(omega, extended, form);
}

double ModelTransforms::intervisit_complement(double omega, bool extended,
                                              IntervisitForm form) const {
  check_omega(omega);
  if (extended) {
    if (!state_->exhaustive()) {
      throw DisciplineMismatch("the extended intervisit period needs exhaustive service");
    }
    return state_->intervisit_1(state_->extension(omega), form);
  }
  return state_->intervisit_1(omega, form);
}

Lst ModelTransforms::intervisit(bool extended, IntervisitForm form) const {
  if (extended && !state_->exhaustive()) {
    throw DisciplineMismatch("the extended intervisit period needs exhaustive service");
  }
  return Lst::from_complement([s = state_, extended, form](double w) {
    check_omega(w);
    return s->intervisit_1(extended ? s->extension(w) : w, form);
  });
}

double ModelTransforms::intervisit_2_complement(double omega, IntervisitForm form) const {
  return state_->intervisit_2(omega, form);
}

Lst ModelTransforms::intervisit_2(IntervisitForm form) const {
  state_->require_branching("the queue-2 intervisit transform");
  return Lst::from_complement([s = state_, form](double w) { return s->intervisit_2(w, form); });
}

double ModelTransforms::completion_time_low_complement(double omega) const {
  check_omega(omega);
  return state_->beta_low.complement(state_->extension(omega));
}

Lst ModelTransforms::completion_time_low() const {
  return Lst::from_complement([s = state_](double w) {
    check_omega(w);
    return s->beta_low.complement(s->extension(w));
  });
}

}  // namespace pollingkit
