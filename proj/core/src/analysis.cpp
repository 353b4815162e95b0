#include "pollingkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pollingkit/errors.hpp"

namespace pollingkit {

namespace {

using Fn = std::function<double(double)>;

void check_omega(double omega) {
  if (!(omega >= 0.0)) throw DomainError("waiting-time transform needs omega >= 0");
}

void require_discipline(const ModelTransforms& mt, Discipline d, const char* what) {
  if (mt.model().discipline != d) {
    throw DisciplineMismatch(std::string(what) + " needs " + to_string(d) + " service, model is " +
                             to_string(mt.model().discipline));
  }
}

double small_argument(const ModelTransforms& mt) { return 1e-6 / mt.derived().mean_cycle; }

// E[exp(-p C_P - r C_R)] for the past and residual parts of a cycle with
// complement transform `cycle`: (c(r) - c(p)) / ((r - p) E(C)).
double past_residual(const ModelTransforms& mt, const Fn& cycle, const Fn& past,
                     const Fn& resid, double omega) {
  const double ec = mt.derived().mean_cycle;
  return safe_ratio([&](double w) { return cycle(resid(w)) - cycle(past(w)); },
                    [&](double w) { return (resid(w) - past(w)) * ec; }, omega,
                    small_argument(mt), 1.0);
}

// w / (w - lambda (1 - service(w))), which tends to 1 / (1 - rho).
double mg1_factor(const ModelTransforms& mt, double lambda, const Lst& service, double rho,
                  double omega) {
  if (lambda == 0.0) return 1.0;
  return safe_ratio([](double w) { return w; },
                    [&](double w) { return w - lambda * service.complement(w); }, omega,
                    small_argument(mt), 1.0 / (1.0 - rho));
}

struct ClassView {
  double lambda;
  const Lst* service;
  double rho;
};

ClassView view(const ModelTransforms& mt, WaitClass cls) {
  const auto& m = mt.model();
  const auto& d = mt.derived();
  switch (cls) {
    case WaitClass::High:
      return {m.lambda_high, &mt.service_high(), d.rho_high};
    case WaitClass::Low:
      return {m.lambda_low, &mt.service_low(), d.rho_low};
    case WaitClass::Queue2:
      return {m.lambda_2, &mt.service_2(), d.rho_2};
    case WaitClass::Queue1NoPriority:
      return {d.lambda_1, &mt.service_1(), d.rho_1};
  }
  throw DomainError("unknown waiting class");
}

Fn cycle_fn(const ModelTransforms& mt, CycleAnchor anchor) {
  return [&mt, anchor](double w) { return mt.cycle_complement(w, anchor); };
}

// Both gated disciplines share the queue-1 forms; only the cycle differs.
double queue_1_gated_form(const ModelTransforms& mt, WaitClass cls, double omega) {
  const auto& m = mt.model();
  const Fn cycle = cycle_fn(mt, CycleAnchor::Queue1Begin);
  const Fn high_work = [&](double w) { return m.lambda_high * mt.service_high().complement(w); };
  switch (cls) {
    case WaitClass::High:
      return past_residual(mt, cycle, high_work, [](double w) { return w; }, omega);
    case WaitClass::Low:
      return past_residual(
          mt, cycle,
          [&](double w) { return high_work(w) + m.lambda_low * mt.service_low().complement(w); },
          [&](double w) { return w + high_work(w); }, omega);
    case WaitClass::Queue1NoPriority: {
      const double lambda_1 = mt.derived().lambda_1;
      return past_residual(
          mt, cycle, [&](double w) { return lambda_1 * mt.service_1().complement(w); },
          [](double w) { return w; }, omega);
    }
    case WaitClass::Queue2:
      break;
  }
  throw DomainError("not a queue-1 class");
}

double exhaustive_high(const ModelTransforms& mt, double omega, WaitForm form, bool preemptive) {
  const auto& m = mt.model();
  const auto& d = mt.derived();
  if (form == WaitForm::Alternate) {
    if (preemptive) throw DomainError("no alternate form for the preemptive waiting time");
    const double ec = d.mean_cycle;
    auto low_work = [&](double w) { return m.lambda_low * mt.service_low().complement(w); };
    auto high_work = [&](double w) { return m.lambda_high * mt.service_high().complement(w); };
    return safe_ratio(
        [&](double w) {
          const double arg = w - high_work(w) - low_work(w);
          return mt.cycle_complement(arg, CycleAnchor::Queue1End) + low_work(w) * ec;
        },
        [&](double w) { return (w - high_work(w)) * ec; }, omega, small_argument(mt), 1.0);
  }
  const double lead = (1.0 - d.rho_high) *
                      mg1_factor(mt, m.lambda_high, mt.service_high(), d.rho_high, omega);
  const double intervisit_weight = (1.0 - d.rho_1) / (1.0 - d.rho_high);
  const double low_weight = d.rho_low / (1.0 - d.rho_high);
  const double intervisit_res = residual_lst(mt.intervisit(), d.mean_intervisit_1, omega);
  double low_res = 1.0;
  if (!preemptive && d.rho_low > 0.0) {
    low_res = residual_lst(mt.service_low(), m.service_low.mean(), omega);
  }
  return lead * (intervisit_weight * intervisit_res + low_weight * low_res);
}

double exhaustive_low(const ModelTransforms& mt, double omega, WaitForm form) {
  const auto& m = mt.model();
  const auto& d = mt.derived();
  auto extended = [&](double w) {
    return w + m.lambda_high * mt.busy_period_high().complement(w);
  };
  auto low_gap = [&](double w) {
    return w - m.lambda_low * mt.service_low().complement(extended(w));
  };
  if (form == WaitForm::Alternate) {
    return residual_lst(mt.cycle(CycleAnchor::Queue1End), d.mean_cycle, low_gap(omega));
  }
  // M/G/1 factor of the completion-time queue times the residual extended intervisit.
  const double load_star = d.rho_low / (1.0 - d.rho_high);
  const double lead =
      safe_ratio([&](double w) { return (1.0 - load_star) * w; }, low_gap, omega,
                 small_argument(mt), 1.0);
  const double mean_extended = d.mean_intervisit_1 / (1.0 - d.rho_high);
  return lead * residual_lst(mt.intervisit(true), mean_extended, omega);
}

// Nonpriority exhaustive form for queue 2 or for queue 1 without priorities.
double exhaustive_single(const ModelTransforms& mt, WaitClass cls, double omega, WaitForm form) {
  const ClassView c = view(mt, cls);
  const bool first = cls == WaitClass::Queue1NoPriority;
  const auto& d = mt.derived();
  if (form == WaitForm::Alternate) {
    const double gap = omega - c.lambda * c.service->complement(omega);
    return residual_lst(mt.cycle(first ? CycleAnchor::Queue1End : CycleAnchor::Queue2End),
                        d.mean_cycle, gap);
  }
  const double lead = (1.0 - c.rho) * mg1_factor(mt, c.lambda, *c.service, c.rho, omega);
  const Lst intervisit = first ? mt.intervisit() : mt.intervisit_2();
  return lead * residual_lst(intervisit, first ? d.mean_intervisit_1 : d.mean_intervisit_2, omega);
}

double residual_mean(const Distribution& x) { return x.moment(2) / (2.0 * x.mean()); }

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

std::string to_string(WaitClass c) {
  switch (c) {
    case WaitClass::High:
      return "high";
    case WaitClass::Low:
      return "low";
    case WaitClass::Queue2:
      return "queue_2";
    case WaitClass::Queue1NoPriority:
      return "queue_1_no_priority";
  }
  return "unknown";
}

double wait_lst_gated(const ModelTransforms& mt, WaitClass cls, double omega) {
  require_discipline(mt, Discipline::Gated, "gated waiting-time transform");
  check_omega(omega);
  if (cls != WaitClass::Queue2) return queue_1_gated_form(mt, cls, omega);
  const auto& m = mt.model();
  return past_residual(
      mt, cycle_fn(mt, CycleAnchor::Queue2Begin),
      [&](double w) { return m.lambda_2 * mt.service_2().complement(w); },
      [](double w) { return w; }, omega);
}

double wait_lst_globally_gated(const ModelTransforms& mt, WaitClass cls, double omega) {
  require_discipline(mt, Discipline::GloballyGated, "globally gated waiting-time transform");
  check_omega(omega);
  if (cls != WaitClass::Queue2) return queue_1_gated_form(mt, cls, omega);
  // Queue-2 customers wait for the queue-1 switch-over of the cycle that serves them.
  const double lambda_1 = mt.derived().lambda_1;
  const double fc = past_residual(
      mt, cycle_fn(mt, CycleAnchor::Queue1Begin), [&](double w) { return mt.delta(w); },
      [&](double w) { return w + lambda_1 * mt.service_1().complement(w); }, omega);
  return mt.switch_1()(omega) * fc;
}

double wait_lst_exhaustive(const ModelTransforms& mt, WaitClass cls, double omega, WaitForm form) {
  require_discipline(mt, Discipline::Exhaustive, "exhaustive waiting-time transform");
  check_omega(omega);
  switch (cls) {
    case WaitClass::High:
      return exhaustive_high(mt, omega, form, false);
    case WaitClass::Low:
      return exhaustive_low(mt, omega, form);
    case WaitClass::Queue2:
    case WaitClass::Queue1NoPriority:
      return exhaustive_single(mt, cls, omega, form);
  }
  throw DomainError("unknown waiting class");
}

double wait_lst_preemptive_high(const ModelTransforms& mt, double omega) {
  require_discipline(mt, Discipline::Exhaustive, "preemptive-resume waiting-time transform");
  check_omega(omega);
  return exhaustive_high(mt, omega, WaitForm::Primary, true);
}

double wait_lst(const ModelTransforms& mt, WaitClass cls, double omega, WaitForm form,
                bool preemptive) {
  const Discipline d = mt.model().discipline;
  if (preemptive && d != Discipline::Exhaustive) {
    throw DisciplineMismatch("preemptive resume is only defined for exhaustive service");
  }
  if (form == WaitForm::Alternate && d != Discipline::Exhaustive) {
    throw DisciplineMismatch("alternate waiting-time forms exist only for exhaustive service");
  }
  switch (d) {
    case Discipline::Gated:
      return wait_lst_gated(mt, cls, omega);
    case Discipline::GloballyGated:
      return wait_lst_globally_gated(mt, cls, omega);
    case Discipline::Exhaustive:
      if (preemptive && cls == WaitClass::High) {
        if (form == WaitForm::Alternate) {
          throw DomainError("no alternate form for the preemptive waiting time");
        }
        return wait_lst_preemptive_high(mt, omega);
      }
      return wait_lst_exhaustive(mt, cls, omega, form);
  }
  throw DomainError("unknown discipline");
}

Lst wait_transform(const ModelTransforms& mt, WaitClass cls, WaitForm form, bool preemptive) {
  // Validate the combination eagerly rather than on first evaluation.
  wait_lst(mt, cls, 0.0, form, preemptive);
  return Lst::from_value(
      [mt, cls, form, preemptive](double w) { return wait_lst(mt, cls, w, form, preemptive); });
}

namespace {

// Explicit queue-length decomposition for a class whose customers see a
// past/residual split of a cycle: the M/G/1 factor written in z times the
// intervisit-period factor.
double explicit_gated_pgf(const ModelTransforms& mt, const ClassView& c, const Fn& cycle,
                          const Fn& past, const Fn& resid, double z) {
  const double y = 1.0 - z;
  const double s = c.lambda * y;
  const double service_c = c.service->complement(s);
  const double mg1 = (1.0 - c.rho) * y * (1.0 - service_c) / (y - service_c);
  const double vacation = (cycle(resid(s)) - cycle(past(s))) /
                          (c.lambda * (1.0 - c.rho) * y * mt.derived().mean_cycle);
  return mg1 * vacation;
}

double explicit_pgf(const ModelTransforms& mt, WaitClass cls, double z) {
  const auto& m = mt.model();
  const bool gg = m.discipline == Discipline::GloballyGated;
  const ClassView c = view(mt, cls);
  const Fn identity = [](double w) { return w; };
  const Fn high_work = [&](double w) { return m.lambda_high * mt.service_high().complement(w); };
  const Fn cycle_1 = cycle_fn(mt, CycleAnchor::Queue1Begin);
  switch (cls) {
    case WaitClass::High:
      return explicit_gated_pgf(mt, c, cycle_1, high_work, identity, z);
    case WaitClass::Low:
      return explicit_gated_pgf(
          mt, c, cycle_1,
          [&](double w) { return high_work(w) + m.lambda_low * mt.service_low().complement(w); },
          [&](double w) { return w + high_work(w); }, z);
    case WaitClass::Queue1NoPriority:
      return explicit_gated_pgf(
          mt, c, cycle_1, [&](double w) { return c.lambda * c.service->complement(w); },
          identity, z);
    case WaitClass::Queue2: {
      const Fn own_work = [&](double w) { return c.lambda * c.service->complement(w); };
      if (!gg) {
        return explicit_gated_pgf(mt, c, cycle_fn(mt, CycleAnchor::Queue2Begin), own_work,
                                  identity, z);
      }
      const double lambda_1 = mt.derived().lambda_1;
      return mt.switch_1()(c.lambda * (1.0 - z)) *
             explicit_gated_pgf(
                 mt, c, cycle_1, [&](double w) { return mt.delta(w); },
                 [&](double w) { return w + lambda_1 * mt.service_1().complement(w); }, z);
    }
  }
  throw DomainError("unknown waiting class");
}

}  // namespace

double queue_length_pgf(const ModelTransforms& mt, WaitClass cls, double z, QueueLengthForm form,
                        bool preemptive) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("queue-length PGF argument must lie in [0, 1]");
  const Discipline d = mt.model().discipline;
  const bool has_explicit = d != Discipline::Exhaustive;
  if (form == QueueLengthForm::Explicit && !has_explicit) {
    throw DisciplineMismatch("no explicit queue-length form for exhaustive service");
  }
  if (preemptive && d != Discipline::Exhaustive) {
    throw DisciplineMismatch("preemptive resume is only defined for exhaustive service");
  }
  const ClassView c = view(mt, cls);
  if (z == 1.0 || c.lambda == 0.0) return 1.0;
  if (has_explicit && form != QueueLengthForm::Little) return explicit_pgf(mt, cls, z);

  // Distributional Little law: N is the Poisson count over the sojourn time.
  const double s = c.lambda * (1.0 - z);
  const double stay = (preemptive && cls == WaitClass::Low)
                          ? 1.0 - mt.completion_time_low_complement(s)
                          : 1.0 - c.service->complement(s);
  return wait_lst(mt, cls, s, WaitForm::Primary, preemptive) * stay;
}

PerformanceReport report(const ModelTransforms& mt, const ReportOptions& options) {
  const auto& m = mt.model();
  const auto& d = mt.derived();
  const bool exhaustive = m.discipline == Discipline::Exhaustive;
  if (options.preemptive_high && !exhaustive) {
    throw DisciplineMismatch("preemptive resume is only defined for exhaustive service");
  }

  PerformanceReport r{};
  r.discipline = m.discipline;
  r.preemptive_high = options.preemptive_high;
  r.derived = d;

  const MomentRequest two{2, options.moment_tolerance};
  auto check = [&](const std::string& quantity, double closed, double transform) {
    const double diff = relative_difference(closed, transform);
    r.cross_checks.push_back({quantity, closed, transform, diff});
    if (!(diff <= options.cross_check_tolerance)) {
      throw InternalDisagreement(quantity, closed, transform);
    }
  };

  const double ec = d.mean_cycle;
  const auto begin = lst_moments(mt.cycle(CycleAnchor::Queue1Begin), two);
  const auto end = lst_moments(mt.cycle(CycleAnchor::Queue1End), two);
  const auto intervisit = lst_moments(mt.intervisit(), two);
  check("mean_cycle_visit_beginning", ec, begin[0]);
  check("mean_cycle_visit_completion", ec, end[0]);
  check("mean_intervisit_1", d.mean_intervisit_1, intervisit[0]);

  r.cycle_anchor = exhaustive ? CycleAnchor::Queue1End : CycleAnchor::Queue1Begin;
  r.cycle_mean = ec;
  r.cycle_second_moment = exhaustive ? end[1] : begin[1];
  r.residual_cycle = begin[1] / (2.0 * ec);
  r.residual_cycle_completion = end[1] / (2.0 * ec);
  r.intervisit_mean = d.mean_intervisit_1;
  r.intervisit_second_moment = intervisit[1];
  r.residual_intervisit = intervisit[1] / (2.0 * d.mean_intervisit_1);

  const double c_res = r.residual_cycle;
  const double c_star_res = r.residual_cycle_completion;
  const double rho_h = d.rho_high;
  const double rho_l = d.rho_low;
  const double rho_1 = d.rho_1;
  const double rho_2 = d.rho_2;

  double mean_high = 0.0;
  double mean_low = 0.0;
  double mean_np = 0.0;
  double mean_2 = 0.0;
  switch (m.discipline) {
    case Discipline::Gated:
    case Discipline::GloballyGated:
      mean_high = (1.0 + rho_h) * c_res;
      mean_low = (1.0 + 2.0 * rho_h + rho_l) * c_res;
      mean_np = (1.0 + rho_1) * c_res;
      if (m.discipline == Discipline::Gated) {
        const auto q2 = lst_moments(mt.cycle(CycleAnchor::Queue2Begin), two);
        check("mean_cycle_queue_2_beginning", ec, q2[0]);
        mean_2 = (1.0 + rho_2) * q2[1] / (2.0 * ec);
      } else {
        mean_2 = m.switch_1.mean() + (1.0 + 2.0 * rho_1 + rho_2) * c_res;
      }
      break;
    case Discipline::Exhaustive: {
      const double res_high = residual_mean(m.service_high);
      const double res_low = residual_mean(m.service_low);
      const double res_intervisit = r.residual_intervisit;
      if (options.preemptive_high) {
        mean_high = rho_h * res_high / (1.0 - rho_h) + (1.0 - rho_1) * res_intervisit / (1.0 - rho_h);
      } else {
        mean_high = (1.0 - rho_1) * (1.0 - rho_1) / (1.0 - rho_h) * c_star_res;
        check("mean_wait_high_intervisit_form", mean_high,
              (rho_h * res_high + rho_l * res_low) / (1.0 - rho_h) +
                  (1.0 - rho_1) / (1.0 - rho_h) * res_intervisit);
      }
      mean_low = (1.0 - rho_1) / (1.0 - rho_h) * c_star_res;
      mean_np = (1.0 - rho_1) * c_star_res;

      const auto q2 = lst_moments(mt.cycle(CycleAnchor::Queue2End), two);
      const auto i2 = lst_moments(mt.intervisit_2(), two);
      check("mean_cycle_queue_2_completion", ec, q2[0]);
      check("mean_intervisit_2", d.mean_intervisit_2, i2[0]);
      mean_2 = (1.0 - rho_2) * q2[1] / (2.0 * ec);
      check("mean_wait_queue_2_intervisit_form", mean_2,
            i2[1] / (2.0 * d.mean_intervisit_2) +
                rho_2 / (1.0 - rho_2) * residual_mean(m.service_2));
      break;
    }
  }

  auto fill = [&](WaitClass cls, double lambda, const Distribution& service, double closed,
                  double stay) {
    ClassMetrics cm;
    cm.arrival_rate = lambda;
    cm.mean_service = service.mean();
    cm.mean_wait = closed;
    const auto moments =
        lst_moments(wait_transform(mt, cls, WaitForm::Primary, options.preemptive_high), two);
    cm.mean_wait_transform = moments[0];
    cm.second_moment = moments[1];
    cm.std_wait = std::sqrt(std::max(0.0, cm.second_moment - closed * closed));
    cm.mean_queue_length = lambda * (closed + stay);
    check("mean_wait_" + to_string(cls), closed, moments[0]);
    return cm;
  };

  const double low_stay = options.preemptive_high ? m.service_low.mean() / (1.0 - rho_h)
                                                  : m.service_low.mean();
  r.high = fill(WaitClass::High, m.lambda_high, m.service_high, mean_high, m.service_high.mean());
  r.low = fill(WaitClass::Low, m.lambda_low, m.service_low, mean_low, low_stay);
  const Distribution service_1 = m.service_1();
  if (options.include_no_priority) {
    r.queue_1_no_priority =
        fill(WaitClass::Queue1NoPriority, d.lambda_1, service_1, mean_np, service_1.mean());
  }
  r.queue_2 = fill(WaitClass::Queue2, m.lambda_2, m.service_2, mean_2, m.service_2.mean());

  const double wh = m.lambda_high / d.lambda_1;
  const double wl = m.lambda_low / d.lambda_1;
  ClassMetrics& q1 = r.queue_1;
  q1.arrival_rate = d.lambda_1;
  q1.mean_service = service_1.mean();
  q1.mean_wait = wh * r.high.mean_wait + wl * r.low.mean_wait;
  q1.mean_wait_transform = wh * r.high.mean_wait_transform + wl * r.low.mean_wait_transform;
  q1.second_moment = wh * r.high.second_moment + wl * r.low.second_moment;
  q1.std_wait = std::sqrt(std::max(0.0, q1.second_moment - q1.mean_wait * q1.mean_wait));
  q1.mean_queue_length = r.high.mean_queue_length + r.low.mean_queue_length;
  return r;
}

}  // namespace pollingkit
