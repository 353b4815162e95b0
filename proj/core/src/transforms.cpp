#include "pollingkit/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "pollingkit/errors.hpp"

namespace pollingkit {

Lst Lst::from_complement(Fn complement, Fn slope) {
  Lst f;
  f.complement_ = std::move(complement);
  f.slope_ = std::move(slope);
  return f;
}

Lst Lst::from_value(Fn value) {
  Lst f;
  f.complement_ = [value = std::move(value)](double w) { return 1.0 - value(w); };
  f.value_based_ = true;
  return f;
}

void FixedPointConfig::validate() const {
  if (!(tolerance > 0.0)) throw DomainError("fixed-point tolerance must be positive");
  if (max_iterations < 1) throw DomainError("fixed-point max_iterations must be >= 1");
}

void MomentRequest::validate() const {
  if (order < 1 || order > 3) throw DomainError("moment order must be 1, 2 or 3");
  if (!(target_relative_error > 0.0)) throw DomainError("moment target error must be positive");
}

namespace {

// Picard or Newton iteration for c = 1 - beta(w + lambda c), started at c = 1.
double solve_busy_period_complement(const Lst& beta, double lambda, double omega,
                                    const FixedPointConfig& cfg) {
  cfg.validate();
  if (omega < 0.0) throw DomainError("busy period transform requires omega >= 0");
  if (lambda < 0.0) throw DomainError("busy period transform requires lambda >= 0");
  if (lambda == 0.0) return beta.complement(omega);

  if (omega == 0.0) {
    // c = 0 is the minimal-pi root exactly when lambda E(B) <= 1.
    double load = 0.0;
    if (beta.has_slope()) {
      load = lambda * beta.slope(0.0);
    } else {
      constexpr double h = 1e-9;
      load = lambda * beta.complement(h) / h;
    }
    if (load <= 1.0) return 0.0;
  }

  double c = 1.0;
  double gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double s = omega + lambda * c;
    double next = beta.complement(s);
    if (beta.has_slope()) {
      const double f = next - c;
      const double df = lambda * beta.slope(s) - 1.0;
      if (df < 0.0) next = c - f / df;
    }
    next = std::clamp(next, 0.0, 1.0);
    gap = std::abs(next - c);
    c = next;
    if (gap <= cfg.tolerance * c || c == 0.0) return c;
  }
  throw IterationLimitError("busy period fixed point did not converge in " +
                                std::to_string(cfg.max_iterations) + " iterations",
                            1.0 - c, gap);
}

}  // namespace

double busy_period_complement(const Lst& beta, double lambda, double omega,
                              const FixedPointConfig& cfg) {
  return solve_busy_period_complement(beta, lambda, omega, cfg);
}

double busy_period_lst(const Lst& beta, double lambda, double omega,
                       const FixedPointConfig& cfg) {
  return 1.0 - solve_busy_period_complement(beta, lambda, omega, cfg);
}

Lst busy_period(Lst beta, double lambda, FixedPointConfig cfg) {
  auto complement = [beta, lambda, cfg](double w) {
    return solve_busy_period_complement(beta, lambda, w, cfg);
  };
  if (!beta.has_slope()) return Lst::from_complement(complement);
  auto slope = [beta, lambda, cfg](double w) {
    const double c = solve_busy_period_complement(beta, lambda, w, cfg);
    const double b = beta.slope(w + lambda * c);
    return b / (1.0 - lambda * b);
  };
  return Lst::from_complement(complement, slope);
}

double safe_ratio(const std::function<double(double)>& numerator,
                  const std::function<double(double)>& denominator, double omega,
                  double threshold, std::optional<double> limit) {
  if (omega < 0.0) throw DomainError("safe_ratio requires omega >= 0");
  if (!(threshold > 0.0)) throw DomainError("safe_ratio threshold must be positive");

  auto quotient = [&](double w) {
    const double d = denominator(w);
    if (d == 0.0) {
      throw DomainError("safe_ratio: denominator vanishes at omega = " + std::to_string(w));
    }
    return numerator(w) / d;
  };

  if (omega >= threshold) return quotient(omega);

  double at_zero = 0.0;
  if (limit) {
    at_zero = *limit;
  } else {
    // N'(0) / D'(0) from (4 g(t) - g(2t)) / (2t), using g(0) = 0.
    const double n = 4.0 * numerator(threshold) - numerator(2.0 * threshold);
    const double d = 4.0 * denominator(threshold) - denominator(2.0 * threshold);
    if (d == 0.0) throw DomainError("safe_ratio: degenerate denominator derivative at 0");
    at_zero = n / d;
  }
  if (omega == 0.0) return at_zero;
  const double at_threshold = quotient(threshold);
  return at_zero + (at_threshold - at_zero) * (omega / threshold);
}

double residual_lst(const Lst& x, double mean_x, double omega, std::optional<double> threshold) {
  if (!(mean_x > 0.0)) throw DomainError("residual_lst requires a positive mean");
  if (omega < 0.0) throw DomainError("residual_lst requires omega >= 0");
  const double tau = threshold.value_or(1e-6 / mean_x);
  return safe_ratio([&](double w) { return x.complement(w); },
                    [&](double w) { return w * mean_x; }, omega, tau, 1.0);
}

Lst residual(Lst x, double mean_x) {
  if (!(mean_x > 0.0)) throw DomainError("residual requires a positive mean");
  return Lst::from_value([x = std::move(x), mean_x](double w) { return residual_lst(x, mean_x, w); });
}

namespace {

// Complement values memoized on the exact step grid h0 / 2^i * j.
class ComplementCache {
 public:
  explicit ComplementCache(const Lst& f) : f_(f) {}

  bool value_based() const { return f_.value_based(); }

  double operator()(double h) {
    auto it = values_.find(h);
    if (it != values_.end()) return it->second;
    const double c = f_.complement(h);
    values_.emplace(h, c);
    return c;
  }

 private:
  const Lst& f_;
  std::map<double, double> values_;
};

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Entry {
  double value;
  // Rounding noise carried from the complement evaluations (rms model).
  double noise;
};

// Forward-difference estimate of the k-th moment at step h:
// (-1)^k f^(k)(0) = (-1)^(k+1) c^(k)(0), with c = 1 - f and c(0) = 0.
Entry forward_moment(ComplementCache& c, int k, double h, bool absolute_noise) {
  constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2.0;
  double delta = 0.0;
  double noise_sq = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
    const double value = c(j * h);
    const double term = binomial(k, j) * (absolute_noise ? std::max(1.0, std::abs(value)) : value);
    delta += sign * binomial(k, j) * value;
    noise_sq += term * term;
  }
  const double scale = std::pow(h, k);
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return {sign * delta / scale, unit_roundoff * std::sqrt(noise_sq) / scale};
}

double probe_first_moment(const Lst& f) {
  double h = 1.0;
  double m = f.complement(h) / h;
  for (int i = 0; i < 3 && m > 0.0; ++i) {
    h = 1e-3 / m;
    m = f.complement(h) / h;
  }
  return m;
}

// Richardson table over halved steps. The expansion of a one-sided
// difference has every power of h, so column j removes the h^j term.
// Each entry's error is the larger of its truncation estimate (distance to
// its neighbours in the table) and the propagated rounding noise.
MomentEstimate richardson(ComplementCache& c, int k, double h0, double target,
                          const DifferentiationScheme& scheme) {
  const int rows = scheme.max_depth + 1;
  std::vector<std::vector<Entry>> table(rows);
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_err = std::numeric_limits<double>::infinity();

  for (int i = 0; i < rows; ++i) {
    table[i].resize(i + 1);
    table[i][0] = forward_moment(c, k, std::ldexp(h0, -i), c.value_based());
    if (i == 0) {
      best = table[0][0].value;
      continue;
    }
    double row_noise = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= i; ++j) {
      const double fac = std::ldexp(1.0, j) - 1.0;
      const Entry& fine = table[i][j - 1];
      const Entry& coarse = table[i - 1][j - 1];
      Entry& e = table[i][j];
      e.value = fine.value + (fine.value - coarse.value) / fac;
      e.noise = std::hypot((1.0 + 1.0 / fac) * fine.noise, coarse.noise / fac);
      row_noise = std::min(row_noise, e.noise);

      double trunc = std::abs(e.value - fine.value);
      if (j < i) trunc = std::max(trunc, std::abs(e.value - table[i - 1][j].value));
      const double err = std::max(trunc, e.noise);
      if (err <= best_err) {
        best_err = err;
        best = e.value;
      }
    }
    if (best_err <= 1e-3 * target * std::abs(best)) break;
    // Deeper rows only get noisier.
    if (row_noise >= best_err) break;
  }
  return {best, best_err};
}

}  // namespace

MomentEstimate lst_moment(const Lst& f, int order, double target_relative_error,
                          const DifferentiationScheme& scheme) {
  MomentRequest req{order, target_relative_error};
  req.validate();
  const double m1 = probe_first_moment(f);
  if (!(m1 > 0.0)) return {0.0, 0.0};
  ComplementCache cache(f);
  const MomentEstimate est =
      richardson(cache, order, scheme.initial_step_factor / m1, target_relative_error, scheme);
  if (!(est.error <= target_relative_error * std::abs(est.value))) {
    throw AccuracyError("moment of order " + std::to_string(order) +
                            " missed its target: relative error " +
                            std::to_string(est.error / std::abs(est.value)),
                        est.value, est.error / std::abs(est.value));
  }
  return est;
}

std::vector<double> lst_moments(const Lst& f, const MomentRequest& req,
                                const DifferentiationScheme& scheme) {
  req.validate();
  std::vector<double> out(req.order, 0.0);
  const double m1 = probe_first_moment(f);
  if (!(m1 > 0.0)) return out;
  ComplementCache cache(f);
  for (int k = 1; k <= req.order; ++k) {
    const MomentEstimate est =
        richardson(cache, k, scheme.initial_step_factor / m1, req.target_relative_error, scheme);
    if (!(est.error <= req.target_relative_error * std::abs(est.value))) {
      throw AccuracyError("moment of order " + std::to_string(k) +
                              " missed its target: relative error " +
                              std::to_string(est.error / std::abs(est.value)),
                          est.value, est.error / std::abs(est.value));
    }
    out[k - 1] = est.value;
  }
  return out;
}

}  // namespace pollingkit
