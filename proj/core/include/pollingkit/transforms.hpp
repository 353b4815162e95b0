#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace pollingkit {

/// Laplace-Stieltjes transform f(w) = E[exp(-w X)] of a nonnegative random
/// variable, restricted to real w >= 0.
///
/// The transform is carried by its complement 1 - f(w). Near w = 0 the
/// complement is O(w) and every composition in this library (busy periods,
/// branching products, cycle transforms) is built from complements, so the
/// small quantities that moments are extracted from keep full relative
/// precision instead of drowning in the leading 1.
class Lst {
 public:
  using Fn = std::function<double(double)>;

  Lst() = default;

  /// `complement(w)` must return 1 - f(w). `slope(w)`, when given, returns
  /// -f'(w) = E[X exp(-w X)] and enables Newton refinement in busy periods.
  static Lst from_complement(Fn complement, Fn slope = {});

  /// Wraps a value function; the complement is formed as 1 - value.
  static Lst from_value(Fn value);

  double operator()(double w) const { return 1.0 - complement_(w); }
  double complement(double w) const { return complement_(w); }

  bool has_slope() const noexcept { return static_cast<bool>(slope_); }
  double slope(double w) const { return slope_(w); }

  explicit operator bool() const noexcept { return static_cast<bool>(complement_); }

  /// True when the complement is formed as 1 - value, so its rounding error
  /// is absolute rather than relative to its size.
  bool value_based() const noexcept { return value_based_; }

 private:
  Fn complement_;
  Fn slope_;
  bool value_based_ = false;
};

struct FixedPointConfig {
  double tolerance = 1e-14;
  int max_iterations = 10'000;

  void validate() const;
};

struct MomentRequest {
  int order = 2;
  double target_relative_error = 1e-8;

  void validate() const;
};

/// One-sided Richardson differentiation of a transform at w = 0.
struct DifferentiationScheme {
  /// Initial step h0 = initial_step_factor / (first-moment estimate).
  double initial_step_factor = 0.1;
  /// Maximum number of step halvings in the Richardson table.
  int max_depth = 8;
};

struct MomentEstimate {
  double value = 0.0;
  /// Richardson error estimate, absolute.
  double error = 0.0;
};

/// Busy-period transform pi(w): the minimal root of pi = beta(w + lambda (1 - pi)).
///
/// Iterates in complement form c = 1 - pi, c <- 1 - beta(w + lambda c), from
/// c = 1 (pi = 0). The map is increasing and concave in c, so the sequence
/// decreases monotonically onto the root nearest 1, which is the minimal
/// pi. When `beta` carries a slope the iteration switches to Newton steps,
/// which stay on the same side of the root by concavity.
double busy_period_lst(const Lst& beta, double lambda, double omega,
                       const FixedPointConfig& cfg = {});

/// 1 - pi(w) computed without cancellation.
double busy_period_complement(const Lst& beta, double lambda, double omega,
                              const FixedPointConfig& cfg = {});

/// The busy period as a transform in its own right. Its slope comes from
/// implicit differentiation of the fixed-point equation when `beta` has one.
Lst busy_period(Lst beta, double lambda, FixedPointConfig cfg = {});

/// (1 - X(w)) / (w E(X)), the transform of the residual lifetime of X.
///
/// Below `threshold` (default 1e-6 / mean_x) the value is interpolated
/// linearly between the limit 1 at w = 0 and the quotient at the threshold,
/// which reproduces 1 - w E(X^2) / (2 E(X)) to first order.
double residual_lst(const Lst& x, double mean_x, double omega,
                    std::optional<double> threshold = std::nullopt);

Lst residual(Lst x, double mean_x);

/// Evaluates numerator(w) / denominator(w) where both vanish at w = 0.
///
/// At or above `threshold` the plain quotient is returned. Below it the
/// value is interpolated linearly between `limit` (the analytic value at
/// w = 0) and the quotient at the threshold. If `limit` is empty it is
/// estimated from second-order one-sided difference quotients of both parts.
double safe_ratio(const std::function<double(double)>& numerator,
                  const std::function<double(double)>& denominator, double omega,
                  double threshold, std::optional<double> limit = 1.0);

/// Raw moments E(X^k), k = 1..order, from derivatives of the transform at 0.
std::vector<double> lst_moments(const Lst& f, const MomentRequest& req = {},
                                const DifferentiationScheme& scheme = {});

/// Single moment with its error estimate; throws AccuracyError when the
/// estimate misses the target.
MomentEstimate lst_moment(const Lst& f, int order, double target_relative_error = 1e-8,
                          const DifferentiationScheme& scheme = {});

}  // namespace pollingkit
