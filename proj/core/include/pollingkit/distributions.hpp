#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pollingkit/transforms.hpp"

namespace pollingkit {

using Rng = std::mt19937_64;

class Distribution;

struct Exponential {
  double rate;
};

struct Deterministic {
  double value;
};

/// Exponential(rate) conditioned on a value below `upper`.
struct TruncatedExponential {
  double rate;
  double upper;
};

/// shift + Exponential(rate).
struct ShiftedExponential {
  double shift;
  double rate;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<Distribution> components;
};

/// A nonnegative service or switch-over time with closed-form transform,
/// moments up to order three and an inverse-transform sampler.
///
/// Instances are immutable; construct them through the named factories,
/// which reject invalid parameters with DomainError.
class Distribution {
 public:
  using Kind = std::variant<Exponential, Deterministic, TruncatedExponential,
                            ShiftedExponential, Mixture>;

  static Distribution exponential(double rate);
  static Distribution deterministic(double value);
  static Distribution truncated_exponential(double rate, double upper);
  static Distribution shifted_exponential(double shift, double rate);
  static Distribution mixture(std::vector<double> weights, std::vector<Distribution> components);

  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;

  /// E[exp(-w X)].
  double lst(double omega) const;
  /// 1 - E[exp(-w X)], accurate for small w.
  double lst_complement(double omega) const;
  /// E[X exp(-w X)].
  double lst_slope(double omega) const;

  /// E(X^k) for k = 1..3.
  double moment(int k) const;
  double mean() const { return moment(1); }
  /// Closed-form moments for k = 1..order, order <= 3.
  std::vector<double> moments(int order) const;

  double sample(Rng& rng) const;

  /// The transform as a generic Lst (complement and slope attached).
  Lst transform() const;

 private:
  explicit Distribution(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Uniform draw in the open interval (0, 1) from the top 53 bits of one
/// engine output, so sequences are reproducible across standard libraries.
double uniform_open(Rng& rng);

/// Threshold priority: jobs of an exponential base class with service below
/// `threshold` form the high-priority class, the rest the low-priority class.
struct ThresholdSplit {
  double lambda_high;
  Distribution service_high;
  double lambda_low;
  Distribution service_low;
  double threshold;
};

/// Splits Poisson(lambda1) jobs with Exponential(rate) service at `threshold`.
/// By memorylessness the low class is shift-by-threshold exponential.
ThresholdSplit split_by_threshold(const Distribution& base, double lambda1, double threshold);

}  // namespace pollingkit
