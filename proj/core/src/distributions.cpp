#include "pollingkit/distributions.hpp"

#include <cmath>
#include <numeric>
#include <type_traits>

#include "pollingkit/errors.hpp"

namespace pollingkit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Regularized lower incomplete gamma P(n, a) for integer n >= 1.
double lower_gamma_regularized(int n, double a) {
  if (a <= 0.0) return 0.0;
  if (a < n + 1.0) {
    // e^{-a} sum_{j >= n} a^j / j!, all terms positive.
    double term = std::exp(-a);
    for (int j = 1; j <= n; ++j) term *= a / j;
    double sum = 0.0;
    for (int j = n; j < n + 200; ++j) {
      sum += term;
      term *= a / (j + 1);
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  double term = 1.0;
  double partial = 1.0;
  for (int j = 1; j < n; ++j) {
    term *= a / j;
    partial += term;
  }
  return 1.0 - std::exp(-a) * partial;
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

Distribution Distribution::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive");
  return Distribution(Exponential{rate});
}

Distribution Distribution::deterministic(double value) {
  require(std::isfinite(value) && value > 0.0, "deterministic value must be positive");
  return Distribution(Deterministic{value});
}

Distribution Distribution::truncated_exponential(double rate, double upper) {
  require(std::isfinite(rate) && rate > 0.0, "truncated exponential rate must be positive");
  require(std::isfinite(upper) && upper > 0.0, "truncation bound must be positive");
  return Distribution(TruncatedExponential{rate, upper});
}

Distribution Distribution::shifted_exponential(double shift, double rate) {
  require(std::isfinite(shift) && shift >= 0.0, "shift must be nonnegative");
  require(std::isfinite(rate) && rate > 0.0, "shifted exponential rate must be positive");
  return Distribution(ShiftedExponential{shift, rate});
}

Distribution Distribution::mixture(std::vector<double> weights,
                                   std::vector<Distribution> components) {
  require(!weights.empty() && weights.size() == components.size(),
          "mixture needs one weight per component");
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "mixture weights must be >= 0");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-12, "mixture weights must sum to 1");
  return Distribution(Mixture{std::move(weights), std::move(components)});
}

std::string Distribution::kind_name() const {
  return std::visit(Overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Deterministic&) { return std::string("deterministic"); },
                        [](const TruncatedExponential&) {
                          return std::string("truncated_exponential");
                        },
                        [](const ShiftedExponential&) {
                          return std::string("shifted_exponential");
                        },
                        [](const Mixture&) { return std::string("mixture"); },
                    },
                    kind_);
}

double Distribution::lst_complement(double w) const {
  if (w < 0.0) throw DomainError("transform evaluated at negative argument");
  return std::visit(
      Overloaded{
          [w](const Exponential& d) { return w / (d.rate + w); },
          [w](const Deterministic& d) { return -std::expm1(-w * d.value); },
          [w](const TruncatedExponential& d) {
            // [w (1 - E) - mu E (1 - e^{-w t})] / [(mu + w)(1 - E)], E = e^{-mu t}
            const double mass = -std::expm1(-d.rate * d.upper);
            const double e = std::exp(-d.rate * d.upper);
            const double num = w * mass - d.rate * e * (-std::expm1(-w * d.upper));
            return num / ((d.rate + w) * mass);
          },
          [w](const ShiftedExponential& d) {
            return -std::expm1(-w * d.shift) + std::exp(-w * d.shift) * w / (d.rate + w);
          },
          [w](const Mixture& d) {
            double c = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              c += d.weights[i] * d.components[i].lst_complement(w);
            }
            return c;
          },
      },
      kind_);
}

double Distribution::lst(double w) const {
  if (w < 0.0) throw DomainError("transform evaluated at negative argument");
  return std::visit(
      Overloaded{
          [w](const Exponential& d) { return d.rate / (d.rate + w); },
          [w](const Deterministic& d) { return std::exp(-w * d.value); },
          [w](const TruncatedExponential& d) {
            const double nu = d.rate + w;
            return d.rate * (-std::expm1(-nu * d.upper)) /
                   (nu * (-std::expm1(-d.rate * d.upper)));
          },
          [w](const ShiftedExponential& d) {
            return std::exp(-w * d.shift) * d.rate / (d.rate + w);
          },
          [w](const Mixture& d) {
            double v = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              v += d.weights[i] * d.components[i].lst(w);
            }
            return v;
          },
      },
      kind_);
}

double Distribution::lst_slope(double w) const {
  if (w < 0.0) throw DomainError("transform evaluated at negative argument");
  return std::visit(
      Overloaded{
          [w](const Exponential& d) { return d.rate / ((d.rate + w) * (d.rate + w)); },
          [w](const Deterministic& d) { return d.value * std::exp(-w * d.value); },
          [w](const TruncatedExponential& d) {
            const double nu = d.rate + w;
            return d.rate * lower_gamma_regularized(2, nu * d.upper) /
                   (nu * nu * (-std::expm1(-d.rate * d.upper)));
          },
          [w](const ShiftedExponential& d) {
            const double nu = d.rate + w;
            return std::exp(-w * d.shift) * d.rate * (d.shift / nu + 1.0 / (nu * nu));
          },
          [w](const Mixture& d) {
            double v = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              v += d.weights[i] * d.components[i].lst_slope(w);
            }
            return v;
          },
      },
      kind_);
}

double Distribution::moment(int k) const {
  if (k < 1 || k > 3) throw DomainError("moments are available for orders 1..3");
  return std::visit(
      Overloaded{
          [k](const Exponential& d) { return factorial(k) / std::pow(d.rate, k); },
          [k](const Deterministic& d) { return std::pow(d.value, k); },
          [k](const TruncatedExponential& d) {
            const double a = d.rate * d.upper;
            return factorial(k) / std::pow(d.rate, k) * lower_gamma_regularized(k + 1, a) /
                   (-std::expm1(-a));
          },
          [k](const ShiftedExponential& d) {
            // E(shift + Y)^k = sum_j C(k, j) shift^{k-j} j! / rate^j
            double m = 0.0;
            double binom = 1.0;
            for (int j = 0; j <= k; ++j) {
              m += binom * std::pow(d.shift, k - j) * factorial(j) / std::pow(d.rate, j);
              binom = binom * (k - j) / (j + 1);
            }
            return m;
          },
          [k](const Mixture& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              m += d.weights[i] * d.components[i].moment(k);
            }
            return m;
          },
      },
      kind_);
}

std::vector<double> Distribution::moments(int order) const {
  if (order < 1 || order > 3) throw DomainError("moments are available for orders 1..3");
  std::vector<double> out;
  for (int k = 1; k <= order; ++k) out.push_back(moment(k));
  return out;
}

double Distribution::sample(Rng& rng) const {
  return std::visit(
      Overloaded{
          [&rng](const Exponential& d) { return -std::log(uniform_open(rng)) / d.rate; },
          [](const Deterministic& d) { return d.value; },
          [&rng](const TruncatedExponential& d) {
            const double mass = -std::expm1(-d.rate * d.upper);
            const double x = -std::log1p(-uniform_open(rng) * mass) / d.rate;
            return x < d.upper ? x : std::nextafter(d.upper, 0.0);
          },
          [&rng](const ShiftedExponential& d) {
            return d.shift - std::log(uniform_open(rng)) / d.rate;
          },
          [&rng](const Mixture& d) {
            const double u = uniform_open(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < d.weights.size(); ++i) {
              acc += d.weights[i];
              if (u < acc) return d.components[i].sample(rng);
            }
            return d.components.back().sample(rng);
          },
      },
      kind_);
}

Lst Distribution::transform() const {
  return Lst::from_complement([self = *this](double w) { return self.lst_complement(w); },
                              [self = *this](double w) { return self.lst_slope(w); });
}

ThresholdSplit split_by_threshold(const Distribution& base, double lambda1, double threshold) {
  const auto* exp = std::get_if<Exponential>(&base.kind());
  if (exp == nullptr) {
    throw DomainError("threshold split is only supported for exponential service, got " +
                      base.kind_name());
  }
  require(std::isfinite(threshold) && threshold > 0.0, "threshold must be positive");
  require(std::isfinite(lambda1) && lambda1 > 0.0, "arrival rate must be positive");
  const double below = -std::expm1(-exp->rate * threshold);
  const double above = std::exp(-exp->rate * threshold);
  return ThresholdSplit{
      lambda1 * below,
      Distribution::truncated_exponential(exp->rate, threshold),
      lambda1 * above,
      Distribution::shifted_exponential(threshold, exp->rate),
      threshold,
  };
}

}  // namespace pollingkit
