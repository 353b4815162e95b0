#include "pollingkit/model.hpp"

#include <cmath>
#include <sstream>

#include "pollingkit/errors.hpp"

namespace pollingkit {

std::string to_string(Discipline d) {
  switch (d) {
    case Discipline::Gated:
      return "gated";
    case Discipline::GloballyGated:
      return "globally-gated";
    case Discipline::Exhaustive:
      return "exhaustive";
  }
  return "unknown";
}

Discipline parse_discipline(const std::string& name) {
  if (name == "gated") return Discipline::Gated;
  if (name == "globally-gated" || name == "globally_gated") return Discipline::GloballyGated;
  if (name == "exhaustive") return Discipline::Exhaustive;
  throw DomainError("unknown discipline '" + name + "'");
}

Distribution PollingModel::service_1() const {
  const double total = lambda_1();
  if (lambda_low <= 0.0 || total <= 0.0) return service_high;
  if (lambda_high <= 0.0) return service_low;
  return Distribution::mixture({lambda_high / total, lambda_low / total},
                               {service_high, service_low});
}

DerivedQuantities derive(const PollingModel& m) {
  DerivedQuantities d{};
  d.lambda_1 = m.lambda_1();
  d.rho_high = m.lambda_high * m.service_high.mean();
  d.rho_low = m.lambda_low * m.service_low.mean();
  d.rho_1 = d.rho_high + d.rho_low;
  d.rho_2 = m.lambda_2 * m.service_2.mean();
  d.rho = d.rho_1 + d.rho_2;
  d.mean_cycle = (m.switch_1.mean() + m.switch_2.mean()) / (1.0 - d.rho);
  d.mean_visit_1 = d.rho_1 * d.mean_cycle;
  d.mean_visit_2 = d.rho_2 * d.mean_cycle;
  d.mean_intervisit_1 = (1.0 - d.rho_1) * d.mean_cycle;
  d.mean_intervisit_2 = (1.0 - d.rho_2) * d.mean_cycle;
  return d;
}

std::vector<Violation> validate(const PollingModel& m) {
  std::vector<Violation> out;
  auto check_rate = [&](const char* field, double rate) {
    if (!std::isfinite(rate) || rate < 0.0) {
      std::ostringstream os;
      os << "arrival rate must be finite and >= 0, got " << rate;
      out.push_back({field, os.str()});
    }
  };
  check_rate("lambda_high", m.lambda_high);
  check_rate("lambda_low", m.lambda_low);
  check_rate("lambda_2", m.lambda_2);

  auto check_service = [&](const char* field, double rate, const Distribution& d) {
    if (rate > 0.0 && !(d.mean() > 0.0)) {
      out.push_back({field, "service time has zero mean but its class has positive rate"});
    }
  };
  check_service("service_high", m.lambda_high, m.service_high);
  check_service("service_low", m.lambda_low, m.service_low);
  check_service("service_2", m.lambda_2, m.service_2);
  if (!(m.switch_1.mean() + m.switch_2.mean() > 0.0)) {
    out.push_back({"switch", "total mean switch-over time must be positive"});
  }
  if (!out.empty()) return out;

  if (!(m.lambda_1() > 0.0)) {
    out.push_back({"lambda_1", "queue 1 needs a positive total arrival rate"});
  }
  const DerivedQuantities d = derive(m);
  if (!(d.rho < 1.0)) {
    std::ostringstream os;
    os.precision(12);
    os << "unstable: rho = " << d.rho << " >= 1";
    out.push_back({"rho", os.str()});
  }
  return out;
}

void require_valid(const PollingModel& m) {
  const auto violations = validate(m);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += " [" + v.field + "] " + v.message + ";";
  throw ModelError(msg);
}

PollingModel threshold_model(double lambda1, const Distribution& base_1, double lambda2,
                             const Distribution& service_2, const Distribution& switch_1,
                             const Distribution& switch_2, double threshold,
                             Discipline discipline) {
  const ThresholdSplit split = split_by_threshold(base_1, lambda1, threshold);
  return PollingModel{split.lambda_high, split.lambda_low, lambda2,
                      split.service_high, split.service_low, service_2,
                      switch_1, switch_2, discipline};
}

PollingModel without_priorities(const PollingModel& m) {
  PollingModel out = m;
  out.service_high = m.service_1();
  out.service_low = out.service_high;
  out.lambda_high = m.lambda_1();
  out.lambda_low = 0.0;
  return out;
}

}  // namespace pollingkit
