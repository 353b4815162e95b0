#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "pollingkit/errors.hpp"

namespace pollingkit::cli {

using nlohmann::json;

namespace {

std::string child(const std::string& pointer, const std::string& key) {
  return pointer + "/" + key;
}

const json& require(const json& j, const std::string& pointer, const std::string& key) {
  if (!j.is_object()) throw SchemaError(pointer, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(pointer, key), "missing required field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& pointer) {
  if (!j.is_number()) throw SchemaError(pointer, "expected a number");
  return j.get<double>();
}

double require_number(const json& j, const std::string& pointer, const std::string& key) {
  return number(require(j, pointer, key), child(pointer, key));
}

template <class T>
std::optional<T> optional_integer(const json& j, const std::string& pointer,
                                  const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (!it->is_number_integer()) throw SchemaError(child(pointer, key), "expected an integer");
  return it->get<T>();
}

std::optional<std::string> optional_string(const json& j, const std::string& pointer,
                                           const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(child(pointer, key), "expected a string");
  return it->get<std::string>();
}

// Factories reject bad parameters with DomainError; report them against the field's JSON pointer.
template <class F>
Distribution build(const std::string& pointer, F&& make) {
  try {
    return make();
  } catch (const DomainError& e) {
    throw ValidationError(pointer, e.what());
  }
}

void positive(double value, const std::string& pointer, const char* what) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw ValidationError(pointer, std::string(what) + " must be positive");
  }
}

ThresholdGrid make_grid(double t_min, double t_max, double step, const std::string& pointer) {
  positive(t_min, pointer + "/t_min", "t_min");
  positive(step, pointer + "/step", "step");
  if (!(std::isfinite(t_max) && t_max >= t_min)) {
    throw ValidationError(pointer + "/t_max", "t_max must be >= t_min");
  }
  return {t_min, t_max, step};
}

}  // namespace

std::size_t ThresholdGrid::size() const {
  return static_cast<std::size_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
}

double ThresholdGrid::at(std::size_t i) const {
  // Snap to 12 significant digits so accumulated rounding never shows in output.
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", t_min + static_cast<double>(i) * step);
  return std::strtod(buf, nullptr);
}

ThresholdGrid parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw SchemaError("--grid", "grid must be min:max:step with numeric parts, got '" + text + "'");
    }
  }
  if (parts.size() != 3) {
    throw SchemaError("--grid", "grid must be min:max:step, got '" + text + "'");
  }
  return make_grid(parts[0], parts[1], parts[2], "--grid");
}

Distribution parse_distribution(const json& j, const std::string& pointer) {
  if (!j.is_object()) throw SchemaError(pointer, "expected a distribution object");
  const json& kind_json = require(j, pointer, "kind");
  if (!kind_json.is_string()) throw SchemaError(child(pointer, "kind"), "expected a string");
  const std::string kind = kind_json.get<std::string>();

  if (kind == "exponential") {
    // Either a rate or a mean.
    if (j.contains("mean")) {
      const double mean = require_number(j, pointer, "mean");
      positive(mean, child(pointer, "mean"), "mean");
      return build(pointer, [&] { return Distribution::exponential(1.0 / mean); });
    }
    const double rate = require_number(j, pointer, "rate");
    return build(child(pointer, "rate"), [&] { return Distribution::exponential(rate); });
  }
  if (kind == "deterministic") {
    const double value = require_number(j, pointer, "value");
    return build(child(pointer, "value"), [&] { return Distribution::deterministic(value); });
  }
  if (kind == "truncated_exponential") {
    const double rate = require_number(j, pointer, "rate");
    const double upper = require_number(j, pointer, "upper");
    return build(pointer, [&] { return Distribution::truncated_exponential(rate, upper); });
  }
  if (kind == "shifted_exponential") {
    const double shift = require_number(j, pointer, "shift");
    const double rate = require_number(j, pointer, "rate");
    return build(pointer, [&] { return Distribution::shifted_exponential(shift, rate); });
  }
  if (kind == "mixture") {
    const json& weights_json = require(j, pointer, "weights");
    const json& comps_json = require(j, pointer, "components");
    if (!weights_json.is_array()) throw SchemaError(child(pointer, "weights"), "expected an array");
    if (!comps_json.is_array()) {
      throw SchemaError(child(pointer, "components"), "expected an array");
    }
    std::vector<double> weights;
    for (std::size_t i = 0; i < weights_json.size(); ++i) {
      weights.push_back(number(weights_json[i], child(pointer, "weights/" + std::to_string(i))));
    }
    std::vector<Distribution> comps;
    for (std::size_t i = 0; i < comps_json.size(); ++i) {
      comps.push_back(
          parse_distribution(comps_json[i], child(pointer, "components/" + std::to_string(i))));
    }
    return build(pointer, [&] { return Distribution::mixture(weights, comps); });
  }
  throw SchemaError(child(pointer, "kind"), "unknown distribution kind '" + kind + "'");
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw SchemaError("", "scenario must be a JSON object");
  Scenario s;

  const json& disc = require(j, "", "discipline");
  if (!disc.is_string()) throw SchemaError("/discipline", "expected a string");
  try {
    s.discipline = parse_discipline(disc.get<std::string>());
  } catch (const DomainError& e) {
    throw SchemaError("/discipline", e.what());
  }
  if (auto it = j.find("preemptive"); it != j.end()) {
    if (!it->is_boolean()) throw SchemaError("/preemptive", "expected a boolean");
    s.preemptive = it->get<bool>();
  }

  const json& q1 = require(j, "", "queue_1");
  if (q1.contains("high") || q1.contains("low")) {
    const json& high = require(q1, "/queue_1", "high");
    const json& low = require(q1, "/queue_1", "low");
    PollingModel m{
        require_number(high, "/queue_1/high", "arrival_rate"),
        require_number(low, "/queue_1/low", "arrival_rate"),
        0.0,
        parse_distribution(require(high, "/queue_1/high", "service"), "/queue_1/high/service"),
        parse_distribution(require(low, "/queue_1/low", "service"), "/queue_1/low/service"),
        Distribution::exponential(1.0),
        Distribution::exponential(1.0),
        Distribution::exponential(1.0),
        s.discipline,
    };
    s.explicit_model = m;
  } else {
    s.lambda_1 = require_number(q1, "/queue_1", "arrival_rate");
    s.base_service_1 = parse_distribution(require(q1, "/queue_1", "service"), "/queue_1/service");
    if (!std::holds_alternative<Exponential>(s.base_service_1->kind())) {
      throw ValidationError("/queue_1/service",
                            "threshold priorities need an exponential queue-1 service");
    }
    if (q1.contains("threshold")) {
      s.threshold = require_number(q1, "/queue_1", "threshold");
      positive(*s.threshold, "/queue_1/threshold", "threshold");
    }
  }

  const json& q2 = require(j, "", "queue_2");
  s.lambda_2 = require_number(q2, "/queue_2", "arrival_rate");
  s.service_2 = parse_distribution(require(q2, "/queue_2", "service"), "/queue_2/service");
  s.switch_1 = parse_distribution(require(j, "", "switch_1"), "/switch_1");
  s.switch_2 = parse_distribution(require(j, "", "switch_2"), "/switch_2");

  if (auto it = j.find("sweep"); it != j.end()) {
    if (!s.threshold_form()) {
      throw ValidationError("/sweep", "a threshold sweep needs the threshold form of queue_1");
    }
    s.sweep = make_grid(require_number(*it, "/sweep", "t_min"),
                        require_number(*it, "/sweep", "t_max"),
                        require_number(*it, "/sweep", "step"), "/sweep");
  }

  if (auto it = j.find("simulation"); it != j.end()) {
    if (!it->is_object()) throw SchemaError("/simulation", "expected an object");
    SimulationSettings& sim = s.simulation;
    sim.seed = optional_integer<std::uint64_t>(*it, "/simulation", "seed").value_or(sim.seed);
    sim.warmup_customers = optional_integer<std::int64_t>(*it, "/simulation", "warmup_customers")
                               .value_or(sim.warmup_customers);
    sim.measured_customers =
        optional_integer<std::int64_t>(*it, "/simulation", "measured_customers")
            .value_or(sim.measured_customers);
    sim.replications =
        optional_integer<int>(*it, "/simulation", "replications").value_or(sim.replications);
    if (sim.warmup_customers < 0) {
      throw ValidationError("/simulation/warmup_customers", "must be >= 0");
    }
    if (sim.measured_customers < 1) {
      throw ValidationError("/simulation/measured_customers", "must be >= 1");
    }
    if (sim.replications < 1) throw ValidationError("/simulation/replications", "must be >= 1");
  }

  if (auto it = j.find("outputs"); it != j.end()) {
    if (!it->is_object()) throw SchemaError("/outputs", "expected an object");
    s.outputs.report = optional_string(*it, "/outputs", "report");
    s.outputs.csv = optional_string(*it, "/outputs", "csv");
    s.outputs.simulation = optional_string(*it, "/outputs", "simulation");
    s.outputs.comparison = optional_string(*it, "/outputs", "comparison");
    s.outputs.event_log = optional_string(*it, "/outputs", "event_log");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot read scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

PollingModel Scenario::model_at(double t) const {
  if (!threshold_form()) {
    throw ValidationError("/queue_1", "a threshold applies only to the threshold form of queue_1");
  }
  positive(t, "/queue_1/threshold", "threshold");
  return threshold_model(*lambda_1, *base_service_1, lambda_2, *service_2, *switch_1, *switch_2, t,
                         discipline);
}

PollingModel Scenario::model() const {
  if (threshold_form()) {
    if (!threshold) {
      throw ValidationError("/queue_1/threshold",
                            "this command needs a threshold for the queue-1 split");
    }
    return model_at(*threshold);
  }
  PollingModel m = *explicit_model;
  m.lambda_2 = lambda_2;
  m.service_2 = *service_2;
  m.switch_1 = *switch_1;
  m.switch_2 = *switch_2;
  m.discipline = discipline;
  return m;
}

PollingModel Scenario::model_without_priorities() const {
  if (threshold_form()) {
    return PollingModel{*lambda_1,  0.0,        lambda_2,   *base_service_1, *base_service_1,
                        *service_2, *switch_1, *switch_2, discipline};
  }
  return without_priorities(model());
}

}  // namespace pollingkit::cli
