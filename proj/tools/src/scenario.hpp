#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pollingkit/model.hpp"

namespace pollingkit::cli {

/// Malformed scenario: bad JSON, a missing field or a value of the wrong type.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : std::runtime_error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// Well-formed scenario whose values are out of range.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ThresholdGrid {
  double t_min;
  double t_max;
  double step;

  /// Grid points t_min + i * step up to t_max, allowing for rounding at the end.
  std::size_t size() const;
  double at(std::size_t i) const;
};

/// Parses "min:max:step".
ThresholdGrid parse_grid(const std::string& text);

struct SimulationSettings {
  std::uint64_t seed = 1;
  std::int64_t warmup_customers = 100'000;
  std::int64_t measured_customers = 1'000'000;
  int replications = 10;
};

struct Outputs {
  std::optional<std::string> report;
  std::optional<std::string> csv;
  std::optional<std::string> simulation;
  std::optional<std::string> comparison;
  std::optional<std::string> event_log;
};

/// Queue 1 either splits one exponential class at a service threshold or
/// lists its two priority classes explicitly.
struct Scenario {
  Discipline discipline = Discipline::Gated;
  bool preemptive = false;

  // Threshold form.
  std::optional<double> lambda_1;
  std::optional<Distribution> base_service_1;
  std::optional<double> threshold;

  // Explicit form.
  std::optional<PollingModel> explicit_model;

  double lambda_2 = 0.0;
  std::optional<Distribution> service_2;
  std::optional<Distribution> switch_1;
  std::optional<Distribution> switch_2;

  std::optional<ThresholdGrid> sweep;
  SimulationSettings simulation;
  Outputs outputs;

  bool threshold_form() const { return lambda_1.has_value(); }

  /// The model at threshold t (threshold form only).
  PollingModel model_at(double t) const;
  /// The model at the scenario's own threshold, or the explicit model.
  PollingModel model() const;
  /// Queue 1 served as a single class, for the no-priority reference.
  PollingModel model_without_priorities() const;
};

Distribution parse_distribution(const nlohmann::json& j, const std::string& pointer);
Scenario parse_scenario(const nlohmann::json& j);
/// Reads and parses a scenario file; unreadable files and JSON syntax errors
/// are reported as SchemaError.
Scenario load_scenario(const std::string& path);

}  // namespace pollingkit::cli
