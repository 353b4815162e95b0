#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pollingkit/analysis.hpp"
#include "pollingkit/simulator.hpp"
#include "scenario.hpp"

namespace pollingkit::cli {

/// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kSchema = 2,
  kValidation = 3,
  kNumeric = 4,
  kCompareFailed = 5,
};

/// Command-line overrides applied on top of the scenario file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;
  std::optional<std::string> discipline;
  bool preemptive = false;
  std::optional<std::string> event_log;
};

/// Loads the scenario and applies the discipline and preemption overrides.
Scenario prepared_scenario(const std::string& path, const Overrides& overrides);

/// Validates a model, throwing ValidationError naming the first violated field.
void require_stable(const PollingModel& model);

struct SweepRow {
  double t;
  double lambda_high;
  double lambda_low;
  double mean_wait_high;
  double mean_wait_low;
  double mean_wait_1_weighted;
  double mean_wait_1_no_priority;
  double mean_wait_2;
  double std_wait_high;
  double std_wait_low;
  double std_wait_1_weighted;
  double std_wait_1_no_priority;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Grid indices of the smallest weighted mean and standard deviation;
  /// ties go to the smaller threshold.
  std::size_t argmin_mean = 0;
  std::size_t argmin_std = 0;
};

/// A grid point whose analysis failed. `cause` carries the original error.
class SweepRowError : public std::runtime_error {
 public:
  SweepRowError(double t, std::exception_ptr cause, const std::string& message)
      : std::runtime_error(message), t_(t), cause_(std::move(cause)) {}
  double t() const noexcept { return t_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  double t_;
  std::exception_ptr cause_;
};

/// Index of the first smallest value of `field`.
std::size_t first_argmin(const std::vector<SweepRow>& rows, double SweepRow::*field);

/// Analyzes every grid threshold, rows in parallel and returned in grid order.
/// The no-priority columns come from the unsplit model and are identical
/// across rows.
SweepResult sweep(const Scenario& scenario, const ThresholdGrid& grid);

extern const char* const kSweepHeader;
/// Header plus one `%.12g` row per threshold.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const PerformanceReport& report);
nlohmann::json to_json(const SimulationEstimate& estimate);
nlohmann::json to_json(const Comparison& comparison);

SimConfig simulation_config(const Scenario& scenario, const PollingModel& model);

int run_analyze(const std::string& scenario_path, const Overrides& overrides, std::ostream& out);
int run_sweep(const std::string& scenario_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
int run_simulate(const std::string& scenario_path, const Overrides& overrides, std::ostream& out);
int run_compare(const std::string& scenario_path, const Overrides& overrides, std::ostream& out);

/// Maps an in-flight exception to an exit code and writes a one-line JSON
/// diagnostic to `err`.
int report_failure(std::exception_ptr error, std::ostream& err);

}  // namespace pollingkit::cli
