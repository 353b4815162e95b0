#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pollingkit/concurrency.hpp"
#include "pollingkit/errors.hpp"

namespace pollingkit::cli {

using nlohmann::json;

const char* const kSweepHeader =
    "t,lambda_H,lambda_L,EW_H,EW_L,EW_1_weighted,EW_1_nopriority,EW_2,sd_WH,sd_WL,"
    "sd_W1_weighted,sd_W1_nopriority";

namespace {

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("--out", "cannot write '" + path + "'");
  return file;
}

void write_json_file(const std::string& path, const json& j) {
  auto file = open_output(path);
  file << j.dump(2) << '\n';
}

const char* anchor_name(CycleAnchor a) {
  switch (a) {
    case CycleAnchor::Queue1Begin:
      return "queue_1_visit_beginning";
    case CycleAnchor::Queue1End:
      return "queue_1_visit_completion";
    case CycleAnchor::Queue2Begin:
      return "queue_2_visit_beginning";
    case CycleAnchor::Queue2End:
      return "queue_2_visit_completion";
  }
  return "";
}

json class_json(const ClassMetrics& c) {
  return {{"arrival_rate", c.arrival_rate},
          {"mean_service", c.mean_service},
          {"mean_wait", c.mean_wait},
          {"mean_wait_transform", c.mean_wait_transform},
          {"second_moment_wait", c.second_moment},
          {"std_wait", c.std_wait},
          {"mean_queue_length", c.mean_queue_length}};
}

json estimate_json(const Estimate& e) {
  if (!e.available) return nullptr;
  return {{"value", e.value}, {"standard_error", e.standard_error}};
}

json class_estimate_json(const ClassEstimate& c) {
  return {{"served", c.served},
          {"mean_wait", estimate_json(c.mean_wait)},
          {"second_moment_wait", estimate_json(c.wait_second_moment)},
          {"std_wait", estimate_json(c.std_wait)}};
}

PerformanceReport analyze_model(const PollingModel& model, bool preemptive,
                                bool include_no_priority = true) {
  require_stable(model);
  const ModelTransforms mt(model);
  ReportOptions options;
  options.preemptive_high = preemptive;
  options.include_no_priority = include_no_priority;
  return report(mt, options);
}

void print_summary(std::ostream& out, const PerformanceReport& r) {
  out << "discipline " << to_string(r.discipline) << (r.preemptive_high ? " (preemptive)" : "")
      << ", rho " << format_g12(r.derived.rho) << ", E(C) " << format_g12(r.cycle_mean) << '\n';
  out << std::left << std::setw(22) << "class" << std::setw(20) << "E(W)" << std::setw(20)
      << "sd(W)" << "E(N)\n";
  auto row = [&](const char* name, const ClassMetrics& c) {
    out << std::setw(22) << name << std::setw(20) << format_g12(c.mean_wait) << std::setw(20)
        << format_g12(c.std_wait) << format_g12(c.mean_queue_length) << '\n';
  };
  row("high", r.high);
  row("low", r.low);
  row("queue_1_weighted", r.queue_1);
  row("queue_1_no_priority", r.queue_1_no_priority);
  row("queue_2", r.queue_2);
}

void print_comparison(std::ostream& out, const Comparison& c) {
  out << std::left << std::setw(26) << "quantity" << std::setw(20) << "analysis" << std::setw(20)
      << "simulation" << std::setw(20) << "std_error" << "z\n";
  for (const auto& d : c.rows) {
    out << std::setw(26) << d.quantity << std::setw(20) << format_g12(d.analysis) << std::setw(20)
        << format_g12(d.simulation) << std::setw(20) << format_g12(d.standard_error)
        << (d.skipped ? std::string("skipped") : format_g12(d.z)) << '\n';
  }
  out << (c.pass ? "PASS" : "FAIL") << " (|z| < " << c.z_limit << ")\n";
}

}  // namespace

Scenario prepared_scenario(const std::string& path, const Overrides& overrides) {
  Scenario s = load_scenario(path);
  if (overrides.discipline) {
    try {
      s.discipline = parse_discipline(*overrides.discipline);
    } catch (const DomainError& e) {
      throw SchemaError("--discipline", e.what());
    }
  }
  if (overrides.preemptive) s.preemptive = true;
  if (s.preemptive && s.discipline != Discipline::Exhaustive) {
    throw ValidationError("preemptive", "preemptive resume requires exhaustive service");
  }
  if (overrides.seed) s.simulation.seed = *overrides.seed;
  return s;
}

void require_stable(const PollingModel& model) {
  const auto violations = validate(model);
  if (!violations.empty()) {
    throw ValidationError(violations.front().field, violations.front().message);
  }
}

SweepResult sweep(const Scenario& scenario, const ThresholdGrid& grid) {
  if (!scenario.threshold_form()) {
    throw ValidationError("/queue_1", "a threshold sweep needs the threshold form of queue_1");
  }
  const PerformanceReport reference =
      analyze_model(scenario.model_without_priorities(), false);
  const ClassMetrics& np = reference.high;

  SweepResult result;
  const std::size_t n = grid.size();
  result.rows.resize(n);
  std::vector<std::exception_ptr> failures(n);
  // Keep going past failures so the smallest failing t is reported whatever
  // the completion order.
  parallel_for(n, [&](std::size_t i) {
    const double t = grid.at(i);
    try {
      const PerformanceReport r = analyze_model(scenario.model_at(t), scenario.preemptive, false);
      result.rows[i] = SweepRow{t,
                                r.high.arrival_rate,
                                r.low.arrival_rate,
                                r.high.mean_wait,
                                r.low.mean_wait,
                                r.queue_1.mean_wait,
                                np.mean_wait,
                                r.queue_2.mean_wait,
                                r.high.std_wait,
                                r.low.std_wait,
                                r.queue_1.std_wait,
                                np.std_wait};
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw SweepRowError(grid.at(i), failures[i],
                        "sweep failed at t=" + format_g12(grid.at(i)) + ": " + what);
  }

  result.argmin_mean = first_argmin(result.rows, &SweepRow::mean_wait_1_weighted);
  result.argmin_std = first_argmin(result.rows, &SweepRow::std_wait_1_weighted);
  return result;
}

std::size_t first_argmin(const std::vector<SweepRow>& rows, double SweepRow::*field) {
  std::size_t best = 0;
  // Strict comparison keeps the earliest, smallest-t row on ties.
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].*field < rows[best].*field) best = i;
  }
  return best;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    const double fields[] = {r.t,
                             r.lambda_high,
                             r.lambda_low,
                             r.mean_wait_high,
                             r.mean_wait_low,
                             r.mean_wait_1_weighted,
                             r.mean_wait_1_no_priority,
                             r.mean_wait_2,
                             r.std_wait_high,
                             r.std_wait_low,
                             r.std_wait_1_weighted,
                             r.std_wait_1_no_priority};
    bool first = true;
    for (double v : fields) {
      if (!first) out << ',';
      out << format_g12(v);
      first = false;
    }
    out << '\n';
  }
}

json to_json(const PerformanceReport& r) {
  const auto& d = r.derived;
  json checks = json::array();
  for (const auto& c : r.cross_checks) {
    checks.push_back({{"quantity", c.quantity},
                      {"closed_form", c.closed_form},
                      {"transform", c.transform},
                      {"relative_difference", c.relative_difference}});
  }
  return {
      {"discipline", to_string(r.discipline)},
      {"preemptive_high", r.preemptive_high},
      {"load",
       {{"lambda_1", d.lambda_1},
        {"rho_high", d.rho_high},
        {"rho_low", d.rho_low},
        {"rho_1", d.rho_1},
        {"rho_2", d.rho_2},
        {"rho", d.rho}}},
      {"classes",
       {{"high", class_json(r.high)},
        {"low", class_json(r.low)},
        {"queue_1_weighted", class_json(r.queue_1)},
        {"queue_1_no_priority", class_json(r.queue_1_no_priority)},
        {"queue_2", class_json(r.queue_2)}}},
      {"cycle",
       {{"anchor", anchor_name(r.cycle_anchor)},
        {"mean", r.cycle_mean},
        {"second_moment", r.cycle_second_moment},
        {"residual_mean_visit_beginning", r.residual_cycle},
        {"residual_mean_visit_completion", r.residual_cycle_completion}}},
      {"intervisit_1",
       {{"mean", r.intervisit_mean},
        {"second_moment", r.intervisit_second_moment},
        {"residual_mean", r.residual_intervisit}}},
      {"visits", {{"mean_visit_1", d.mean_visit_1}, {"mean_visit_2", d.mean_visit_2}}},
      {"cross_checks", checks},
  };
}

json to_json(const SimulationEstimate& e) {
  const auto& c = e.cycles;
  return {
      {"seed", e.seed},
      {"replications", e.replications},
      {"measured_customers", e.measured_customers},
      {"low_precision", e.low_precision},
      {"batch_means", e.batch_means},
      {"classes",
       {{"high", class_estimate_json(e.high)},
        {"low", class_estimate_json(e.low)},
        {"queue_1", class_estimate_json(e.queue_1)},
        {"queue_2", class_estimate_json(e.queue_2)}}},
      {"cycle",
       {{"cycles", c.cycles},
        {"mean_visit_beginning", estimate_json(c.mean_begin)},
        {"second_moment_visit_beginning", estimate_json(c.second_moment_begin)},
        {"mean_visit_completion", estimate_json(c.mean_end)},
        {"second_moment_visit_completion", estimate_json(c.second_moment_end)},
        {"intervisit_1_mean", estimate_json(c.intervisit_mean)},
        {"intervisit_1_second_moment", estimate_json(c.intervisit_second_moment)},
        {"queue_1_at_visit_start", estimate_json(c.queue_1_at_visit_start)}}},
  };
}

json to_json(const Comparison& c) {
  json rows = json::array();
  for (const auto& d : c.rows) {
    json row = {{"quantity", d.quantity},
                {"analysis", d.analysis},
                {"simulation", d.simulation},
                {"standard_error", d.standard_error},
                {"skipped", d.skipped}};
    row["z"] = d.skipped ? json(nullptr) : json(d.z);
    rows.push_back(row);
  }
  return {{"z_limit", c.z_limit}, {"pass", c.pass}, {"rows", rows}};
}

SimConfig simulation_config(const Scenario& scenario, const PollingModel& model) {
  SimConfig cfg{model};
  cfg.seed = scenario.simulation.seed;
  cfg.warmup_customers = scenario.simulation.warmup_customers;
  cfg.measured_customers = scenario.simulation.measured_customers;
  cfg.replications = scenario.simulation.replications;
  cfg.preemptive_high = scenario.preemptive;
  return cfg;
}

int run_analyze(const std::string& scenario_path, const Overrides& overrides, std::ostream& out) {
  const Scenario s = prepared_scenario(scenario_path, overrides);
  const PerformanceReport r = analyze_model(s.model(), s.preemptive);
  const json j = to_json(r);
  const auto path = overrides.out ? overrides.out : s.outputs.report;
  if (path) {
    write_json_file(*path, j);
    print_summary(out, r);
  } else {
    out << j.dump(2) << '\n';
  }
  return kOk;
}

int run_sweep(const std::string& scenario_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
  const Scenario s = prepared_scenario(scenario_path, overrides);
  std::optional<ThresholdGrid> grid = s.sweep;
  if (overrides.grid) grid = parse_grid(*overrides.grid);
  if (!grid) throw SchemaError("/sweep", "sweep needs a grid, from /sweep or --grid");

  const SweepResult result = sweep(s, *grid);
  const json summary = {
      {"discipline", to_string(s.discipline)},
      {"preemptive_high", s.preemptive},
      {"rows", result.rows.size()},
      {"argmin_EW_1_weighted", result.rows[result.argmin_mean].t},
      {"min_EW_1_weighted", result.rows[result.argmin_mean].mean_wait_1_weighted},
      {"argmin_sd_W1_weighted", result.rows[result.argmin_std].t},
      {"min_sd_W1_weighted", result.rows[result.argmin_std].std_wait_1_weighted},
  };
  const auto path = overrides.out ? overrides.out : s.outputs.csv;
  if (path) {
    auto file = open_output(*path);
    write_csv(file, result.rows);
    out << summary.dump() << '\n';
  } else {
    // stdout carries the CSV, so the summary goes to stderr.
    write_csv(out, result.rows);
    err << summary.dump() << '\n';
  }
  return kOk;
}

int run_simulate(const std::string& scenario_path, const Overrides& overrides, std::ostream& out) {
  const Scenario s = prepared_scenario(scenario_path, overrides);
  SimConfig cfg = simulation_config(s, s.model());
  std::ofstream log_file;
  const auto log_path = overrides.event_log ? overrides.event_log : s.outputs.event_log;
  if (log_path) {
    log_file = open_output(*log_path);
    cfg.event_log = &log_file;
  }
  const json j = to_json(run(cfg));
  const auto path = overrides.out ? overrides.out : s.outputs.simulation;
  if (path) write_json_file(*path, j);
  out << j.dump(2) << '\n';
  return kOk;
}

int run_compare(const std::string& scenario_path, const Overrides& overrides, std::ostream& out) {
  const Scenario s = prepared_scenario(scenario_path, overrides);
  const PollingModel model = s.model();
  const PerformanceReport r = analyze_model(model, s.preemptive);
  const Comparison c = compare(simulation_config(s, model), r);
  const auto path = overrides.out ? overrides.out : s.outputs.comparison;
  if (path) write_json_file(*path, to_json(c));
  print_comparison(out, c);
  return c.pass ? kOk : kCompareFailed;
}

int report_failure(std::exception_ptr error, std::ostream& err) {
  json diag;
  int code = kNumeric;
  std::optional<double> row_t;
  // Unwrap sweep failures so the code reflects the underlying cause.
  try {
    std::rethrow_exception(error);
  } catch (const SweepRowError& e) {
    row_t = e.t();
    error = e.cause();
  } catch (...) {
  }

  try {
    std::rethrow_exception(error);
  } catch (const SchemaError& e) {
    code = kSchema;
    diag = {{"error", "schema"}, {"pointer", e.pointer()}, {"message", e.what()}};
  } catch (const ValidationError& e) {
    code = kValidation;
    diag = {{"error", e.field() == "rho" ? "unstable" : "validation"},
            {"field", e.field()},
            {"message", e.what()}};
  } catch (const DisciplineMismatch& e) {
    code = kValidation;
    diag = {{"error", "validation"}, {"message", e.what()}};
  } catch (const ModelError& e) {
    code = kValidation;
    diag = {{"error", "validation"}, {"message", e.what()}};
  } catch (const DomainError& e) {
    code = kValidation;
    diag = {{"error", "validation"}, {"message", e.what()}};
  } catch (const InternalDisagreement& e) {
    diag = {{"error", "numeric"},
            {"kind", "internal_disagreement"},
            {"quantity", e.quantity()},
            {"message", e.what()}};
  } catch (const AccuracyError& e) {
    diag = {{"error", "numeric"},
            {"kind", "accuracy"},
            {"achieved_error", e.achieved_error()},
            {"message", e.what()}};
  } catch (const IterationLimitError& e) {
    diag = {{"error", "numeric"}, {"kind", "iteration_limit"}, {"message", e.what()}};
  } catch (const TruncationError& e) {
    diag = {{"error", "numeric"}, {"kind", "truncation"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    diag = {{"error", "numeric"}, {"message", e.what()}};
  } catch (...) {
    diag = {{"error", "numeric"}, {"message", "unknown error"}};
  }
  if (row_t) diag["t"] = *row_t;
  diag["exit_code"] = code;
  err << diag.dump() << '\n';
  return code;
}

}  // namespace pollingkit::cli
