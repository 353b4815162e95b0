#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace pollingkit::cli;

int main(int argc, char** argv) {
  CLI::App app{"Two-queue polling system with priorities: analysis, sweeps and simulation"};
  app.require_subcommand(1);

  std::string scenario;
  Overrides overrides;
  std::string out;
  std::string grid;
  std::string discipline;
  std::string event_log;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "Scenario JSON file")->required();
    cmd->add_option("--out", out, "Output file");
    cmd->add_option("--discipline", discipline, "gated, globally-gated or exhaustive");
    cmd->add_flag("--preemptive", overrides.preemptive,
                  "High-priority arrivals preempt low-priority service (exhaustive only)");
  };

  auto* analyze = app.add_subcommand("analyze", "Exact performance report");
  add_common(analyze);
  auto* sweep = app.add_subcommand("sweep", "Threshold sweep as CSV");
  add_common(sweep);
  sweep->add_option("--grid", grid, "Threshold grid min:max:step");
  auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation");
  add_common(simulate);
  auto* compare = app.add_subcommand("compare", "Analysis against simulation z-scores");
  add_common(compare);
  for (auto* cmd : {simulate, compare}) {
    cmd->add_option("--seed", seed, "Base seed for replication streams");
  }
  simulate->add_option("--event-log", event_log, "CSV event trace of replication 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure(std::make_exception_ptr(SchemaError("argv", e.what())), std::cerr);
  }

  auto set = [](std::optional<std::string>& field, const std::string& value) {
    if (!value.empty()) field = value;
  };
  set(overrides.out, out);
  set(overrides.grid, grid);
  set(overrides.discipline, discipline);
  set(overrides.event_log, event_log);
  for (auto* cmd : {simulate, compare}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) overrides.seed = seed;
  }

  try {
    if (analyze->parsed()) return run_analyze(scenario, overrides, std::cout);
    if (sweep->parsed()) return run_sweep(scenario, overrides, std::cout, std::cerr);
    if (simulate->parsed()) return run_simulate(scenario, overrides, std::cout);
    return run_compare(scenario, overrides, std::cout);
  } catch (...) {
    return report_failure(std::current_exception(), std::cerr);
  }
}
