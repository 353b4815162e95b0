#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "pollingkit/analysis.hpp"
#include "pollingkit/model.hpp"

namespace pollingkit {

struct SimConfig {
  PollingModel model;
  std::uint64_t seed = 1;
  /// Served customers discarded per replication before measuring.
  std::int64_t warmup_customers = 100'000;
  /// Served customers measured per replication, all classes together.
  std::int64_t measured_customers = 1'000'000;
  int replications = 10;
  /// High-priority arrivals interrupt a low-priority service, which later
  /// resumes where it stopped. Exhaustive service only.
  bool preemptive_high = false;
  /// When set, replication 0 writes `time,event,queue,class,customer_id`
  /// records here, header first, in nondecreasing time order.
  std::ostream* event_log = nullptr;

  /// Throws DomainError, ModelError or DisciplineMismatch. A model without
  /// any arrivals is accepted and simulates switch-overs only.
  void validate() const;
};

/// A replication-level estimate; `available` is false when no sample exists.
struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double standard_error = std::numeric_limits<double>::quiet_NaN();
  bool available = false;
};

struct ClassEstimate {
  /// Customers of the class measured over all replications.
  std::int64_t served = 0;
  Estimate mean_wait;
  Estimate wait_second_moment;
  Estimate std_wait;
};

struct CycleEstimates {
  /// Cycles between successive visit beginnings at queue 1.
  Estimate mean_begin;
  Estimate second_moment_begin;
  /// Cycles between successive visit completions at queue 1.
  Estimate mean_end;
  Estimate second_moment_end;
  /// Intervisit periods of queue 1.
  Estimate intervisit_mean;
  Estimate intervisit_second_moment;
  /// Queue-1 customers present when a visit to queue 1 begins.
  Estimate queue_1_at_visit_start;
  std::int64_t cycles = 0;
};

struct SimulationEstimate {
  ClassEstimate high;
  ClassEstimate low;
  ClassEstimate queue_2;
  /// Both priority classes pooled.
  ClassEstimate queue_1;
  CycleEstimates cycles;

  std::uint64_t seed = 0;
  int replications = 0;
  std::int64_t measured_customers = 0;
  /// Fewer than 10^4 measured customers per replication.
  bool low_precision = false;
  /// Standard errors come from 10 batches of the single run when only one
  /// replication was requested.
  bool batch_means = false;
};

/// Event-driven simulation of the cyclic server. Replication r draws from a
/// generator seeded with splitmix64(seed + r); replications may run in
/// parallel and are aggregated in index order, so results do not depend on
/// scheduling.
SimulationEstimate run(const SimConfig& cfg);

/// Cycle and intervisit statistics of a simulation run.
CycleEstimates estimate_cycles(const SimConfig& cfg);

struct Discrepancy {
  std::string quantity;
  double analysis = 0.0;
  double simulation = 0.0;
  double standard_error = 0.0;
  /// (analysis - simulation) / standard_error.
  double z = 0.0;
  /// Set when the simulation has no sample for the quantity.
  bool skipped = false;
};

struct Comparison {
  std::vector<Discrepancy> rows;
  double z_limit = 4.0;
  bool pass = true;
};

/// Per-quantity z-scores of analysis against simulation. Passes iff every
/// compared |z| is below `z_limit`.
Comparison compare(const SimulationEstimate& sim, const PerformanceReport& report,
                   double z_limit = 4.0);
/// Runs the simulation for `cfg` and compares it with `report`.
Comparison compare(const SimConfig& cfg, const PerformanceReport& report, double z_limit = 4.0);

/// The splitmix64 finalizer, used to derive replication seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pollingkit
