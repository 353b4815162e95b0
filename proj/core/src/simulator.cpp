#include "pollingkit/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

#include "pollingkit/concurrency.hpp"
#include "pollingkit/errors.hpp"

namespace pollingkit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void SimConfig::validate() const {
  if (replications < 1) throw DomainError("replications must be >= 1");
  if (warmup_customers < 0) throw DomainError("warmup_customers must be >= 0");
  if (measured_customers < 1) throw DomainError("measured_customers must be >= 1");
  if (preemptive_high && model.discipline != Discipline::Exhaustive) {
    throw DisciplineMismatch("preemptive resume is only defined for exhaustive service");
  }
  std::vector<Violation> violations = pollingkit::validate(model);
  // An empty queue 1 is a legitimate, if dull, simulation input.
  std::erase_if(violations, [](const Violation& v) { return v.field == "lambda_1"; });
  if (!violations.empty()) {
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += " " + v.field + ": " + v.message + ";";
    throw ModelError(msg);
  }
}

namespace {

enum Class : int { kHigh = 0, kLow = 1, kQueue2 = 2 };
constexpr std::array<const char*, 3> kClassName = {"H", "L", "2"};
constexpr int kBatches = 10;

int queue_of(int cls) { return cls == kQueue2 ? 2 : 1; }

struct Moments {
  std::int64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double second() const { return sum_sq / static_cast<double>(n); }
};

// Statistics of one replication, or of one batch when a single replication
// is split for error estimation.
struct UnitStats {
  std::array<Moments, 3> wait;
  Moments cycle_begin;
  Moments cycle_end;
  Moments intervisit;
  Moments queue_1_at_start;
};

struct Customer {
  std::int64_t id;
  double arrival;
};

class Replication {
 public:
  Replication(const SimConfig& cfg, std::uint64_t seed, int units, std::ostream* log)
      : cfg_(cfg),
        m_(cfg.model),
        rng_(seed),
        log_(log),
        stats_(static_cast<std::size_t>(units)),
        units_(units) {
    rate_ = {m_.lambda_high, m_.lambda_low, m_.lambda_2};
    for (int c = 0; c < 3; ++c) next_arrival_[c] = draw_interarrival(c);
    count_cycles_ = rate_[0] + rate_[1] + rate_[2] == 0.0;
  }

  std::vector<UnitStats> run() {
    if (log_ != nullptr) *log_ << "time,event,queue,class,customer_id\n";
    while (!done_) {
      visit_queue_1();
      if (done_) break;
      now_ += m_.switch_1.sample(rng_);
      visit_queue_2();
      now_ += m_.switch_2.sample(rng_);
    }
    return std::move(stats_);
  }

 private:
  const Distribution& service(int c) const {
    switch (c) {
      case kHigh:
        return m_.service_high;
      case kLow:
        return m_.service_low;
      default:
        return m_.service_2;
    }
  }

  double draw_interarrival(int c) {
    if (rate_[c] <= 0.0) return INFINITY;
    return -std::log(uniform_open(rng_)) / rate_[c];
  }

  void log(double t, const char* event, int queue, const char* cls, std::int64_t id) {
    if (log_ == nullptr) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%s,%lld\n", t, event, queue, cls,
                  static_cast<long long>(id));
    *log_ << buf;
  }

  // Moves every arrival up to time t into its queue, in time order.
  void admit_until(double t) {
    for (;;) {
      int c = 0;
      for (int k = 1; k < 3; ++k) {
        if (next_arrival_[k] < next_arrival_[c]) c = k;
      }
      if (next_arrival_[c] > t) return;
      const Customer cu{next_id_++, next_arrival_[c]};
      log(cu.arrival, "arrival", queue_of(c), kClassName[c], cu.id);
      queue_[c].push_back(cu);
      next_arrival_[c] += draw_interarrival(c);
    }
  }

  bool measuring() const { return !done_ && progress_ >= cfg_.warmup_customers; }

  UnitStats& unit() {
    const std::int64_t k = (progress_ - cfg_.warmup_customers) * units_ / cfg_.measured_customers;
    return stats_[static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, units_ - 1))];
  }

  void advance() {
    ++progress_;
    if (progress_ >= cfg_.warmup_customers + cfg_.measured_customers) done_ = true;
  }

  Customer start_service(int c) {
    const Customer cu = queue_[c].front();
    queue_[c].pop_front();
    if (measuring()) unit().wait[c].add(now_ - cu.arrival);
    if (!count_cycles_) advance();
    log(now_, "service_start", queue_of(c), kClassName[c], cu.id);
    return cu;
  }

  void finish_service(int c, const Customer& cu) {
    admit_until(now_);
    log(now_, "service_end", queue_of(c), kClassName[c], cu.id);
  }

  void serve(int c) {
    const Customer cu = start_service(c);
    now_ += service(c).sample(rng_);
    finish_service(c, cu);
  }

  // A low-priority service that yields to every high-priority arrival and
  // resumes with its remaining work once no high-priority customer is left.
  void serve_low_preemptive() {
    const Customer cu = start_service(kLow);
    double remaining = m_.service_low.sample(rng_);
    while (next_arrival_[kHigh] < now_ + remaining) {
      remaining -= next_arrival_[kHigh] - now_;
      now_ = next_arrival_[kHigh];
      admit_until(now_);
      log(now_, "preempt", 1, kClassName[kLow], cu.id);
      while (!queue_[kHigh].empty()) serve(kHigh);
      log(now_, "resume", 1, kClassName[kLow], cu.id);
    }
    now_ += remaining;
    finish_service(kLow, cu);
  }

  void visit_queue_1() {
    admit_until(now_);
    if (count_cycles_) advance();
    if (measuring()) {
      UnitStats& u = unit();
      if (last_begin_ >= 0.0) u.cycle_begin.add(now_ - last_begin_);
      if (last_end_ >= 0.0) u.intervisit.add(now_ - last_end_);
      u.queue_1_at_start.add(static_cast<double>(queue_[kHigh].size() + queue_[kLow].size()));
    }
    last_begin_ = now_;
    log(now_, "visit_start", 1, "-", -1);

    switch (m_.discipline) {
      case Discipline::Gated:
      case Discipline::GloballyGated: {
        const std::size_t gated_high = queue_[kHigh].size();
        const std::size_t gated_low = queue_[kLow].size();
        if (m_.discipline == Discipline::GloballyGated) gated_2_ = queue_[kQueue2].size();
        for (std::size_t i = 0; i < gated_high && !done_; ++i) serve(kHigh);
        for (std::size_t i = 0; i < gated_low && !done_; ++i) serve(kLow);
        break;
      }
      case Discipline::Exhaustive:
        while (!done_) {
          if (!queue_[kHigh].empty()) {
            serve(kHigh);
          } else if (!queue_[kLow].empty()) {
            if (cfg_.preemptive_high) {
              serve_low_preemptive();
            } else {
              serve(kLow);
            }
          } else {
            break;
          }
        }
        break;
    }

    if (measuring() && last_end_ >= 0.0) unit().cycle_end.add(now_ - last_end_);
    last_end_ = now_;
    log(now_, "visit_end", 1, "-", -1);
  }

  void visit_queue_2() {
    admit_until(now_);
    log(now_, "visit_start", 2, "-", -1);
    switch (m_.discipline) {
      case Discipline::Gated: {
        const std::size_t gated = queue_[kQueue2].size();
        for (std::size_t i = 0; i < gated && !done_; ++i) serve(kQueue2);
        break;
      }
      case Discipline::GloballyGated:
        for (std::size_t i = 0; i < gated_2_ && !done_; ++i) serve(kQueue2);
        gated_2_ = 0;
        break;
      case Discipline::Exhaustive:
        while (!done_ && !queue_[kQueue2].empty()) serve(kQueue2);
        break;
    }
    log(now_, "visit_end", 2, "-", -1);
  }

  const SimConfig& cfg_;
  const PollingModel& m_;
  Rng rng_;
  std::ostream* log_;
  std::vector<UnitStats> stats_;
  std::int64_t units_;

  double now_ = 0.0;
  std::array<double, 3> rate_{};
  std::array<double, 3> next_arrival_{};
  std::array<std::deque<Customer>, 3> queue_;
  std::int64_t next_id_ = 0;
  std::size_t gated_2_ = 0;
  double last_begin_ = -1.0;
  double last_end_ = -1.0;

  // Served customers, or cycles when no customer can ever arrive.
  std::int64_t progress_ = 0;
  bool count_cycles_ = false;
  bool done_ = false;
};

// Mean of per-unit values with the standard error of that mean.
Estimate combine(const std::vector<double>& values) {
  Estimate e;
  if (values.empty()) return e;
  const double k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  e.value = mean;
  e.available = true;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    e.standard_error = std::sqrt(ss / (k - 1.0) / k);
  }
  return e;
}

struct MomentEstimates {
  Estimate mean;
  Estimate second;
  Estimate std;
};

MomentEstimates summarize(const std::vector<Moments>& units) {
  std::vector<double> mean;
  std::vector<double> second;
  std::vector<double> sd;
  for (const Moments& u : units) {
    if (u.n == 0) continue;
    mean.push_back(u.mean());
    second.push_back(u.second());
    sd.push_back(std::sqrt(std::max(0.0, u.second() - u.mean() * u.mean())));
  }
  return {combine(mean), combine(second), combine(sd)};
}

ClassEstimate class_estimate(const std::vector<Moments>& units) {
  ClassEstimate c;
  for (const Moments& u : units) c.served += u.n;
  const MomentEstimates s = summarize(units);
  c.mean_wait = s.mean;
  c.wait_second_moment = s.second;
  c.std_wait = s.std;
  return c;
}

}  // namespace

SimulationEstimate run(const SimConfig& cfg) {
  cfg.validate();
  const int reps = cfg.replications;
  const int units_per_rep = reps == 1 ? kBatches : 1;

  std::vector<std::vector<UnitStats>> results(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Replication rep(cfg, splitmix64(cfg.seed + r), units_per_rep,
                    r == 0 ? cfg.event_log : nullptr);
    results[r] = rep.run();
  });

  std::vector<UnitStats> units;
  for (auto& r : results) {
    for (auto& u : r) units.push_back(std::move(u));
  }
  auto collect = [&](auto member) {
    std::vector<Moments> out;
    for (const UnitStats& u : units) out.push_back(member(u));
    return out;
  };

  SimulationEstimate est;
  est.seed = cfg.seed;
  est.replications = reps;
  est.measured_customers = cfg.measured_customers;
  est.low_precision = cfg.measured_customers < 10'000;
  est.batch_means = reps == 1;
  est.high = class_estimate(collect([](const UnitStats& u) { return u.wait[kHigh]; }));
  est.low = class_estimate(collect([](const UnitStats& u) { return u.wait[kLow]; }));
  est.queue_2 = class_estimate(collect([](const UnitStats& u) { return u.wait[kQueue2]; }));
  est.queue_1 = class_estimate(collect([](const UnitStats& u) {
    Moments m = u.wait[kHigh];
    m.merge(u.wait[kLow]);
    return m;
  }));

  CycleEstimates& c = est.cycles;
  const MomentEstimates begin = summarize(collect([](const UnitStats& u) { return u.cycle_begin; }));
  const MomentEstimates end = summarize(collect([](const UnitStats& u) { return u.cycle_end; }));
  const MomentEstimates inter = summarize(collect([](const UnitStats& u) { return u.intervisit; }));
  c.mean_begin = begin.mean;
  c.second_moment_begin = begin.second;
  c.mean_end = end.mean;
  c.second_moment_end = end.second;
  c.intervisit_mean = inter.mean;
  c.intervisit_second_moment = inter.second;
  c.queue_1_at_visit_start =
      summarize(collect([](const UnitStats& u) { return u.queue_1_at_start; })).mean;
  for (const UnitStats& u : units) c.cycles += u.cycle_begin.n;
  return est;
}

CycleEstimates estimate_cycles(const SimConfig& cfg) { return run(cfg).cycles; }

Comparison compare(const SimulationEstimate& sim, const PerformanceReport& report,
                   double z_limit) {
  Comparison out;
  out.z_limit = z_limit;
  auto add = [&](const std::string& name, double analysis, const Estimate& e) {
    Discrepancy d;
    d.quantity = name;
    d.analysis = analysis;
    d.simulation = e.value;
    d.standard_error = e.standard_error;
    d.skipped = !e.available || !(e.standard_error > 0.0);
    if (!d.skipped) {
      d.z = (analysis - e.value) / e.standard_error;
      if (!(std::abs(d.z) < z_limit)) out.pass = false;
    }
    out.rows.push_back(d);
  };
  add("mean_wait_high", report.high.mean_wait, sim.high.mean_wait);
  add("mean_wait_low", report.low.mean_wait, sim.low.mean_wait);
  add("mean_wait_queue_2", report.queue_2.mean_wait, sim.queue_2.mean_wait);
  add("std_wait_high", report.high.std_wait, sim.high.std_wait);
  add("std_wait_low", report.low.std_wait, sim.low.std_wait);
  add("std_wait_queue_2", report.queue_2.std_wait, sim.queue_2.std_wait);
  add("mean_cycle", report.cycle_mean, sim.cycles.mean_begin);
  add("mean_cycle_completion", report.cycle_mean, sim.cycles.mean_end);
  add("mean_intervisit_1", report.intervisit_mean, sim.cycles.intervisit_mean);
  return out;
}

Comparison compare(const SimConfig& cfg, const PerformanceReport& report, double z_limit) {
  return compare(run(cfg), report, z_limit);
}

}  // namespace pollingkit
