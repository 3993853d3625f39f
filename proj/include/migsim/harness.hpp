// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "migsim/config.hpp"
#include "migsim/controller.hpp"
#include "migsim/costmodel.hpp"
#include "migsim/time.hpp"
#include "migsim/trace.hpp"
#include "migsim/worker.hpp"

namespace migsim::harness {

struct IncompatibleStrategy : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Strategy {
  LIVE_MIGRATE,   // member replacement + sandbox warmup; freeze = stage-2 + transfer
  NAIVE_LIVE,     // boot joiner, transfer, destroy + rebuild everything, cold resume
  SAVE_RESTART,   // synchronous save, full restart, load
  PER_ITER_CKPT,  // idealized free per-iteration checkpoints, restart without loss
  DEFER_K,        // keep running until the next scheduled checkpoint, then restart
  RESTART_K,      // restart immediately from the last scheduled checkpoint
  CCG_SEPARATE,   // group destroy + rebuild on the critical path (memory-flat, slow)
  CCG_OVERLAP,    // second group set built alongside the old one (fast, memory-heavy)
};

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& token);

enum class EventKind { STRAGGLER, MIGRATE, REBALANCE, FAIL, BANDWIDTH_SWEEP };

struct ScenarioEvent {
  EventKind kind = EventKind::MIGRATE;
  std::vector<std::string> hosts;   // straggler/migrate/fail targets
  Decimal factor{12, 10};           // straggler slowdown
  std::int64_t at_iter = 0;         // takes effect when this iteration completes
  std::int64_t period_iters = 0;    // rebalance cadence
  std::vector<std::int64_t> sweep_values;  // per-GPU storage bandwidths, Bps
};

struct ClusterSpec {
  int hosts = 3;
  int devices_per_host = 8;
  int standby_hosts = 1;
  bool preheat = false;
};

struct FaultInjection {
  std::set<std::string> warmup_fail_hosts;  // sandbox warmup forced to fail on these joiners
  int drop_ack_step = 0;                    // protocol step whose acks get dropped
  std::string drop_ack_node;
  int drop_ack_count = 0;
  bool kill_on_retry = false;  // mark the dropped node dead so the retry falls back
  Nanos step_timeout_ns = seconds(10);
  int step_retries = 1;
};

struct Scenario {
  std::string name = "scenario";
  ClusterSpec cluster;
  worker::JobShape job;
  std::int64_t total_iterations = 100;
  std::vector<ScenarioEvent> events;
  Strategy strategy = Strategy::LIVE_MIGRATE;
  std::uint64_t seed = 1;

  bool sandbox_warmup = true;
  bool boundary_only = true;
  bool zero_fill_gradients = true;
  std::string recovery = "auto";  // auto | redundancy | checkpoint
  Nanos detection_latency_ns = 0;
  Nanos horizon_ns = seconds(10'000'000);

  worker::MemoryModel memory;
  FaultInjection faults;

  /// [job]/[cluster]/[events]/[run]/[memory]/[faults] sections.
  static Scenario from_config(const Config& cfg);
  void validate() const;  // throws ConfigError with a field path
};

struct RunResult {
  Trace trace;
  cost::MetricsReport metrics;
  nlohmann::json summary;
};

RunResult run_scenario(const Scenario& scenario, const cost::CostTable& costs);

struct ComparisonRow {
  Strategy strategy;
  cost::MetricsReport metrics;
  double downtime_ratio_vs_live = 1.0;  // this strategy / LIVE_MIGRATE
  bool oom = false;
};

std::vector<ComparisonRow> compare_strategies(const Scenario& base,
                                              const std::vector<Strategy>& strategies,
                                              const cost::CostTable& costs);

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

struct SweepPoint {
  std::string param;
  std::int64_t value = 0;
  cost::MetricsReport metrics;
};

/// Re-runs the scenario once per value of a numeric [cost] parameter.
std::vector<SweepPoint> sweep(const Scenario& scenario, const cost::CostTable& costs,
                              const std::string& param, const std::vector<std::string>& values);

std::string sweep_to_csv(const std::vector<SweepPoint>& points);

/// Recomputes metrics and structural invariants from a trace alone. Returns
/// the name of the first violated invariant, or nullopt if clean. When a
/// summary is given, recomputed metrics must match it.
std::optional<std::string> verify_trace(const Trace& trace,
                                        const nlohmann::json* summary = nullptr);

}  // namespace migsim::harness
