// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "migsim/config.hpp"
#include "migsim/time.hpp"
#include "migsim/trace.hpp"

namespace migsim::cost {

/// Every virtual-time parameter of a run. All durations are integer
/// nanoseconds; the config surface uses `_s` keys parsed as exact decimals.
struct CostTable {
  bool cuda_visible_devices_flag = false;

  Nanos bootstrap_ns = 2'480'000'000;
  Nanos topo_discovery_ns = 9'100'000'000;
  Nanos intra_establish_ns = 20'520'000'000;
  Nanos inter_establish_ns = 4'070'000'000;

  Nanos iteration_compute_ns = 6'800'000'000;
  Nanos lazy_init_total_ns = 37'200'000'000;

  std::int64_t data_plane_bandwidth_Bps = 5'000'000'000;
  Nanos control_plane_latency_ns = millis(1);
  std::int64_t per_gpu_storage_bandwidth_Bps = 1'000'000'000;
  std::int64_t state_bytes_per_device = 80'000'000'000;
  std::int64_t checkpoint_interval_iters = 50;
  Decimal straggler_slowdown_factor{12, 10};

  // Scheduler/framework restart overhead paid by restart-based strategies.
  Nanos restart_baseline_ns = 40'000'000'000;
  // Optional per-machine linear setup growth; 0 = Table-2 aggregates as-is.
  Nanos per_machine_linear_ns = 0;

  Nanos stage1_setup_ns() const { return bootstrap_ns + topo_discovery_ns + intra_establish_ns; }
  Nanos full_setup_ns() const { return stage1_setup_ns() + inter_establish_ns; }
  Nanos transfer_ns() const;                 // state_bytes over the data plane
  Nanos storage_rw_ns() const;               // state_bytes over per-GPU storage path
  Nanos slowed_iteration_ns() const;         // compute * straggler factor
};

/// The measured setup-component defaults, selected by the device-isolation
/// flag column.
CostTable default_table(bool cuda_visible_devices_flag);

/// Overlays [cost] section values onto a table.
CostTable table_from_config(const Config& cfg, const CostTable& base);

struct MetricsReport {
  double downtime_s = 0;
  double extra_jct_s = 0;
  double training_efficiency = 1.0;
  std::int64_t lost_iterations = 0;
  std::map<std::string, std::int64_t> peak_memory_by_device;

  Nanos downtime_ns = 0;
  Nanos total_time_ns = 0;
  Nanos ideal_time_ns = 0;
  std::int64_t useful_iterations = 0;
  bool oom = false;

  nlohmann::json to_json() const;
};

/// Recomputes the report purely from a trace; every summary number must be
/// reproducible this way.
MetricsReport efficiency(const Trace& trace, const CostTable& costs,
                         std::int64_t total_iterations);

}  // namespace migsim::cost
