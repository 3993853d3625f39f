// SPDX-License-Identifier: Apache-2.0
#include "migsim/costmodel.hpp"

#include <algorithm>

namespace migsim::cost {

Nanos CostTable::transfer_ns() const {
  return transmission_ns(state_bytes_per_device, data_plane_bandwidth_Bps);
}

Nanos CostTable::storage_rw_ns() const {
  // Per-GPU path: total bytes / (per-GPU bandwidth * gpu count) with all GPUs
  // moving their own shard reduces to one shard over one GPU's bandwidth.
  return transmission_ns(state_bytes_per_device, per_gpu_storage_bandwidth_Bps);
}

Nanos CostTable::slowed_iteration_ns() const {
  return scale_duration(iteration_compute_ns, straggler_slowdown_factor);
}

CostTable default_table(bool flag) {
  CostTable t;
  t.cuda_visible_devices_flag = flag;
  if (flag) {
    t.bootstrap_ns = 2'500'000'000;
    t.topo_discovery_ns = 8'480'000'000;
    t.intra_establish_ns = 62'030'000'000;
    t.inter_establish_ns = 4'020'000'000;
  }
  return t;
}

CostTable table_from_config(const Config& cfg, const CostTable& base) {
  bool flag = cfg.get_bool("cost", "cuda_visible_devices_flag", base.cuda_visible_devices_flag);
  CostTable t = default_table(flag);

  t.bootstrap_ns = cfg.get_seconds_ns("cost", "bootstrap_s", t.bootstrap_ns);
  t.topo_discovery_ns = cfg.get_seconds_ns("cost", "topo_discovery_s", t.topo_discovery_ns);
  t.intra_establish_ns = cfg.get_seconds_ns("cost", "intra_establish_s", t.intra_establish_ns);
  t.inter_establish_ns = cfg.get_seconds_ns("cost", "inter_establish_s", t.inter_establish_ns);
  t.iteration_compute_ns =
      cfg.get_seconds_ns("cost", "iteration_compute_s", base.iteration_compute_ns);
  t.lazy_init_total_ns = cfg.get_seconds_ns("cost", "lazy_init_total_s", base.lazy_init_total_ns);
  t.data_plane_bandwidth_Bps =
      cfg.get_int("cost", "data_plane_bandwidth_Bps", base.data_plane_bandwidth_Bps);
  t.control_plane_latency_ns =
      cfg.get_seconds_ns("cost", "control_plane_latency_s", base.control_plane_latency_ns);
  t.per_gpu_storage_bandwidth_Bps =
      cfg.get_int("cost", "per_gpu_storage_bandwidth_Bps", base.per_gpu_storage_bandwidth_Bps);
  t.state_bytes_per_device =
      cfg.get_int("cost", "state_bytes_per_device", base.state_bytes_per_device);
  t.checkpoint_interval_iters =
      cfg.get_int("cost", "checkpoint_interval_iters", base.checkpoint_interval_iters);
  t.straggler_slowdown_factor =
      cfg.get_decimal("cost", "straggler_slowdown_factor", base.straggler_slowdown_factor);
  t.restart_baseline_ns =
      cfg.get_seconds_ns("cost", "restart_baseline_s", base.restart_baseline_ns);
  t.per_machine_linear_ns =
      cfg.get_seconds_ns("cost", "per_machine_linear_s", base.per_machine_linear_ns);

  if (t.data_plane_bandwidth_Bps <= 0)
    throw ConfigError("cost.data_plane_bandwidth_Bps: must be positive");
  if (t.per_gpu_storage_bandwidth_Bps <= 0)
    throw ConfigError("cost.per_gpu_storage_bandwidth_Bps: must be positive");
  if (t.state_bytes_per_device < 0)
    throw ConfigError("cost.state_bytes_per_device: must be non-negative");
  if (t.checkpoint_interval_iters <= 0)
    throw ConfigError("cost.checkpoint_interval_iters: must be positive");
  return t;
}

nlohmann::json MetricsReport::to_json() const {
  return nlohmann::json{{"downtime_s", downtime_s},
                        {"downtime_ns", downtime_ns},
                        {"extra_jct_s", extra_jct_s},
                        {"training_efficiency", training_efficiency},
                        {"lost_iterations", lost_iterations},
                        {"useful_iterations", useful_iterations},
                        {"total_time_ns", total_time_ns},
                        {"ideal_time_ns", ideal_time_ns},
                        {"oom", oom},
                        {"peak_memory_by_device", peak_memory_by_device}};
}

MetricsReport efficiency(const Trace& trace, const CostTable& costs,
                         std::int64_t total_iterations) {
  MetricsReport r;
  Nanos downtime = 0;
  Nanos open_begin = -1;
  Nanos end_time = 0;
  std::int64_t max_iter = 0;
  std::int64_t rerun_iterations = 0;
  std::map<std::string, std::int64_t> usage;  // device -> currently allocated

  for (const TraceRecord& rec : trace.records()) {
    end_time = std::max(end_time, rec.time);
    switch (rec.kind) {
      case RecordKind::DOWNTIME_BEGIN:
        open_begin = rec.time;
        break;
      case RecordKind::DOWNTIME_END:
        if (open_begin >= 0) {
          downtime += rec.time - open_begin;
          open_begin = -1;
        }
        break;
      case RecordKind::ITER_DONE: {
        std::int64_t it = rec.detail.at("iteration").get<std::int64_t>();
        if (it <= max_iter) ++rerun_iterations;
        max_iter = std::max(max_iter, it);
        break;
      }
      case RecordKind::FAILURE: {
        if (rec.detail.contains("lost_iterations"))
          r.lost_iterations += rec.detail.at("lost_iterations").get<std::int64_t>();
        break;
      }
      case RecordKind::ALLOC: {
        const std::string dev = rec.detail.at("device").get<std::string>();
        usage[dev] += rec.detail.at("bytes").get<std::int64_t>();
        auto& peak = r.peak_memory_by_device[dev];
        peak = std::max(peak, usage[dev]);
        break;
      }
      case RecordKind::FREE: {
        const std::string dev = rec.detail.at("device").get<std::string>();
        usage[dev] -= rec.detail.at("bytes").get<std::int64_t>();
        break;
      }
      default:
        break;
    }
  }
  (void)rerun_iterations;

  r.downtime_ns = downtime;
  r.total_time_ns = end_time;
  r.useful_iterations = std::min<std::int64_t>(max_iter, total_iterations);
  r.ideal_time_ns = total_iterations * costs.iteration_compute_ns;
  r.downtime_s = static_cast<double>(downtime) / kNanosPerSecond;
  if (end_time > 0) {
    r.extra_jct_s = static_cast<double>(end_time - r.ideal_time_ns) / kNanosPerSecond;
    r.training_efficiency = static_cast<double>(r.useful_iterations) *
                            static_cast<double>(costs.iteration_compute_ns) /
                            static_cast<double>(end_time);
  }
  return r;
}

}  // namespace migsim::cost
