// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>

#include "migsim/harness.hpp"

namespace migsim::harness {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::LIVE_MIGRATE: return "LIVE_MIGRATE";
    case Strategy::NAIVE_LIVE: return "NAIVE_LIVE";
    case Strategy::SAVE_RESTART: return "SAVE_RESTART";
    case Strategy::PER_ITER_CKPT: return "PER_ITER_CKPT";
    case Strategy::DEFER_K: return "DEFER_K";
    case Strategy::RESTART_K: return "RESTART_K";
    case Strategy::CCG_SEPARATE: return "CCG_SEPARATE";
    case Strategy::CCG_OVERLAP: return "CCG_OVERLAP";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& token) {
  static const std::pair<const char*, Strategy> table[] = {
      {"LIVE_MIGRATE", Strategy::LIVE_MIGRATE}, {"NAIVE_LIVE", Strategy::NAIVE_LIVE},
      {"SAVE_RESTART", Strategy::SAVE_RESTART}, {"PER_ITER_CKPT", Strategy::PER_ITER_CKPT},
      {"DEFER_K", Strategy::DEFER_K},           {"RESTART_K", Strategy::RESTART_K},
      {"CCG_SEPARATE", Strategy::CCG_SEPARATE}, {"CCG_OVERLAP", Strategy::CCG_OVERLAP},
  };
  for (const auto& [name, s] : table)
    if (token == name) return s;
  throw ConfigError("run.strategy: unknown strategy '" + token + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::int64_t attr_int(const std::map<std::string, std::string>& attrs, const std::string& name,
                      const std::string& path, std::optional<std::int64_t> fallback = {}) {
  auto it = attrs.find(name);
  if (it == attrs.end()) {
    if (fallback) return *fallback;
    throw ConfigError(path + ": missing attribute '" + name + "'");
  }
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError(path + "." + name + ": expected integer, got '" + it->second + "'");
  }
}

ScenarioEvent parse_event(const std::string& key, const std::string& value) {
  const std::string path = "events." + key;
  auto attrs = parse_kv_attrs(value, path);
  ScenarioEvent ev;
  if (key == "straggler") {
    ev.kind = EventKind::STRAGGLER;
    ev.hosts = split_csv(attrs.count("host") ? attrs.at("host") : "");
    if (ev.hosts.empty()) throw ConfigError(path + ": missing attribute 'host'");
    ev.at_iter = attr_int(attrs, "at_iter", path);
    if (attrs.count("factor")) {
      try {
        ev.factor = parse_decimal(attrs.at("factor"));
      } catch (const std::exception& e) {
        throw ConfigError(path + ".factor: " + e.what());
      }
    }
  } else if (key == "migrate") {
    ev.kind = EventKind::MIGRATE;
    ev.hosts = split_csv(attrs.count("hosts") ? attrs.at("hosts") : "");
    if (ev.hosts.empty()) throw ConfigError(path + ": missing attribute 'hosts'");
    ev.at_iter = attr_int(attrs, "at_iter", path);
  } else if (key == "fail") {
    ev.kind = EventKind::FAIL;
    ev.hosts = split_csv(attrs.count("host") ? attrs.at("host") : "");
    if (ev.hosts.empty()) throw ConfigError(path + ": missing attribute 'host'");
    ev.at_iter = attr_int(attrs, "at_iter", path);
  } else if (key == "rebalance") {
    ev.kind = EventKind::REBALANCE;
    ev.period_iters = attr_int(attrs, "period_iters", path);
    if (ev.period_iters <= 0) throw ConfigError(path + ".period_iters: must be positive");
  } else if (key == "bandwidth_sweep") {
    ev.kind = EventKind::BANDWIDTH_SWEEP;
    for (const std::string& v : split_csv(attrs.count("values_Bps") ? attrs.at("values_Bps") : ""))
      ev.sweep_values.push_back(std::stoll(v));
    if (ev.sweep_values.empty()) throw ConfigError(path + ": missing attribute 'values_Bps'");
  } else {
    throw ConfigError(path + ": unknown event kind");
  }
  return ev;
}

}  // namespace

Scenario Scenario::from_config(const Config& cfg) {
  Scenario s;
  s.name = cfg.get_string("run", "name", "scenario");
  s.cluster.hosts = static_cast<int>(cfg.get_int("cluster", "hosts", s.cluster.hosts));
  s.cluster.devices_per_host =
      static_cast<int>(cfg.get_int("cluster", "devices_per_host", s.cluster.devices_per_host));
  s.cluster.standby_hosts =
      static_cast<int>(cfg.get_int("cluster", "standby_hosts", s.cluster.standby_hosts));
  s.cluster.preheat = cfg.get_bool("cluster", "preheat", false);

  s.job.tp = static_cast<int>(cfg.get_int("job", "tp", s.job.tp));
  s.job.pp = static_cast<int>(cfg.get_int("job", "pp", s.job.pp));
  s.job.dp = static_cast<int>(cfg.get_int("job", "dp", s.job.dp));
  s.job.distributed_optimizer = cfg.get_bool("job", "distributed_optimizer", false);
  s.job.layers_per_stage =
      static_cast<int>(cfg.get_int("job", "layers_per_stage", s.job.layers_per_stage));
  s.job.param_words = static_cast<int>(cfg.get_int("job", "param_words", s.job.param_words));
  s.job.act_words = static_cast<int>(cfg.get_int("job", "act_words", s.job.act_words));
  s.total_iterations = cfg.get_int("job", "total_iterations", s.total_iterations);

  for (const auto& [key, value] : cfg.section_entries("events"))
    s.events.push_back(parse_event(key, value));

  s.strategy = strategy_from_string(cfg.get_string("run", "strategy", "LIVE_MIGRATE"));
  s.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));
  s.sandbox_warmup = cfg.get_bool("run", "sandbox_warmup", true);
  s.boundary_only = cfg.get_bool("run", "boundary_only", true);
  s.zero_fill_gradients = cfg.get_bool("run", "zero_fill_gradients", true);
  s.recovery = cfg.get_string("run", "recovery", "auto");
  if (s.recovery != "auto" && s.recovery != "redundancy" && s.recovery != "checkpoint")
    throw ConfigError("run.recovery: expected auto|redundancy|checkpoint");
  s.detection_latency_ns = cfg.get_seconds_ns("run", "detection_latency_s", 0);
  s.horizon_ns = cfg.get_seconds_ns("run", "horizon_s", s.horizon_ns);

  s.memory.params_bytes = cfg.get_int("memory", "params_bytes", s.memory.params_bytes);
  s.memory.optimizer_bytes = cfg.get_int("memory", "optimizer_bytes", s.memory.optimizer_bytes);
  s.memory.gradient_buffer_bytes =
      cfg.get_int("memory", "gradient_buffer_bytes", s.memory.gradient_buffer_bytes);
  s.memory.activations_bytes =
      cfg.get_int("memory", "activations_bytes", s.memory.activations_bytes);
  s.memory.channel_intra_bytes =
      cfg.get_int("memory", "channel_intra_bytes", s.memory.channel_intra_bytes);
  s.memory.channel_inter_bytes =
      cfg.get_int("memory", "channel_inter_bytes", s.memory.channel_inter_bytes);
  s.memory.transfer_channel_bytes =
      cfg.get_int("memory", "transfer_channel_bytes", s.memory.transfer_channel_bytes);
  s.memory.capacity_bytes = cfg.get_int("memory", "capacity_bytes", s.memory.capacity_bytes);

  for (const std::string& h : split_csv(cfg.get_string("faults", "warmup_fail_hosts", "")))
    s.faults.warmup_fail_hosts.insert(h);
  s.faults.drop_ack_step = static_cast<int>(cfg.get_int("faults", "drop_ack_step", 0));
  s.faults.drop_ack_node = cfg.get_string("faults", "drop_ack_node", "");
  s.faults.drop_ack_count = static_cast<int>(cfg.get_int("faults", "drop_ack_count", 0));
  s.faults.kill_on_retry = cfg.get_bool("faults", "kill_on_retry", false);
  s.faults.step_timeout_ns = cfg.get_seconds_ns("faults", "step_timeout_s", seconds(10));
  s.faults.step_retries = static_cast<int>(cfg.get_int("faults", "step_retries", 1));

  s.validate();
  return s;
}

void Scenario::validate() const {
  if (cluster.hosts <= 0) throw ConfigError("cluster.hosts: must be positive");
  if (cluster.devices_per_host <= 0)
    throw ConfigError("cluster.devices_per_host: must be positive");
  if (cluster.standby_hosts < 0)
    throw ConfigError("cluster.standby_hosts: must be non-negative");
  if (job.tp <= 0 || job.pp <= 0 || job.dp <= 0)
    throw ConfigError("job.tp/pp/dp: must be positive");
  if (job.layers_per_stage <= 0) throw ConfigError("job.layers_per_stage: must be positive");
  if (job.param_words <= 0) throw ConfigError("job.param_words: must be positive");
  if (total_iterations <= 0) throw ConfigError("job.total_iterations: must be positive");
  const std::int64_t devices =
      static_cast<std::int64_t>(cluster.hosts) * cluster.devices_per_host;
  if (job.world_size() > devices)
    throw ConfigError("job.tp*pp*dp: needs " + std::to_string(job.world_size()) +
                      " devices but the cluster has " + std::to_string(devices));

  std::int64_t replacements_needed = 0;
  for (const ScenarioEvent& ev : events) {
    if (ev.kind == EventKind::BANDWIDTH_SWEEP) continue;
    if (ev.kind == EventKind::REBALANCE) {
      replacements_needed += total_iterations / ev.period_iters;
      continue;
    }
    if (ev.at_iter <= 0 || ev.at_iter > total_iterations)
      throw ConfigError("events.at_iter: " + std::to_string(ev.at_iter) +
                        " outside 1.." + std::to_string(total_iterations));
    if (ev.kind == EventKind::MIGRATE || ev.kind == EventKind::FAIL ||
        ev.kind == EventKind::STRAGGLER)
      replacements_needed += static_cast<std::int64_t>(ev.hosts.size());
  }
  if (replacements_needed > cluster.standby_hosts)
    throw ConfigError("cluster.standby_hosts: scenario needs " +
                      std::to_string(replacements_needed) + " replacement hosts but only " +
                      std::to_string(cluster.standby_hosts) + " are configured");

  if (recovery == "redundancy" && job.distributed_optimizer)
    throw IncompatibleStrategy(
        "redundancy recovery requires the distributed optimizer to be disabled");
}

}  // namespace migsim::harness
