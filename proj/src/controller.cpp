// SPDX-License-Identifier: Apache-2.0
#include "migsim/controller.hpp"

namespace migsim::ctrl {

const char* to_string(Role r) {
  switch (r) {
    case Role::COORDINATOR: return "COORDINATOR";
    case Role::LEAVER: return "LEAVER";
    case Role::JOINER: return "JOINER";
    case Role::STANDBY: return "STANDBY";
  }
  return "?";
}

const char* to_string(MigrationTrigger t) {
  switch (t) {
    case MigrationTrigger::STRAGGLER: return "STRAGGLER";
    case MigrationTrigger::MAINTENANCE: return "MAINTENANCE";
    case MigrationTrigger::REBALANCE: return "REBALANCE";
    case MigrationTrigger::FAILURE: return "FAILURE";
  }
  return "?";
}

const char* to_string(PreheatStatus s) {
  switch (s) {
    case PreheatStatus::COLD: return "COLD";
    case PreheatStatus::STAGE1_DONE: return "STAGE1_DONE";
    case PreheatStatus::WARMED: return "WARMED";
  }
  return "?";
}

std::optional<std::string> StandbyPool::take_next() {
  if (members.empty()) return std::nullopt;
  // Prefer the warmest available standby.
  for (auto status : {PreheatStatus::WARMED, PreheatStatus::STAGE1_DONE, PreheatStatus::COLD})
    for (const auto& [host, s] : members)
      if (s == status) {
        std::string out = host;
        members.erase(host);
        return out;
      }
  return std::nullopt;
}

Nanos measure_downtime(const Trace& trace) {
  Nanos total = 0;
  Nanos open = -1;
  for (const TraceRecord& r : trace.records()) {
    if (r.kind == RecordKind::DOWNTIME_BEGIN) open = r.time;
    if (r.kind == RecordKind::DOWNTIME_END && open >= 0) {
      total += r.time - open;
      open = -1;
    }
  }
  return total;
}

}  // namespace migsim::ctrl
