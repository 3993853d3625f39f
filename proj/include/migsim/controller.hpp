// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "migsim/time.hpp"
#include "migsim/topology.hpp"
#include "migsim/trace.hpp"

namespace migsim::ctrl {

enum class Role { COORDINATOR, LEAVER, JOINER, STANDBY };
const char* to_string(Role r);

enum class MigrationTrigger { STRAGGLER, MAINTENANCE, REBALANCE, FAILURE };
const char* to_string(MigrationTrigger t);

struct MigrationPlan {
  topo::ReplacementMapping mapping;
  std::vector<std::string> affected_groups;  // exactly the groups containing a leaver
  MigrationTrigger trigger = MigrationTrigger::MAINTENANCE;
  std::optional<std::uint64_t> switch_iteration;  // fixed when the freeze begins
};

/// One blocking step of the replacement workflow; step k+1 never starts
/// before every ack of step k arrives.
struct ProtocolStep {
  int step_id = 0;  // 1 metadata, 2 stage-1, 3 teardown, 4 establish
  std::set<std::string> awaited_acks;
  Nanos deadline = 0;
  int retries_remaining = 1;
};

enum class PreheatStatus { COLD, STAGE1_DONE, WARMED };
const char* to_string(PreheatStatus s);

struct StandbyPool {
  std::map<std::string, PreheatStatus> members;

  std::optional<std::string> take_next();  // by host id order
  bool empty() const { return members.empty(); }
};

/// Downtime is the total virtual time with iteration progress halted: the
/// DOWNTIME_BEGIN/END intervals (freeze phases, restarts, and post-switch
/// cold lazy charges). Overlap-phase time never counts.
Nanos measure_downtime(const Trace& trace);

}  // namespace migsim::ctrl
