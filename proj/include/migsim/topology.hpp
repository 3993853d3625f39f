// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace migsim::topo {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownHost : TopologyError {
  using TopologyError::TopologyError;
};
struct DuplicateRank : TopologyError {
  using TopologyError::TopologyError;
};
struct InvalidMapping : TopologyError {
  using TopologyError::TopologyError;
};
struct StaleGraph : TopologyError {
  using TopologyError::TopologyError;
};

struct HostSpec {
  std::string host_id;
  int device_count = 8;  // local device indices are 0..device_count-1
};

struct Participant {
  std::string host_id;
  int local_device_index = 0;
  int global_rank = 0;  // rank within the group, 0..n-1

  bool operator==(const Participant&) const = default;
};

enum class GroupPurpose { DP, TP, PP, TRANSFER };

const char* to_string(GroupPurpose p);

struct GroupSpec {
  std::string group_id;
  GroupPurpose purpose = GroupPurpose::DP;
  std::vector<Participant> participants;  // ordered by global_rank

  bool operator==(const GroupSpec&) const = default;
};

enum class EdgeKind { INTRA, INTER };

struct Edge {
  int src_rank = 0;
  int dst_rank = 0;
  EdgeKind kind = EdgeKind::INTRA;

  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

/// Directed ring over the group's ranks. Construction rule: chain each host's
/// participants in ascending local device index, order the host chains by the
/// minimum rank they contain, link chain tail to the next chain's head, and
/// close the ring from the last tail back to the first head. A one-member
/// group has no edges. An edge is INTRA iff both endpoints share a host.
struct CommGraph {
  std::string group_id;
  int rank_count = 0;
  std::vector<Edge> edges;                         // sorted by (src, dst)
  std::vector<std::vector<int>> predecessors;      // per rank
  std::vector<std::vector<int>> successors;        // per rank

  bool operator==(const CommGraph&) const = default;
};

/// leaver host -> joiner host, 1-to-1.
struct ReplacementMapping {
  std::map<std::string, std::string> pairs;
};

struct ReplacementPlan {
  // INTRA edges each joiner establishes on its own, keyed by joiner host.
  std::map<std::string, std::vector<Edge>> stage1_actions;
  // INTER edges adjacent to leaver ranks, torn down on the critical path.
  std::vector<Edge> stage2_teardowns;
  // INTER edges adjacent to the substituted ranks, established on the
  // critical path.
  std::vector<Edge> stage2_establishes;
  GroupSpec substituted_spec;
  CommGraph resulting_graph;
};

CommGraph build_comm_graph(const GroupSpec& spec, const std::vector<HostSpec>& hosts);

ReplacementPlan replace_members(const CommGraph& graph, const GroupSpec& spec,
                                const ReplacementMapping& mapping,
                                const std::vector<HostSpec>& hosts);

bool graphs_equal(const CommGraph& a, const CommGraph& b);

/// Stage-1 actions recomputed from nothing but the joiner's own host spec and
/// its assigned (local device, rank) pairs. Used to check the locality claim.
std::vector<Edge> joiner_local_chain(const HostSpec& joiner,
                                     const std::vector<std::pair<int, int>>& dev_rank_pairs,
                                     int group_rank_count);

void validate_group_spec(const GroupSpec& spec, const std::vector<HostSpec>& hosts);

}  // namespace migsim::topo
