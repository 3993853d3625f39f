// SPDX-License-Identifier: Apache-2.0
#include "migsim/topology.hpp"

#include <algorithm>
#include <set>

namespace migsim::topo {

const char* to_string(GroupPurpose p) {
  switch (p) {
    case GroupPurpose::DP: return "DP";
    case GroupPurpose::TP: return "TP";
    case GroupPurpose::PP: return "PP";
    case GroupPurpose::TRANSFER: return "TRANSFER";
  }
  return "?";
}

void validate_group_spec(const GroupSpec& spec, const std::vector<HostSpec>& hosts) {
  if (spec.participants.empty())
    throw DuplicateRank(spec.group_id + ": group has no participants");
  std::map<std::string, const HostSpec*> by_id;
  for (const HostSpec& h : hosts) by_id[h.host_id] = &h;

  std::set<int> ranks;
  std::set<std::pair<std::string, int>> slots;
  for (const Participant& p : spec.participants) {
    auto host = by_id.find(p.host_id);
    if (host == by_id.end())
      throw UnknownHost(spec.group_id + ": participant references unknown host '" + p.host_id +
                        "'");
    if (p.local_device_index < 0 || p.local_device_index >= host->second->device_count)
      throw UnknownHost(spec.group_id + ": device index " +
                        std::to_string(p.local_device_index) + " out of range on '" + p.host_id +
                        "'");
    if (!ranks.insert(p.global_rank).second)
      throw DuplicateRank(spec.group_id + ": duplicate rank " + std::to_string(p.global_rank));
    if (!slots.insert({p.host_id, p.local_device_index}).second)
      throw DuplicateRank(spec.group_id + ": device (" + p.host_id + "," +
                          std::to_string(p.local_device_index) + ") appears twice");
  }
  const int n = static_cast<int>(spec.participants.size());
  if (*ranks.begin() != 0 || *ranks.rbegin() != n - 1)
    throw DuplicateRank(spec.group_id + ": ranks are not contiguous 0.." + std::to_string(n - 1));
  for (int i = 0; i < n; ++i)
    if (spec.participants[i].global_rank != i)
      throw DuplicateRank(spec.group_id + ": participants not ordered by rank");
}

namespace {

void finish_graph(CommGraph& g) {
  std::sort(g.edges.begin(), g.edges.end());
  g.predecessors.assign(g.rank_count, {});
  g.successors.assign(g.rank_count, {});
  for (const Edge& e : g.edges) {
    g.successors[e.src_rank].push_back(e.dst_rank);
    g.predecessors[e.dst_rank].push_back(e.src_rank);
  }
}

}  // namespace

CommGraph build_comm_graph(const GroupSpec& spec, const std::vector<HostSpec>& hosts) {
  validate_group_spec(spec, hosts);

  CommGraph g;
  g.group_id = spec.group_id;
  g.rank_count = static_cast<int>(spec.participants.size());
  if (g.rank_count == 1) {
    finish_graph(g);
    return g;
  }

  // Host chains: participants sorted by local device index within a host,
  // hosts ordered by the minimum rank they contain.
  std::map<std::string, std::vector<const Participant*>> per_host;
  for (const Participant& p : spec.participants) per_host[p.host_id].push_back(&p);
  struct Chain {
    int min_rank;
    std::vector<const Participant*> members;
  };
  std::vector<Chain> chains;
  for (auto& [host, members] : per_host) {
    std::sort(members.begin(), members.end(), [](const Participant* a, const Participant* b) {
      return a->local_device_index < b->local_device_index;
    });
    int min_rank = members.front()->global_rank;
    for (const Participant* p : members) min_rank = std::min(min_rank, p->global_rank);
    chains.push_back({min_rank, members});
  }
  std::sort(chains.begin(), chains.end(),
            [](const Chain& a, const Chain& b) { return a.min_rank < b.min_rank; });

  auto add_edge = [&](const Participant* a, const Participant* b) {
    EdgeKind kind = a->host_id == b->host_id ? EdgeKind::INTRA : EdgeKind::INTER;
    g.edges.push_back({a->global_rank, b->global_rank, kind});
  };
  for (const Chain& chain : chains)
    for (size_t i = 0; i + 1 < chain.members.size(); ++i)
      add_edge(chain.members[i], chain.members[i + 1]);
  for (size_t c = 0; c + 1 < chains.size(); ++c)
    add_edge(chains[c].members.back(), chains[c + 1].members.front());
  add_edge(chains.back().members.back(), chains.front().members.front());

  finish_graph(g);
  return g;
}

bool graphs_equal(const CommGraph& a, const CommGraph& b) {
  return a.rank_count == b.rank_count && a.edges == b.edges;
}

ReplacementPlan replace_members(const CommGraph& graph, const GroupSpec& spec,
                                const ReplacementMapping& mapping,
                                const std::vector<HostSpec>& hosts) {
  if (!graphs_equal(graph, build_comm_graph(spec, hosts)))
    throw StaleGraph(spec.group_id + ": graph does not match the group spec");

  std::set<std::string> joiners;
  std::set<std::string> present;
  for (const Participant& p : spec.participants) present.insert(p.host_id);
  for (const auto& [leaver, joiner] : mapping.pairs) {
    if (present.count(joiner))
      throw InvalidMapping(spec.group_id + ": joiner '" + joiner + "' already participates");
    if (!joiners.insert(joiner).second)
      throw InvalidMapping("joiner '" + joiner + "' mapped to more than one leaver");
  }

  ReplacementPlan plan;
  plan.substituted_spec = spec;
  std::set<int> replaced_ranks;
  std::set<std::string> joiner_hosts_in_group;
  for (Participant& p : plan.substituted_spec.participants) {
    auto it = mapping.pairs.find(p.host_id);
    if (it == mapping.pairs.end()) continue;  // mapping entries for other groups
    p.host_id = it->second;
    replaced_ranks.insert(p.global_rank);
    joiner_hosts_in_group.insert(it->second);
  }
  plan.resulting_graph = build_comm_graph(plan.substituted_spec, hosts);

  if (replaced_ranks.empty()) return plan;  // identity replacement

  std::map<int, const Participant*> new_by_rank;
  for (const Participant& p : plan.substituted_spec.participants)
    new_by_rank[p.global_rank] = &p;

  for (const std::string& joiner : joiner_hosts_in_group) plan.stage1_actions[joiner];
  for (const Edge& e : plan.resulting_graph.edges) {
    if (e.kind != EdgeKind::INTRA) continue;
    const Participant* src = new_by_rank.at(e.src_rank);
    if (joiner_hosts_in_group.count(src->host_id))
      plan.stage1_actions[src->host_id].push_back(e);
  }
  for (const Edge& e : graph.edges)
    if (e.kind == EdgeKind::INTER &&
        (replaced_ranks.count(e.src_rank) || replaced_ranks.count(e.dst_rank)))
      plan.stage2_teardowns.push_back(e);
  for (const Edge& e : plan.resulting_graph.edges)
    if (e.kind == EdgeKind::INTER &&
        (replaced_ranks.count(e.src_rank) || replaced_ranks.count(e.dst_rank)))
      plan.stage2_establishes.push_back(e);

  return plan;
}

std::vector<Edge> joiner_local_chain(const HostSpec& joiner,
                                     const std::vector<std::pair<int, int>>& dev_rank_pairs,
                                     int group_rank_count) {
  std::vector<std::pair<int, int>> sorted = dev_rank_pairs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Edge> out;
  for (size_t i = 0; i + 1 < sorted.size(); ++i)
    out.push_back({sorted[i].second, sorted[i + 1].second, EdgeKind::INTRA});
  // The ring-closing edge is local only when the whole group lives on this
  // host; the joiner can tell from the rank count alone.
  if (static_cast<int>(sorted.size()) == group_rank_count && group_rank_count > 1)
    out.push_back({sorted.back().second, sorted.front().second, EdgeKind::INTRA});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace migsim::topo
