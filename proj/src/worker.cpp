// SPDX-License-Identifier: Apache-2.0
#include "migsim/worker.hpp"

#include <algorithm>

namespace migsim::worker {

namespace {

constexpr std::uint64_t kParamsTag = 0x706172616d730001ull;
constexpr std::uint64_t kOptTag = 0x6f7074696d697a01ull;
constexpr std::uint64_t kTpTag = 0x74705f6163740001ull;
constexpr std::uint64_t kPpFwdTag = 0x70705f666f727701ull;
constexpr std::uint64_t kPpBwdTag = 0x70705f6772616401ull;
constexpr std::uint64_t kOptUpdate = 0x9e3779b97f4a7c15ull;

std::uint64_t chain(std::uint64_t h, std::uint64_t v) { return mix64(h ^ v); }

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t gradient_word(int dp_rank, std::uint64_t iteration, int layer, int tp_rank,
                            int elem) {
  std::uint64_t h = mix64(0x677261645f660001ull);
  h = chain(h, static_cast<std::uint64_t>(dp_rank));
  h = chain(h, iteration);
  h = chain(h, static_cast<std::uint64_t>(layer));
  h = chain(h, static_cast<std::uint64_t>(tp_rank));
  h = chain(h, static_cast<std::uint64_t>(elem));
  return h;
}

std::pair<int, int> optimizer_slice(int dp_rank, int dp_size, int param_words) {
  auto lo = static_cast<int>(static_cast<std::int64_t>(dp_rank) * param_words / dp_size);
  auto hi = static_cast<int>(static_cast<std::int64_t>(dp_rank + 1) * param_words / dp_size);
  return {lo, hi};
}

ModelState initial_state(std::uint64_t seed, const JobShape& shape, const ShardCoords& coords) {
  ModelState s;
  s.coords = coords;
  s.iteration = 0;
  s.params.resize(shape.param_words);
  // Parameters are replicated across the DP group, so seeding excludes dp.
  std::uint64_t ph = chain(chain(mix64(kParamsTag ^ seed), coords.tp), coords.pp);
  for (int e = 0; e < shape.param_words; ++e) s.params[e] = chain(ph, e);

  int opt_len = shape.param_words;
  int lo = 0;
  if (shape.distributed_optimizer) {
    auto [slo, shi] = optimizer_slice(coords.dp, shape.dp, shape.param_words);
    lo = slo;
    opt_len = shi - slo;
  }
  std::uint64_t oh = chain(chain(mix64(kOptTag ^ seed), coords.tp), coords.pp);
  s.optimizer.resize(opt_len);
  for (int k = 0; k < opt_len; ++k) s.optimizer[k] = chain(oh, lo + k);
  return s;
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::ALL_REDUCE: return "ALL_REDUCE";
    case OpKind::SEND_RECV: return "SEND_RECV";
    case OpKind::BARRIER: return "BARRIER";
  }
  return "?";
}

std::string tp_group_id(int pp, int dp) {
  return "tp.pp" + std::to_string(pp) + ".dp" + std::to_string(dp);
}
std::string pp_group_id(int tp, int dp) {
  return "pp.tp" + std::to_string(tp) + ".dp" + std::to_string(dp);
}
std::string dp_group_id(int tp, int pp) {
  return "dp.tp" + std::to_string(tp) + ".pp" + std::to_string(pp);
}

std::vector<CollOp> iteration_schedule(const JobShape& shape) {
  std::vector<CollOp> ops;
  std::map<std::string, int> seq;

  auto push = [&](CollOp op) {
    op.seq_in_group = seq[op.group_id]++;
    ops.push_back(std::move(op));
  };

  // TP all-reduce per layer.
  if (shape.tp > 1) {
    for (int layer = 0; layer < shape.layer_count(); ++layer) {
      const int stage = layer / shape.layers_per_stage;
      for (int dp = 0; dp < shape.dp; ++dp) {
        CollOp op;
        op.kind = OpKind::ALL_REDUCE;
        op.group_id = tp_group_id(stage, dp);
        op.payload_words = shape.act_words;
        for (int tp = 0; tp < shape.tp; ++tp)
          op.participant_ranks.push_back(shape.rank_of({tp, stage, dp}));
        push(std::move(op));
      }
    }
  }
  // PP activations forward, then gradients backward.
  for (int b = 0; b + 1 < shape.pp; ++b) {
    for (int tp = 0; tp < shape.tp; ++tp) {
      for (int dp = 0; dp < shape.dp; ++dp) {
        CollOp op;
        op.kind = OpKind::SEND_RECV;
        op.group_id = pp_group_id(tp, dp);
        op.payload_words = shape.act_words;
        op.src_rank = shape.rank_of({tp, b, dp});
        op.dst_rank = shape.rank_of({tp, b + 1, dp});
        op.participant_ranks = {std::min(op.src_rank, op.dst_rank),
                                std::max(op.src_rank, op.dst_rank)};
        push(std::move(op));
      }
    }
  }
  for (int b = shape.pp - 2; b >= 0; --b) {
    for (int tp = 0; tp < shape.tp; ++tp) {
      for (int dp = 0; dp < shape.dp; ++dp) {
        CollOp op;
        op.kind = OpKind::SEND_RECV;
        op.group_id = pp_group_id(tp, dp);
        op.payload_words = shape.act_words;
        op.gradient_bearing = true;
        op.src_rank = shape.rank_of({tp, b + 1, dp});
        op.dst_rank = shape.rank_of({tp, b, dp});
        op.participant_ranks = {std::min(op.src_rank, op.dst_rank),
                                std::max(op.src_rank, op.dst_rank)};
        push(std::move(op));
      }
    }
  }
  // One gradient all-reduce per DP group.
  if (shape.dp > 1) {
    for (int tp = 0; tp < shape.tp; ++tp) {
      for (int pp = 0; pp < shape.pp; ++pp) {
        CollOp op;
        op.kind = OpKind::ALL_REDUCE;
        op.group_id = dp_group_id(tp, pp);
        op.payload_words = shape.param_words;
        op.gradient_bearing = true;
        for (int dp = 0; dp < shape.dp; ++dp)
          op.participant_ranks.push_back(shape.rank_of({tp, pp, dp}));
        std::sort(op.participant_ranks.begin(), op.participant_ranks.end());
        push(std::move(op));
      }
    }
  }
  // Closing barrier; bypassed in the sandbox, never recorded.
  {
    CollOp op;
    op.kind = OpKind::BARRIER;
    op.group_id = "world";
    op.payload_words = 0;
    for (int r = 0; r < shape.world_size(); ++r) op.participant_ranks.push_back(r);
    push(std::move(op));
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Payload values
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint64_t> tp_allreduce_result(const JobShape& shape, std::uint64_t iter,
                                               int stage, int dp, int words) {
  std::vector<std::uint64_t> out(words, 0);
  for (int tp = 0; tp < shape.tp; ++tp) {
    std::uint64_t h = chain(chain(chain(mix64(kTpTag), iter), stage), dp);
    h = chain(h, tp);
    for (int e = 0; e < words; ++e) out[e] += chain(h, e);
  }
  return out;
}

std::vector<std::uint64_t> pp_payload(std::uint64_t tag, std::uint64_t iter, int tp, int dp,
                                      int src_pp, int words) {
  std::vector<std::uint64_t> out(words);
  std::uint64_t h = chain(chain(chain(chain(mix64(tag), iter), tp), dp), src_pp);
  for (int e = 0; e < words; ++e) out[e] = chain(h, e);
  return out;
}

std::vector<std::uint64_t> reduced_gradient(const JobShape& shape, std::uint64_t iter, int tp,
                                            int pp) {
  std::vector<std::uint64_t> g(shape.param_words, 0);
  for (int dp = 0; dp < shape.dp; ++dp)
    for (int e = 0; e < shape.param_words; ++e) {
      const int layer = pp * shape.layers_per_stage + (e % shape.layers_per_stage);
      g[e] += gradient_word(dp, iter, layer, tp, e);
    }
  return g;
}

void apply_update(ModelState& s, const JobShape& shape,
                  const std::vector<std::uint64_t>& reduced) {
  for (int e = 0; e < shape.param_words; ++e) s.params[e] += reduced[e];
  if (shape.distributed_optimizer) {
    auto [lo, hi] = optimizer_slice(s.coords.dp, shape.dp, shape.param_words);
    for (int k = 0; k < hi - lo; ++k) s.optimizer[k] += mix64(reduced[lo + k] ^ kOptUpdate);
  } else {
    for (int e = 0; e < shape.param_words; ++e) s.optimizer[e] += mix64(reduced[e] ^ kOptUpdate);
  }
  ++s.iteration;
}

std::vector<std::uint64_t> op_result_for_rank(const CollOp& op, const JobShape& shape,
                                              std::uint64_t iter) {
  // What a participating rank receives from this op in an uninterrupted run.
  if (op.kind == OpKind::SEND_RECV) {
    const ShardCoords src = shape.coords_of(op.src_rank);
    const std::uint64_t tag = op.gradient_bearing ? kPpBwdTag : kPpFwdTag;
    return pp_payload(tag, iter, src.tp, src.dp, src.pp, op.payload_words);
  }
  const ShardCoords first = shape.coords_of(op.participant_ranks.front());
  if (op.group_id.rfind("tp.", 0) == 0)
    return tp_allreduce_result(shape, iter, first.pp, first.dp, op.payload_words);
  return reduced_gradient(shape, iter, first.tp, first.pp);
}

bool op_is_boundary_for(const CollOp& op, int rank, const std::vector<std::string>& rank_to_host) {
  const std::string& home = rank_to_host.at(rank);
  return std::any_of(op.participant_ranks.begin(), op.participant_ranks.end(),
                     [&](int q) { return rank_to_host.at(q) != home; });
}

}  // namespace

// ---------------------------------------------------------------------------
// Iterations
// ---------------------------------------------------------------------------

void run_cluster_iteration(std::vector<ModelState>& states, const JobShape& shape,
                           const std::vector<std::string>& rank_to_host, IterMode mode,
                           std::map<int, RecordedComms>* recordings_out, bool boundary_only,
                           bool zero_fill_gradients) {
  if (static_cast<int>(states.size()) != shape.world_size())
    throw WorkerError("state count does not match job shape");
  if (mode == IterMode::SANDBOX)
    throw WorkerError("sandbox iterations go through sandbox_iteration()");

  const std::uint64_t iter = states.front().iteration;
  for (const ModelState& s : states)
    if (s.iteration != iter) throw WorkerError("workers not at a common iteration boundary");

  if (mode == IterMode::RECORD) {
    if (iter != 0) throw AlreadyRecorded("recording hook only exists during iteration 0");
    if (!recordings_out) throw WorkerError("RECORD mode needs a recording sink");
    const auto ops = iteration_schedule(shape);
    for (const CollOp& op : ops) {
      if (op.kind == OpKind::BARRIER) continue;  // barriers are bypassed, never recorded
      for (int rank : op.participant_ranks) {
        if (op.kind == OpKind::SEND_RECV && rank != op.dst_rank) continue;  // receiver records
        if (boundary_only && !op_is_boundary_for(op, rank, rank_to_host)) continue;
        RecordedEntry entry;
        entry.kind = op.kind;
        if (op.gradient_bearing && zero_fill_gradients)
          entry.words.assign(op.payload_words, 0);
        else
          entry.words = op_result_for_rank(op, shape, iter);
        auto& rec = (*recordings_out)[rank];
        rec.boundary_only = boundary_only;
        rec.zero_fill_gradients = zero_fill_gradients;
        rec.entries[{op.group_id, op.seq_in_group}] = std::move(entry);
      }
    }
  }

  for (ModelState& s : states) {
    const auto reduced = reduced_gradient(shape, iter, s.coords.tp, s.coords.pp);
    apply_update(s, shape, reduced);
  }
}

std::map<int, RecordedComms> record_first_iteration(std::vector<ModelState>& states,
                                                    const JobShape& shape,
                                                    const std::vector<std::string>& rank_to_host,
                                                    bool boundary_only,
                                                    bool zero_fill_gradients) {
  std::map<int, RecordedComms> out;
  run_cluster_iteration(states, shape, rank_to_host, IterMode::RECORD, &out, boundary_only,
                        zero_fill_gradients);
  return out;
}

SandboxResult sandbox_iteration(const std::vector<ModelState>& member_states,
                                const JobShape& shape,
                                const std::vector<std::string>& rank_to_host,
                                const std::set<std::string>& sandbox_hosts,
                                const std::map<int, RecordedComms>& recordings) {
  SandboxResult result;
  std::map<int, ModelState> members;  // discarded at return; only flags survive
  for (const ModelState& s : member_states) members[shape.rank_of(s.coords)] = s;

  const std::uint64_t iter = 0;  // the sandbox replays the recorded first iteration
  auto inside = [&](int rank) { return sandbox_hosts.count(rank_to_host.at(rank)) > 0; };

  auto lookup = [&](int rank, const CollOp& op) -> const RecordedEntry* {
    auto rec = recordings.find(rank);
    if (rec == recordings.end()) return nullptr;
    auto it = rec->second.entries.find({op.group_id, op.seq_in_group});
    if (it == rec->second.entries.end()) return nullptr;
    return &it->second;
  };
  auto mismatch = [&](const CollOp& op, const std::string& why) {
    result.ok = false;
    result.mismatch = op.group_id + "#" + std::to_string(op.seq_in_group) + " (" +
                      to_string(op.kind) + ", " + std::to_string(op.payload_words) +
                      " words): " + why;
    return result;
  };

  for (const CollOp& op : iteration_schedule(shape)) {
    bool any_member = std::any_of(op.participant_ranks.begin(), op.participant_ranks.end(),
                                  [&](int r) { return members.count(r) > 0; });
    if (!any_member) continue;
    if (op.kind == OpKind::BARRIER) continue;  // returns immediately

    const bool fully_inside =
        std::all_of(op.participant_ranks.begin(), op.participant_ranks.end(),
                    [&](int r) { return inside(r); });

    if (op.kind == OpKind::SEND_RECV) {
      if (!members.count(op.dst_rank)) continue;  // outbound only; emulator sinks it
      if (fully_inside) {
        ++result.local_ops;  // delivered over stage-1 connections
        continue;
      }
      ++result.replayed_ops;
      const RecordedEntry* entry = lookup(op.dst_rank, op);
      if (!entry) return mismatch(op, "no recorded payload");
      if (entry->kind != op.kind) return mismatch(op, "recorded op kind differs");
      if (static_cast<int>(entry->words.size()) != op.payload_words)
        return mismatch(op, "recorded size " + std::to_string(entry->words.size()) + " differs");
      continue;
    }

    // ALL_REDUCE
    if (fully_inside) {
      ++result.local_ops;
      const auto reduced = op_result_for_rank(op, shape, iter);
      for (int rank : op.participant_ranks) {
        auto it = members.find(rank);
        if (it != members.end() && op.gradient_bearing) apply_update(it->second, shape, reduced);
      }
      continue;
    }
    ++result.replayed_ops;
    for (int rank : op.participant_ranks) {
      auto it = members.find(rank);
      if (it == members.end()) continue;
      const RecordedEntry* entry = lookup(rank, op);
      if (!entry) return mismatch(op, "no recorded payload for rank " + std::to_string(rank));
      if (entry->kind != op.kind) return mismatch(op, "recorded op kind differs");
      if (static_cast<int>(entry->words.size()) != op.payload_words)
        return mismatch(op, "recorded size " + std::to_string(entry->words.size()) + " differs");
      if (op.gradient_bearing) apply_update(it->second, shape, entry->words);
    }
  }

  result.ok = true;
  return result;
}

// ---------------------------------------------------------------------------
// Lazy init
// ---------------------------------------------------------------------------

LazyInitRegistry::LazyInitRegistry(Nanos total) {
  const Nanos graph = total * 35 / 100;
  const Nanos optimizer = total * 25 / 100;
  const Nanos cuda = total * 20 / 100;
  components_ = {
      {"graph_compile", graph, false},
      {"optimizer_alloc", optimizer, false},
      {"cuda_context", cuda, false},
      {"jit_cache", total - graph - optimizer - cuda, false},
  };
}

Nanos LazyInitRegistry::charge_untriggered() {
  Nanos charged = 0;
  for (LazyComponent& c : components_) {
    if (!c.triggered) {
      charged += c.one_time_cost;
      c.triggered = true;
    }
  }
  return charged;
}

Nanos LazyInitRegistry::untriggered_total() const {
  Nanos total = 0;
  for (const LazyComponent& c : components_)
    if (!c.triggered) total += c.one_time_cost;
  return total;
}

bool LazyInitRegistry::fully_triggered() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const LazyComponent& c) { return c.triggered; });
}

void LazyInitRegistry::set_all_triggered() {
  for (LazyComponent& c : components_) c.triggered = true;
}

// ---------------------------------------------------------------------------
// Memory ledger
// ---------------------------------------------------------------------------

const char* to_string(MemPurpose p) {
  switch (p) {
    case MemPurpose::GROUP_CHANNEL: return "GROUP_CHANNEL";
    case MemPurpose::GRADIENT_BUFFER: return "GRADIENT_BUFFER";
    case MemPurpose::PARAMS: return "PARAMS";
    case MemPurpose::OPTIMIZER: return "OPTIMIZER";
    case MemPurpose::TRANSFER_CHANNEL: return "TRANSFER_CHANNEL";
    case MemPurpose::ACTIVATIONS: return "ACTIVATIONS";
  }
  return "?";
}

void MemoryLedger::alloc(MemPurpose purpose, std::int64_t bytes, bool repurpose_required) {
  if (bytes < 0) throw WorkerError("negative allocation");
  if (purpose == MemPurpose::TRANSFER_CHANNEL && repurpose_required) {
    if (gradient_released_pool_ < bytes)
      throw MemoryOverflow(
          "transfer channel not preceded by an equal-or-larger gradient buffer release");
    gradient_released_pool_ -= bytes;
  }
  if (capacity_ > 0 && total_ + bytes > capacity_)
    throw MemoryOverflow(std::string("allocation of ") + std::to_string(bytes) + " bytes for " +
                         to_string(purpose) + " exceeds device capacity");
  allocations_[purpose] += bytes;
  total_ += bytes;
  peak_ = std::max(peak_, total_);
}

void MemoryLedger::release(MemPurpose purpose, std::int64_t bytes) {
  auto it = allocations_.find(purpose);
  if (it == allocations_.end() || it->second < bytes)
    throw WorkerError(std::string("release of ") + to_string(purpose) +
                      " exceeds its allocation");
  it->second -= bytes;
  total_ -= bytes;
  if (purpose == MemPurpose::GRADIENT_BUFFER) gradient_released_pool_ += bytes;
}

std::int64_t MemoryLedger::allocated(MemPurpose purpose) const {
  auto it = allocations_.find(purpose);
  return it == allocations_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

const std::map<int, ModelState>& CheckpointStore::load(std::uint64_t iteration) const {
  auto it = snapshots.find(iteration);
  if (it == snapshots.end())
    throw MissingSnapshot("no snapshot at iteration " + std::to_string(iteration));
  return it->second;
}

std::optional<std::uint64_t> CheckpointStore::latest_at_or_before(std::uint64_t iteration) const {
  std::optional<std::uint64_t> best;
  for (const auto& [it, _] : snapshots)
    if (it <= iteration && (!best || it > *best)) best = it;
  return best;
}

}  // namespace migsim::worker
