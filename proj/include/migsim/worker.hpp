// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsim/costmodel.hpp"
#include "migsim/time.hpp"
#include "migsim/topology.hpp"

namespace migsim::worker {

struct WorkerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ReplayMismatch : WorkerError {
  using WorkerError::WorkerError;
};
struct MissingConnection : WorkerError {
  using WorkerError::WorkerError;
};
struct AlreadyRecorded : WorkerError {
  using WorkerError::WorkerError;
};
struct MemoryOverflow : WorkerError {
  using WorkerError::WorkerError;
};
struct MissingSnapshot : WorkerError {
  using WorkerError::WorkerError;
};

// ---------------------------------------------------------------------------
// Synthetic model
// ---------------------------------------------------------------------------

struct ShardCoords {
  int tp = 0;
  int pp = 0;
  int dp = 0;
  bool operator==(const ShardCoords&) const = default;
  auto operator<=>(const ShardCoords&) const = default;
};

/// Bit-deterministic training state for one device. All arithmetic is
/// wrapping 64-bit, so state identity across runs is exact equality.
struct ModelState {
  std::vector<std::uint64_t> params;
  std::vector<std::uint64_t> optimizer;  // full copy, or the 1/DP slice this device owns
  std::uint64_t iteration = 0;
  ShardCoords coords;

  bool operator==(const ModelState&) const = default;
};

struct JobShape {
  int tp = 1;
  int pp = 1;
  int dp = 1;
  bool distributed_optimizer = false;
  int layers_per_stage = 2;
  int param_words = 16;  // synthetic vector length per device
  int act_words = 4;     // activation payload words for TP/PP traffic

  int world_size() const { return tp * pp * dp; }
  int layer_count() const { return pp * layers_per_stage; }
  /// Canonical rank order: tp fastest, then dp, then pp.
  int rank_of(const ShardCoords& c) const { return c.tp + tp * (c.dp + dp * c.pp); }
  ShardCoords coords_of(int rank) const {
    return ShardCoords{rank % tp, rank / (tp * dp), (rank / tp) % dp};
  }
};

std::uint64_t mix64(std::uint64_t x);
/// The published gradient function: a splitmix-style hash of the data-parallel
/// shard id, the iteration, the layer, plus tensor-parallel slot and element
/// index for the per-word expansion.
std::uint64_t gradient_word(int dp_rank, std::uint64_t iteration, int layer, int tp_rank,
                            int elem);

ModelState initial_state(std::uint64_t seed, const JobShape& shape, const ShardCoords& coords);

/// Optimizer slice owned by a dp rank: [dp*len/DP, (dp+1)*len/DP).
std::pair<int, int> optimizer_slice(int dp_rank, int dp_size, int param_words);

// ---------------------------------------------------------------------------
// Collective schedule
// ---------------------------------------------------------------------------

enum class OpKind { ALL_REDUCE, SEND_RECV, BARRIER };

const char* to_string(OpKind k);

/// One collective in the fixed per-iteration program: TP all-reduce per layer,
/// PP send/recv per stage boundary (forward then backward), one DP gradient
/// all-reduce per DP group, one global barrier.
struct CollOp {
  OpKind kind = OpKind::ALL_REDUCE;
  std::string group_id;
  int seq_in_group = 0;
  std::vector<int> participant_ranks;  // global ranks, ascending
  int src_rank = -1;                   // SEND_RECV only
  int dst_rank = -1;
  int payload_words = 0;
  bool gradient_bearing = false;  // zero-fillable during recording
};

std::vector<CollOp> iteration_schedule(const JobShape& shape);

std::string tp_group_id(int pp, int dp);
std::string pp_group_id(int tp, int dp);
std::string dp_group_id(int tp, int pp);

// ---------------------------------------------------------------------------
// Recorded communications
// ---------------------------------------------------------------------------

struct RecordedEntry {
  OpKind kind = OpKind::ALL_REDUCE;
  std::vector<std::uint64_t> words;

  bool operator==(const RecordedEntry&) const = default;
};

/// Boundary traffic captured for one rank during the first iteration, keyed by
/// (group id, op sequence index within that group).
struct RecordedComms {
  std::map<std::pair<std::string, int>, RecordedEntry> entries;
  std::uint64_t recorded_at_iteration = 0;
  bool boundary_only = true;
  bool zero_fill_gradients = true;

  bool operator==(const RecordedComms&) const = default;
};

// ---------------------------------------------------------------------------
// Lazy initialization
// ---------------------------------------------------------------------------

struct LazyComponent {
  std::string name;
  Nanos one_time_cost = 0;
  bool triggered = false;
};

class LazyInitRegistry {
 public:
  LazyInitRegistry() = default;
  /// Splits the total over the named one-time components; parts always sum to
  /// exactly the total.
  explicit LazyInitRegistry(Nanos total);

  /// Cost of everything not yet triggered; marks it triggered (charged once).
  Nanos charge_untriggered();
  Nanos untriggered_total() const;
  bool fully_triggered() const;
  void set_all_triggered();
  const std::vector<LazyComponent>& components() const { return components_; }

 private:
  std::vector<LazyComponent> components_;
};

// ---------------------------------------------------------------------------
// Memory ledger
// ---------------------------------------------------------------------------

enum class MemPurpose {
  GROUP_CHANNEL,
  GRADIENT_BUFFER,
  PARAMS,
  OPTIMIZER,
  TRANSFER_CHANNEL,
  ACTIVATIONS,
};

const char* to_string(MemPurpose p);

/// Per-device byte accounting. The transfer channel on a leaver may only be
/// carved out of a previously released gradient buffer (buffer repurposing);
/// violating that, or exceeding capacity, throws MemoryOverflow.
class MemoryLedger {
 public:
  explicit MemoryLedger(std::int64_t capacity_bytes = 0) : capacity_(capacity_bytes) {}

  void alloc(MemPurpose purpose, std::int64_t bytes, bool repurpose_required = false);
  void release(MemPurpose purpose, std::int64_t bytes);

  std::int64_t allocated(MemPurpose purpose) const;
  std::int64_t total_allocated() const { return total_; }
  std::int64_t peak_observed() const { return peak_; }
  std::int64_t capacity() const { return capacity_; }

 private:
  std::map<MemPurpose, std::int64_t> allocations_;
  std::int64_t total_ = 0;
  std::int64_t peak_ = 0;
  std::int64_t capacity_ = 0;
  std::int64_t gradient_released_pool_ = 0;
};

/// Byte sizes behind the ledger; config section [memory].
struct MemoryModel {
  std::int64_t params_bytes = 10'000'000'000;
  std::int64_t optimizer_bytes = 30'000'000'000;  // per device with the distributed optimizer
  std::int64_t gradient_buffer_bytes = 10'000'000'000;
  std::int64_t activations_bytes = 15'000'000'000;
  std::int64_t channel_intra_bytes = 4'500'000'000;
  std::int64_t channel_inter_bytes = 1'500'000'000;
  std::int64_t transfer_channel_bytes = 6'000'000'000;
  std::int64_t capacity_bytes = 80'000'000'000;

  std::int64_t optimizer_resident(bool distributed_optimizer, int dp) const {
    return distributed_optimizer ? optimizer_bytes : optimizer_bytes * dp;
  }
  std::int64_t channel_bytes() const { return channel_intra_bytes + channel_inter_bytes; }
  std::int64_t steady_total(bool distributed_optimizer, int dp) const {
    return params_bytes + optimizer_resident(distributed_optimizer, dp) +
           gradient_buffer_bytes + activations_bytes + channel_bytes();
  }
};

// ---------------------------------------------------------------------------
// Cluster-synchronous iteration
// ---------------------------------------------------------------------------

enum class IterMode { NORMAL, RECORD, SANDBOX };

/// Advances every worker one iteration: per-layer gradients from the published
/// mixing function, a wrapping-sum all-reduce across each DP group, synthetic
/// PP activation traffic, optimizer slice update. States stay bit-identical
/// across DP replicas. In RECORD mode (iteration 0 only) boundary payloads are
/// captured per rank.
void run_cluster_iteration(std::vector<ModelState>& states, const JobShape& shape,
                           const std::vector<std::string>& rank_to_host, IterMode mode,
                           std::map<int, RecordedComms>* recordings_out = nullptr,
                           bool boundary_only = true, bool zero_fill_gradients = true);

/// RECORD-mode convenience matching the spec operation: requires iteration 0,
/// returns per-rank boundary recordings, leaves states advanced by one
/// iteration. The interception hook exists only for this call.
std::map<int, RecordedComms> record_first_iteration(std::vector<ModelState>& states,
                                                    const JobShape& shape,
                                                    const std::vector<std::string>& rank_to_host,
                                                    bool boundary_only = true,
                                                    bool zero_fill_gradients = true);

struct SandboxResult {
  bool ok = false;
  std::string mismatch;  // set when !ok
  int replayed_ops = 0;
  int local_ops = 0;
};

/// One emulated iteration for the sandboxed ranks: ops fully inside the
/// sandbox execute against the member copies, ops touching the boundary are
/// answered from the recordings, barriers return immediately. The advanced
/// state is discarded by the caller; success means all lazy flags may be set.
SandboxResult sandbox_iteration(const std::vector<ModelState>& member_states,
                                const JobShape& shape,
                                const std::vector<std::string>& rank_to_host,
                                const std::set<std::string>& sandbox_hosts,
                                const std::map<int, RecordedComms>& recordings);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct CheckpointStore {
  std::map<std::uint64_t, std::map<int, ModelState>> snapshots;  // iteration -> rank -> state
  std::map<int, RecordedComms> recorded_comms;                   // stored alongside

  void save(std::uint64_t iteration, const std::map<int, ModelState>& states) {
    snapshots[iteration] = states;
  }
  const std::map<int, ModelState>& load(std::uint64_t iteration) const;
  /// Latest snapshot at or before `iteration`.
  std::optional<std::uint64_t> latest_at_or_before(std::uint64_t iteration) const;
};

}  // namespace migsim::worker
