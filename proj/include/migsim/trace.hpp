// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "migsim/time.hpp"

namespace migsim {

enum class RecordKind {
  ITER_DONE,
  PHASE,
  STEP_ACK,
  TRANSFER,
  ALLOC,
  FREE,
  DOWNTIME_BEGIN,
  DOWNTIME_END,
  CHECKPOINT,
  FAILURE,
};

const char* to_string(RecordKind k);
RecordKind record_kind_from_string(const std::string& s);

struct TraceRecord {
  Nanos time = 0;
  std::uint64_t seq = 0;  // strict total order with time
  std::string node;
  RecordKind kind = RecordKind::PHASE;
  nlohmann::json detail = nlohmann::json::object();
};

/// Append-only record stream for one scenario run.
class Trace {
 public:
  void emit(Nanos time, const std::string& node, RecordKind kind, nlohmann::json detail);
  const std::vector<TraceRecord>& records() const { return records_; }

  std::string to_jsonl() const;
  static Trace from_jsonl(const std::string& text);

  /// FNV-1a 64 over the serialized stream; used for determinism checks.
  std::uint64_t digest() const;

 private:
  std::vector<TraceRecord> records_;
  std::uint64_t next_seq_ = 0;
};

nlohmann::json record_to_json(const TraceRecord& r);
TraceRecord record_from_json(const nlohmann::json& j);

}  // namespace migsim
