// SPDX-License-Identifier: Apache-2.0
#include "migsim/trace.hpp"

#include <sstream>
#include <stdexcept>

namespace migsim {

const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::ITER_DONE: return "ITER_DONE";
    case RecordKind::PHASE: return "PHASE";
    case RecordKind::STEP_ACK: return "STEP_ACK";
    case RecordKind::TRANSFER: return "TRANSFER";
    case RecordKind::ALLOC: return "ALLOC";
    case RecordKind::FREE: return "FREE";
    case RecordKind::DOWNTIME_BEGIN: return "DOWNTIME_BEGIN";
    case RecordKind::DOWNTIME_END: return "DOWNTIME_END";
    case RecordKind::CHECKPOINT: return "CHECKPOINT";
    case RecordKind::FAILURE: return "FAILURE";
  }
  return "?";
}

RecordKind record_kind_from_string(const std::string& s) {
  static const std::pair<const char*, RecordKind> table[] = {
      {"ITER_DONE", RecordKind::ITER_DONE},
      {"PHASE", RecordKind::PHASE},
      {"STEP_ACK", RecordKind::STEP_ACK},
      {"TRANSFER", RecordKind::TRANSFER},
      {"ALLOC", RecordKind::ALLOC},
      {"FREE", RecordKind::FREE},
      {"DOWNTIME_BEGIN", RecordKind::DOWNTIME_BEGIN},
      {"DOWNTIME_END", RecordKind::DOWNTIME_END},
      {"CHECKPOINT", RecordKind::CHECKPOINT},
      {"FAILURE", RecordKind::FAILURE},
  };
  for (const auto& [name, kind] : table)
    if (s == name) return kind;
  throw std::invalid_argument("unknown trace record kind '" + s + "'");
}

void Trace::emit(Nanos time, const std::string& node, RecordKind kind, nlohmann::json detail) {
  records_.push_back({time, next_seq_++, node, kind, std::move(detail)});
}

nlohmann::json record_to_json(const TraceRecord& r) {
  return nlohmann::json{{"t", r.time},
                        {"seq", r.seq},
                        {"node", r.node},
                        {"kind", to_string(r.kind)},
                        {"detail", r.detail}};
}

TraceRecord record_from_json(const nlohmann::json& j) {
  TraceRecord r;
  r.time = j.at("t").get<Nanos>();
  r.seq = j.at("seq").get<std::uint64_t>();
  r.node = j.at("node").get<std::string>();
  r.kind = record_kind_from_string(j.at("kind").get<std::string>());
  r.detail = j.at("detail");
  return r;
}

std::string Trace::to_jsonl() const {
  std::ostringstream out;
  for (const TraceRecord& r : records_) out << record_to_json(r).dump() << '\n';
  return out.str();
}

Trace Trace::from_jsonl(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRecord r = record_from_json(nlohmann::json::parse(line));
    t.next_seq_ = r.seq + 1;
    t.records_.push_back(std::move(r));
  }
  return t;
}

std::uint64_t Trace::digest() const {
  const std::string bytes = to_jsonl();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace migsim
