// SPDX-License-Identifier: Apache-2.0
#include "migsim/fixture_io.hpp"

#include <cstring>
#include <fstream>

namespace migsim::fixture {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void words(const std::vector<std::uint64_t>& ws) {
    u64(ws.size());
    for (std::uint64_t w : ws) u64(w);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::vector<std::uint64_t> words() {
    std::uint64_t n = u64();
    std::vector<std::uint64_t> ws(n);
    for (std::uint64_t i = 0; i < n; ++i) ws[i] = u64();
    return ws;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated fixture");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint32_t kind) {
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.u32(kind);
}

void read_header(Reader& r, std::uint32_t expected_kind) {
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
  if (r.u32() != kVersion) throw FormatError("unsupported fixture version");
  if (r.u32() != expected_kind) throw FormatError("fixture kind mismatch");
}

void write_state(Writer& w, const worker::ModelState& s) {
  w.i32(s.coords.tp);
  w.i32(s.coords.pp);
  w.i32(s.coords.dp);
  w.u64(s.iteration);
  w.words(s.params);
  w.words(s.optimizer);
}

worker::ModelState read_state(Reader& r) {
  worker::ModelState s;
  s.coords.tp = r.i32();
  s.coords.pp = r.i32();
  s.coords.dp = r.i32();
  s.iteration = r.u64();
  s.params = r.words();
  s.optimizer = r.words();
  return s;
}

void write_recordings(Writer& w, const std::map<int, worker::RecordedComms>& recs) {
  w.u64(recs.size());
  for (const auto& [rank, rec] : recs) {
    w.i32(rank);
    w.u8(rec.boundary_only ? 1 : 0);
    w.u8(rec.zero_fill_gradients ? 1 : 0);
    w.u64(rec.recorded_at_iteration);
    w.u64(rec.entries.size());
    for (const auto& [key, entry] : rec.entries) {
      w.str(key.first);
      w.i32(key.second);
      w.u8(static_cast<std::uint8_t>(entry.kind));
      w.words(entry.words);
    }
  }
}

std::map<int, worker::RecordedComms> read_recordings(Reader& r) {
  std::map<int, worker::RecordedComms> recs;
  std::uint64_t ranks = r.u64();
  for (std::uint64_t i = 0; i < ranks; ++i) {
    int rank = r.i32();
    worker::RecordedComms rec;
    rec.boundary_only = r.u8() != 0;
    rec.zero_fill_gradients = r.u8() != 0;
    rec.recorded_at_iteration = r.u64();
    std::uint64_t entries = r.u64();
    for (std::uint64_t e = 0; e < entries; ++e) {
      std::string group = r.str();
      int seq = r.i32();
      worker::RecordedEntry entry;
      entry.kind = static_cast<worker::OpKind>(r.u8());
      entry.words = r.words();
      rec.entries[{std::move(group), seq}] = std::move(entry);
    }
    recs[rank] = std::move(rec);
  }
  return recs;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint_store(const worker::CheckpointStore& store) {
  Writer w;
  write_header(w, 1);
  w.u64(store.snapshots.size());
  for (const auto& [iteration, states] : store.snapshots) {
    w.u64(iteration);
    w.u64(states.size());
    for (const auto& [rank, state] : states) {
      w.i32(rank);
      write_state(w, state);
    }
  }
  write_recordings(w, store.recorded_comms);
  return w.take();
}

worker::CheckpointStore deserialize_checkpoint_store(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  read_header(r, 1);
  worker::CheckpointStore store;
  std::uint64_t snaps = r.u64();
  for (std::uint64_t i = 0; i < snaps; ++i) {
    std::uint64_t iteration = r.u64();
    std::uint64_t count = r.u64();
    auto& states = store.snapshots[iteration];
    for (std::uint64_t k = 0; k < count; ++k) {
      int rank = r.i32();
      states[rank] = read_state(r);
    }
  }
  store.recorded_comms = read_recordings(r);
  if (!r.at_end()) throw FormatError("trailing bytes after fixture");
  return store;
}

std::vector<std::uint8_t> serialize_model_state(const worker::ModelState& state) {
  Writer w;
  write_header(w, 2);
  write_state(w, state);
  return w.take();
}

worker::ModelState deserialize_model_state(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  read_header(r, 2);
  worker::ModelState s = read_state(r);
  if (!r.at_end()) throw FormatError("trailing bytes after fixture");
  return s;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace migsim::fixture
