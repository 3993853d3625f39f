// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "migsim/time.hpp"

namespace migsim::sim {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TimeTravel : SimError {
  using SimError::SimError;
};
struct UnknownNode : SimError {
  using SimError::SimError;
};
struct HorizonExceeded : SimError {
  using SimError::SimError;
};

using NodeId = std::string;

struct Payload {
  std::string kind;
  nlohmann::json data = nlohmann::json::object();
};

enum class Plane { CONTROL, DATA };

struct Message {
  NodeId src;
  NodeId dst;
  Plane plane = Plane::CONTROL;
  std::int64_t size_bytes = 0;
  Payload body;
};

struct Event {
  Nanos fire_at = 0;
  std::uint64_t seq = 0;  // assigned at scheduling time; total order is (fire_at, seq)
  NodeId target;
  Payload payload;
};

struct NetworkParams {
  Nanos control_latency_ns = millis(1);
  Nanos data_latency_ns = 0;
  std::int64_t data_bandwidth_Bps = 1;  // control plane carries no size term
};

/// Single-threaded deterministic event loop. Node processes are sequential
/// step functions invoked one event at a time; ties break on scheduling order.
class Simulator {
 public:
  using StepFn = std::function<void(Simulator&, const Event&)>;

  explicit Simulator(NetworkParams net = {}, Nanos horizon = seconds(1'000'000))
      : net_(net), horizon_(horizon) {}

  void register_node(const NodeId& id, StepFn step);
  bool has_node(const NodeId& id) const { return nodes_.count(id) > 0; }

  Nanos now() const { return now_; }
  const NetworkParams& network() const { return net_; }

  std::uint64_t schedule(Nanos fire_at, const NodeId& target, Payload payload);
  std::uint64_t schedule_in(Nanos delay, const NodeId& target, Payload payload) {
    return schedule(now_ + delay, target, std::move(payload));
  }

  /// Delivery time: now + plane latency + ceil(size / plane bandwidth); the
  /// control plane is latency-only.
  Event send(const Message& msg);

  /// Delivers everything in (fire_at, seq) order. Returns the final virtual
  /// time. Throws HorizonExceeded if the configured horizon is hit with work
  /// still queued (livelock guard).
  Nanos run_until_quiescent();

  std::uint64_t scheduled_count() const { return next_seq_; }
  std::uint64_t delivered_count() const { return delivered_; }

 private:
  struct QueueOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  NetworkParams net_;
  Nanos horizon_;
  Nanos now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t delivered_ = 0;
  std::map<NodeId, StepFn> nodes_;
  std::priority_queue<Event, std::vector<Event>, QueueOrder> queue_;
};

}  // namespace migsim::sim
