// SPDX-License-Identifier: Apache-2.0
#include "migsim/simcore.hpp"

namespace migsim::sim {

void Simulator::register_node(const NodeId& id, StepFn step) {
  nodes_[id] = std::move(step);
}

std::uint64_t Simulator::schedule(Nanos fire_at, const NodeId& target, Payload payload) {
  if (fire_at < now_)
    throw TimeTravel("event for '" + target + "' scheduled at " + format_ns(fire_at) +
                     " before current time " + format_ns(now_));
  Event ev{fire_at, next_seq_++, target, std::move(payload)};
  queue_.push(ev);
  return ev.seq;
}

Event Simulator::send(const Message& msg) {
  if (!nodes_.count(msg.dst)) throw UnknownNode("send to unknown node '" + msg.dst + "'");
  Nanos arrival = now_;
  if (msg.plane == Plane::CONTROL) {
    arrival += net_.control_latency_ns;
  } else {
    arrival += net_.data_latency_ns + transmission_ns(msg.size_bytes, net_.data_bandwidth_Bps);
  }
  Payload payload = msg.body;
  payload.data["_src"] = msg.src;
  std::uint64_t seq = schedule(arrival, msg.dst, std::move(payload));
  return Event{arrival, seq, msg.dst, msg.body};
}

Nanos Simulator::run_until_quiescent() {
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (ev.fire_at > horizon_)
      throw HorizonExceeded("virtual-time horizon " + format_ns(horizon_) +
                            " reached with events still pending (target '" + ev.target + "')");
    now_ = ev.fire_at;
    ++delivered_;
    auto it = nodes_.find(ev.target);
    if (it == nodes_.end())
      throw UnknownNode("event targets unknown node '" + ev.target + "'");
    it->second(*this, ev);
  }
  return now_;
}

}  // namespace migsim::sim
