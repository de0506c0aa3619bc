#include "parax/net/simulator.hpp"

#include <cstdio>

#include "parax/ledger/error.hpp"
#include "parax/ledger/hash.hpp"

namespace parax::net {

std::string_view node_class_name(NodeClass c) { return c == NodeClass::Server ? "server" : "mobile"; }

std::string_view fault_name(FaultClass f) {
  switch (f) {
    case FaultClass::Honest: return "honest";
    case FaultClass::Crash: return "crash";
    case FaultClass::Equivocate: return "equivocate";
    case FaultClass::TamperSegment: return "tamper_segment";
  }
  return "?";
}

std::optional<FaultClass> fault_from_name(std::string_view s) {
  for (auto f : {FaultClass::Honest, FaultClass::Crash, FaultClass::Equivocate,
                 FaultClass::TamperSegment}) {
    if (fault_name(f) == s) return f;
  }
  return std::nullopt;
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::Deliver: return "deliver";
    case EventKind::CycleTick: return "tick";
    case EventKind::NodeUp: return "up";
    case EventKind::NodeDown: return "down";
    case EventKind::FaultToggle: return "fault";
  }
  return "?";
}

NodeProfile make_profile(NodeId id, NodeClass cls, std::uint32_t capacity,
                         std::optional<double> availability, std::uint64_t seed, FaultClass fault) {
  NodeProfile p;
  p.id = id;
  p.cls = cls;
  p.capacity = capacity;
  p.availability = availability.value_or(cls == NodeClass::Mobile ? kDefaultMobileAvailability : 1.0);
  p.fault = fault;
  p.keys = KeyPair::derive(seed, "node/" + std::to_string(raw(id)));
  return p;
}

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

namespace {
std::uint64_t stream_seed(std::uint64_t seed, std::string_view label) {
  return Hasher().update_u64(seed).update(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()),
                                                   label.size()))
      .finish()
      .prefix64();
}
}  // namespace

Simulator::Simulator(NetConfig cfg) : cfg_(cfg), rng_(stream_seed(cfg.seed, "net")) {
  if (cfg_.cycle_ms == 0) cfg_.cycle_ms = 1;
  SimEvent tick;
  tick.at = cfg_.cycle_ms;
  tick.kind = EventKind::CycleTick;
  tick.cycle = 0;
  push(tick);
}

std::mt19937_64 Simulator::fork_rng(std::string_view label) const {
  return std::mt19937_64(stream_seed(cfg_.seed, label));
}

void Simulator::push(SimEvent ev) {
  ev.seq = seq_++;
  queue_.push(std::move(ev));
}

double Simulator::unit() { return unit_interval(rng_); }

NodeId Simulator::spawn_node(NodeProfile profile) {
  const NodeId id = profile.id;
  if (profiles_.count(id)) throw Error(Errc::DuplicateNode, "node " + std::to_string(raw(id)));
  if (profile.cls == NodeClass::Mobile) {
    availability_.emplace(
        id, Availability{std::mt19937_64(stream_seed(cfg_.seed, "mobile/" + std::to_string(raw(id)))), {}});
  }
  profiles_.emplace(id, std::move(profile));
  up_[id] = true;
  up_[id] = up_in_cycle(id, ticks_);
  if (keep_transcript_) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%llu - spawn node=%u %s", static_cast<unsigned long long>(now_),
                  raw(id), up_[id] ? "up" : "down");
    transcript_.emplace_back(buf);
  }
  return id;
}

bool Simulator::up_in_cycle(NodeId n, std::uint64_t cycle) {
  auto it = availability_.find(n);
  if (it == availability_.end()) return true;
  auto& a = it->second;
  const double p = profiles_.at(n).availability;
  while (a.states.size() <= cycle) a.states.push_back(unit_interval(a.rng) < p);
  return a.states[cycle];
}

bool Simulator::up_at(NodeId n, SimTime t) {
  if (!profiles_.count(n)) return true;
  return up_in_cycle(n, t / cfg_.cycle_ms);
}

bool Simulator::is_up(NodeId n) const {
  auto it = up_.find(n);
  return it == up_.end() || it->second;
}

FaultClass Simulator::fault_of(NodeId n, std::uint64_t cycle) const {
  auto p = profiles_.find(n);
  if (p == profiles_.end()) return FaultClass::Honest;
  FaultClass f = p->second.fault;
  for (const auto& w : faults_) {
    if (w.node == n && cycle >= w.from && cycle <= w.to) f = w.fault;
  }
  return f;
}

const NodeProfile& Simulator::profile(NodeId n) const {
  auto it = profiles_.find(n);
  if (it == profiles_.end()) throw Error(Errc::UnknownNode, "node " + std::to_string(raw(n)));
  return it->second;
}

std::vector<NodeId> Simulator::nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : profiles_) out.push_back(id);
  return out;
}

std::vector<NodeId> Simulator::active_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : profiles_) {
    if (is_up(id) && fault_of(id, ticks_) != FaultClass::Crash) out.push_back(id);
  }
  return out;
}

void Simulator::inject_fault(NodeId node, FaultClass fault, std::uint64_t from_cycle,
                             std::uint64_t to_cycle) {
  if (!profiles_.count(node)) throw Error(Errc::UnknownNode, "node " + std::to_string(raw(node)));
  faults_.push_back({node, fault, from_cycle, to_cycle});
  SimEvent on;
  on.kind = EventKind::FaultToggle;
  on.node = node;
  on.fault = fault;
  on.cycle = from_cycle;
  on.at = std::max(now_, cycle_start(from_cycle));
  push(on);
  SimEvent off = on;
  off.fault = FaultClass::Honest;
  off.cycle = to_cycle + 1;
  off.at = std::max(now_, cycle_end(to_cycle)) + 1;
  push(off);
}

SendOutcome Simulator::send(NodeId from, NodeId to, std::string kind, std::size_t size,
                            std::uint64_t tag, DropPolicy policy, std::optional<SimTime> depart) {
  SendOutcome out;
  out.message_id = next_message_++;
  ++sent_;
  const SimTime t0 = std::max(now_, depart.value_or(now_));
  const SimTime latency = cfg_.base_latency_ms + (cfg_.jitter_ms ? uniform_below(rng_, cfg_.jitter_ms + 1) : 0);
  const bool sampled_drop = cfg_.drop_prob > 0.0 && unit() < cfg_.drop_prob;
  out.deliver_at = t0 + latency;

  const char* why = nullptr;
  if (policy == DropPolicy::ForceDrop) {
    why = "forced";
  } else if (policy == DropPolicy::Sampled && sampled_drop) {
    why = "loss";
  } else if (!up_at(from, t0)) {
    why = "sender-down";
  } else if (!up_at(to, out.deliver_at)) {
    why = "receiver-down";
  }

  Message m{out.message_id, from, to, std::move(kind), size, tag};
  if (why) {
    ++dropped_;
    if (keep_transcript_) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%llu - drop #%llu %u->%u %s %zu (%s)",
                    static_cast<unsigned long long>(t0), static_cast<unsigned long long>(m.id),
                    raw(from), raw(to), m.kind.c_str(), size, why);
      transcript_.emplace_back(buf);
    }
    return out;
  }
  out.delivered = true;
  SimEvent ev;
  ev.at = out.deliver_at;
  ev.kind = EventKind::Deliver;
  ev.node = to;
  ev.message = std::move(m);
  push(std::move(ev));
  return out;
}

void Simulator::log(const SimEvent& ev, std::string_view note) {
  if (!keep_transcript_) return;
  char buf[192];
  const auto at = static_cast<unsigned long long>(ev.at);
  const auto seq = static_cast<unsigned long long>(ev.seq);
  switch (ev.kind) {
    case EventKind::Deliver: {
      const auto& m = *ev.message;
      std::snprintf(buf, sizeof buf, "%llu %llu deliver #%llu %u->%u %s %zu", at, seq,
                    static_cast<unsigned long long>(m.id), raw(m.from), raw(m.to), m.kind.c_str(), m.size);
      break;
    }
    case EventKind::CycleTick:
      std::snprintf(buf, sizeof buf, "%llu %llu tick cycle=%llu", at, seq,
                    static_cast<unsigned long long>(ev.cycle));
      break;
    case EventKind::NodeUp:
    case EventKind::NodeDown:
      std::snprintf(buf, sizeof buf, "%llu %llu %s node=%u", at, seq, event_name(ev.kind).data(), raw(ev.node));
      break;
    case EventKind::FaultToggle:
      std::snprintf(buf, sizeof buf, "%llu %llu fault node=%u %s cycle=%llu", at, seq, raw(ev.node),
                    fault_name(ev.fault).data(), static_cast<unsigned long long>(ev.cycle));
      break;
  }
  std::string line(buf);
  if (!note.empty()) line.append(" ").append(note);
  transcript_.push_back(std::move(line));
}

void Simulator::schedule_availability(std::uint64_t cycle) {
  for (auto& [id, _] : availability_) {
    const bool next = up_in_cycle(id, cycle);
    if (next == up_[id]) continue;
    SimEvent ev;
    ev.at = cycle_start(cycle);
    ev.kind = next ? EventKind::NodeUp : EventKind::NodeDown;
    ev.node = id;
    ev.cycle = cycle;
    push(ev);
  }
}

std::optional<SimEvent> Simulator::step() {
  if (queue_.empty()) return std::nullopt;
  SimEvent ev = queue_.top();
  queue_.pop();
  now_ = ev.at;
  switch (ev.kind) {
    case EventKind::CycleTick: {
      log(ev);
      if (sink_) sink_->on_event(*this, ev);
      ++ticks_;
      schedule_availability(ticks_);
      SimEvent next;
      next.at = cycle_end(ticks_);
      next.kind = EventKind::CycleTick;
      next.cycle = ticks_;
      push(next);
      return ev;
    }
    case EventKind::NodeUp:
    case EventKind::NodeDown:
      up_[ev.node] = ev.kind == EventKind::NodeUp;
      break;
    case EventKind::Deliver:
    case EventKind::FaultToggle:
      break;
  }
  log(ev);
  if (sink_) sink_->on_event(*this, ev);
  return ev;
}

RunReport Simulator::run_until_time(SimTime t) {
  RunReport r;
  const auto start_ticks = ticks_;
  while (!queue_.empty() && queue_.top().at <= t) {
    step();
    ++r.events;
  }
  now_ = std::max(now_, t);
  r.ticks = ticks_ - start_ticks;
  r.now = now_;
  return r;
}

RunReport Simulator::run_until_cycle(std::uint64_t cycles) {
  RunReport r;
  const auto start_ticks = ticks_;
  while (ticks_ < cycles && step()) ++r.events;
  r.ticks = ticks_ - start_ticks;
  r.now = now_;
  return r;
}

}  // namespace parax::net
