#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "parax/ledger/keys.hpp"
#include "parax/ledger/types.hpp"

namespace parax::net {

enum class NodeClass : std::uint8_t { Server, Mobile };
enum class FaultClass : std::uint8_t { Honest, Crash, Equivocate, TamperSegment };

std::string_view node_class_name(NodeClass c);
std::string_view fault_name(FaultClass f);
std::optional<FaultClass> fault_from_name(std::string_view s);

inline constexpr double kDefaultMobileAvailability = 0.75;

struct NodeProfile {
  NodeId id{};
  NodeClass cls = NodeClass::Server;
  std::uint32_t capacity = 64;  // resource units per cycle
  double availability = 1.0;    // per-cycle probability of being up
  FaultClass fault = FaultClass::Honest;
  KeyPair keys;
};

/// Keys derive from the scenario seed and the node id.
NodeProfile make_profile(NodeId id, NodeClass cls, std::uint32_t capacity,
                         std::optional<double> availability, std::uint64_t seed,
                         FaultClass fault = FaultClass::Honest);

using SimTime = std::uint64_t;  // milliseconds

enum class EventKind : std::uint8_t { Deliver, CycleTick, NodeUp, NodeDown, FaultToggle };

std::string_view event_name(EventKind k);

struct Message {
  std::uint64_t id = 0;
  NodeId from{};
  NodeId to{};
  std::string kind;
  std::size_t size = 0;
  std::uint64_t tag = 0;  // caller data, e.g. an index into its own table
};

struct SimEvent {
  SimTime at = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::CycleTick;
  NodeId node{};
  std::uint64_t cycle = 0;  // CycleTick: the cycle being closed
  std::optional<Message> message;
  FaultClass fault = FaultClass::Honest;
};

struct NetConfig {
  SimTime base_latency_ms = 10;
  SimTime jitter_ms = 20;
  double drop_prob = 0.0;
  SimTime cycle_ms = 500;
  std::uint64_t seed = 1;
};

enum class DropPolicy { Sampled, ForceDrop, ForceDeliver };

struct SendOutcome {
  bool delivered = false;
  SimTime deliver_at = 0;
  std::uint64_t message_id = 0;
};

class Simulator;

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_event(Simulator& sim, const SimEvent& ev) = 0;
};

struct RunReport {
  std::uint64_t events = 0;
  std::uint64_t ticks = 0;
  SimTime now = 0;
};

/// Discrete-event network. Events run in (time, insertion) order. Cycle c
/// spans [c*cycle_ms, (c+1)*cycle_ms) and is closed by the CycleTick at
/// its end. Ids never registered with spawn_node are external endpoints
/// (clients, relay) and are always reachable.
class Simulator {
 public:
  explicit Simulator(NetConfig cfg);

  /// Throws DuplicateNode.
  NodeId spawn_node(NodeProfile profile);

  /// Samples latency and loss now; a delivered message becomes a Deliver
  /// event. `depart` lets a sender schedule into the future.
  SendOutcome send(NodeId from, NodeId to, std::string kind, std::size_t size,
                   std::uint64_t tag = 0, DropPolicy policy = DropPolicy::Sampled,
                   std::optional<SimTime> depart = std::nullopt);

  std::optional<SimEvent> step();
  RunReport run_until_time(SimTime t);
  /// Runs until `cycles` CycleTicks have executed in total.
  RunReport run_until_cycle(std::uint64_t cycles);

  /// The node behaves as `fault` during cycles [from_cycle, to_cycle].
  /// Throws UnknownNode.
  void inject_fault(NodeId node, FaultClass fault, std::uint64_t from_cycle, std::uint64_t to_cycle);

  void set_sink(EventSink* sink) { sink_ = sink; }

  bool is_node(NodeId n) const { return profiles_.count(n) != 0; }
  bool is_up(NodeId n) const;
  bool up_in_cycle(NodeId n, std::uint64_t cycle);
  FaultClass fault_of(NodeId n, std::uint64_t cycle) const;
  const NodeProfile& profile(NodeId n) const;
  std::vector<NodeId> nodes() const;
  std::vector<NodeId> active_nodes() const;  // up and not crashed this cycle

  SimTime now() const { return now_; }
  std::uint64_t cycle() const { return ticks_; }
  SimTime cycle_start(std::uint64_t c) const { return c * cfg_.cycle_ms; }
  SimTime cycle_end(std::uint64_t c) const { return (c + 1) * cfg_.cycle_ms; }
  const NetConfig& config() const { return cfg_; }

  /// Independent stream for a named consumer (workload, swaps).
  std::mt19937_64 fork_rng(std::string_view label) const;

  const std::vector<std::string>& transcript() const { return transcript_; }
  void keep_transcript(bool on) { keep_transcript_ = on; }
  std::uint64_t sent() const { return sent_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  struct FaultWindow {
    NodeId node{};
    FaultClass fault = FaultClass::Honest;
    std::uint64_t from = 0;
    std::uint64_t to = 0;
  };
  struct Availability {
    std::mt19937_64 rng;
    std::vector<bool> states;  // by cycle
  };

  void push(SimEvent ev);
  void log(const SimEvent& ev, std::string_view note = {});
  double unit();
  bool up_at(NodeId n, SimTime t);
  void schedule_availability(std::uint64_t cycle);

  NetConfig cfg_;
  std::mt19937_64 rng_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::map<NodeId, NodeProfile> profiles_;
  std::map<NodeId, bool> up_;
  std::map<NodeId, Availability> availability_;
  std::vector<FaultWindow> faults_;
  std::vector<std::string> transcript_;
  EventSink* sink_ = nullptr;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t ticks_ = 0;
  std::uint64_t next_message_ = 1;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
  bool keep_transcript_ = true;
};

/// Uniform double in [0, 1) from a 64-bit generator.
double unit_interval(std::mt19937_64& rng);
/// Uniform integer in [0, n); n > 0.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

}  // namespace parax::net
