#include <doctest.h>

#include <cmath>

#include "parax/consensus/chain.hpp"
#include "parax/ledger/error.hpp"
#include "parax/net/simulator.hpp"

using namespace parax;
using namespace parax::net;

namespace {

Simulator servers(NetConfig cfg, std::uint32_t n) {
  Simulator sim(cfg);
  for (std::uint32_t i = 1; i <= n; ++i) sim.spawn_node(make_profile(NodeId{i}, NodeClass::Server, 8, std::nullopt, cfg.seed));
  return sim;
}

struct World : EventSink {
  Simulator sim;
  consensus::Chain chain;
  std::vector<consensus::CycleReport> reports;

  static consensus::LedgerState genesis() {
    consensus::LedgerState s;
    for (int i = 0; i < 8; ++i) s.touch(KeyPair::derive(2, "u" + std::to_string(i)).account()).balance = 1000;
    s.supply = 8000;
    return s;
  }

  explicit World(std::uint32_t n, std::uint64_t seed = 2)
      : sim(servers({10, 20, 0.0, 500, seed}, n)), chain(config(seed), sim.nodes(), genesis(), sim) {
    sim.set_sink(this);
  }

  static consensus::ChainConfig config(std::uint64_t seed) {
    consensus::ChainConfig c;
    c.seed = seed;
    c.group_size = 4;
    c.relay_bound = 2;
    return c;
  }

  void on_event(Simulator& s, const SimEvent& ev) override {
    if (ev.kind == EventKind::CycleTick) reports.push_back(chain.run_cycle(s));
  }

  Digest pay(int from, Amount value) {
    TxDraft d;
    const auto kp = KeyPair::derive(2, "u" + std::to_string(from));
    d.to = KeyPair::derive(2, "u" + std::to_string((from + 1) % 8)).account();
    d.value = value;
    d.nonce = chain.next_nonce(kp.account());
    return chain.submit(create_transaction(kp, d, NodeId{1}, sim.cycle()));
  }
};

}  // namespace

TEST_SUITE("net") {

TEST_CASE("spawn, duplicate ids and unknown nodes") {
  auto sim = servers({}, 8);
  CHECK(sim.active_nodes().size() == 8);
  CHECK_THROWS_AS(sim.spawn_node(make_profile(NodeId{3}, NodeClass::Server, 1, std::nullopt, 1)), Error);
  CHECK_THROWS_AS(sim.inject_fault(NodeId{99}, FaultClass::Crash, 0, 1), Error);
  CHECK_THROWS_AS(sim.profile(NodeId{99}), Error);
}

TEST_CASE("mobile availability 0.5 over 1000 cycles is within 3 sigma") {
  Simulator sim(NetConfig{});
  sim.spawn_node(make_profile(NodeId{1}, NodeClass::Mobile, 1, 0.5, 1));
  int up = 0;
  for (std::uint64_t c = 0; c < 1000; ++c) up += sim.up_in_cycle(NodeId{1}, c);
  const double sigma = std::sqrt(1000 * 0.25);
  CHECK(std::abs(up - 500) <= 3 * sigma);
}

TEST_CASE("drop probability 0 and 1") {
  auto sim = servers({10, 20, 0.0, 500, 1}, 2);
  int delivered = 0;
  for (int i = 0; i < 100; ++i) delivered += sim.send(NodeId{1}, NodeId{2}, "m", 1).delivered;
  CHECK(delivered == 100);
  auto lossy = servers({10, 20, 1.0, 500, 1}, 2);
  delivered = 0;
  for (int i = 0; i < 100; ++i) delivered += lossy.send(NodeId{1}, NodeId{2}, "m", 1).delivered;
  CHECK(delivered == 0);
  CHECK(lossy.dropped() == 100);
}

TEST_CASE("zero jitter delivers at exactly send + base latency") {
  auto sim = servers({10, 0, 0.0, 500, 1}, 2);
  sim.run_until_time(37);
  for (int i = 0; i < 5; ++i) CHECK(sim.send(NodeId{1}, NodeId{2}, "m", 1).deliver_at == 47);
  int seen = 0;
  while (auto ev = sim.step()) {
    if (ev->kind == EventKind::Deliver) {
      CHECK(ev->at == 47);
      ++seen;
    }
    if (sim.now() > 100) break;
  }
  CHECK(seen == 5);
}

TEST_CASE("idle step only advances the clock and run_until_cycle executes exactly that many ticks") {
  Simulator idle(NetConfig{});
  const auto ev = idle.step();
  REQUIRE(ev);
  CHECK(ev->kind == EventKind::CycleTick);
  CHECK(idle.now() == 500);
  CHECK(idle.sent() == 0);
  auto sim = servers({}, 3);
  const auto r = sim.run_until_cycle(10);
  CHECK(r.ticks == 10);
  CHECK(sim.cycle() == 10);
}

TEST_CASE("same seed gives identical transcripts, different seed does not") {
  auto run = [](std::uint64_t seed) {
    Simulator sim({10, 20, 0.2, 500, seed});
    for (std::uint32_t i = 1; i <= 4; ++i) sim.spawn_node(make_profile(NodeId{i}, NodeClass::Mobile, 1, 0.6, seed));
    for (int i = 0; i < 200; ++i) sim.send(NodeId{1 + static_cast<std::uint32_t>(i % 4)}, NodeId{1 + static_cast<std::uint32_t>((i + 1) % 4)}, "m", 1, 0, DropPolicy::Sampled, 25 * i);
    sim.inject_fault(NodeId{2}, FaultClass::Crash, 3, 5);
    sim.run_until_cycle(12);
    return sim.transcript();
  };
  CHECK(run(4) == run(4));
  CHECK(run(4) != run(5));
}

TEST_CASE("fault windows are inclusive and revert afterwards") {
  auto sim = servers({}, 4);
  sim.inject_fault(NodeId{2}, FaultClass::Crash, 3, 5);
  CHECK(sim.fault_of(NodeId{2}, 2) == FaultClass::Honest);
  CHECK(sim.fault_of(NodeId{2}, 3) == FaultClass::Crash);
  CHECK(sim.fault_of(NodeId{2}, 5) == FaultClass::Crash);
  CHECK(sim.fault_of(NodeId{2}, 6) == FaultClass::Honest);
  sim.run_until_cycle(4);
  CHECK(sim.active_nodes().size() == 3);
  sim.run_until_cycle(7);
  CHECK(sim.active_nodes().size() == 4);
}

TEST_CASE("crashing every validator of the only committee finalizes nothing in the window") {
  World w(4);
  for (std::uint32_t i = 1; i <= 4; ++i) w.sim.inject_fault(NodeId{i}, FaultClass::Crash, 0, 5);
  const auto h = w.pay(0, 10);
  w.sim.run_until_cycle(6);
  for (const auto& r : w.reports) CHECK(r.finalized == 0);
  CHECK(w.chain.blocks().empty());
  const auto out = w.chain.outcome(h);
  REQUIRE(out);
  CHECK(out->status != dag::Status::Finalized);
}

TEST_CASE("one tampering validator out of four does not stop the quorum") {
  for (std::uint32_t bad = 1; bad <= 4; ++bad) {
    World w(4);
    w.sim.inject_fault(NodeId{bad}, FaultClass::TamperSegment, 0, 100);
    const auto h = w.pay(0, 10);
    w.sim.run_until_cycle(3);
    const auto out = w.chain.outcome(h);
    REQUIRE(out);
    CHECK(out->status == dag::Status::Finalized);
  }
}

TEST_CASE("honest chain finalizes a valid transaction with three chained certificates") {
  World w(4);
  const auto h = w.pay(0, 10);
  w.sim.run_until_cycle(2);
  const auto out = w.chain.outcome(h);
  REQUIRE(out);
  CHECK(out->status == dag::Status::Finalized);
  REQUIRE(out->height);
  const auto& b = w.chain.blocks().at(*out->height - 1);
  REQUIRE(b.entries.size() == 1);
  const auto& e = b.entries[0];
  CHECK(e.initiator.stage == Stage::Initiator);
  CHECK(e.validator.stage == Stage::Validator);
  CHECK(b.constructor_cert.stage == Stage::Constructor);
  CHECK(e.initiator.subject == pre_hash(e.tx));
  CHECK(e.validator.subject == validator_subject(e.initiator.cert_hash, h));
  CHECK(b.constructor_cert.subject == consensus::block_subject(b));
}

}
