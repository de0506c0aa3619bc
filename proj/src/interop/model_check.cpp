#include "parax/interop/model_check.hpp"

#include <functional>

#include "parax/ledger/error.hpp"

namespace parax::interop {

namespace {

constexpr std::uint32_t kRelayA = 0x7000'0001;
constexpr std::uint32_t kRelayB = 0x7000'0002;
constexpr std::uint32_t kEndpointA = 0x7000'0010;
constexpr std::uint32_t kEndpointB = 0x7000'0011;
constexpr std::uint32_t kFirstParty = 0x7100'0000;

class WorldSink : public net::EventSink {
 public:
  WorldSink(consensus::Chain& a, consensus::Chain& b, SwapCoordinator& coord, std::optional<StallPlacement> stall)
      : a_(a), b_(b), coord_(coord), stall_(stall) {}

  void on_event(net::Simulator& sim, const net::SimEvent& ev) override {
    if (ev.kind == net::EventKind::Deliver && ev.message && coord_.handles(*ev.message)) {
      coord_.on_deliver(sim, *ev.message);
    } else if (ev.kind == net::EventKind::CycleTick) {
      std::array<bool, 2> stalled{};
      if (stall_ && ev.cycle >= stall_->from_cycle && ev.cycle < stall_->from_cycle + stall_->length) {
        stalled[static_cast<std::size_t>(stall_->side)] = true;
      }
      run_pair_tick(sim, a_, b_, &coord_, stalled);
    }
  }

 private:
  consensus::Chain& a_;
  consensus::Chain& b_;
  SwapCoordinator& coord_;
  std::optional<StallPlacement> stall_;
};

}  // namespace

std::string_view terminal_name(Terminal t) {
  switch (t) {
    case Terminal::Published: return "published";
    case Terminal::Refunded: return "refunded";
    case Terminal::Mixed: return "mixed";
    case Terminal::Stuck: return "stuck";
  }
  return "?";
}

LegFlows leg_flows(const consensus::Chain& chain, const Digest& swap_id) {
  LegFlows f;
  const auto custody = chain.custody();
  for (const auto& block : chain.blocks()) {
    for (const auto& e : block.entries) {
      const auto p = decode_settlement(e.tx.payload);
      if (!p || p->swap_id != swap_id) continue;
      switch (p->kind) {
        case PayloadKind::SwapLock:
          if (e.tx.to == custody) {
            f.locked += e.tx.value;
            f.lock_fees += e.fee;
          }
          break;
        case PayloadKind::SwapRelease:
          f.released += e.tx.value;
          f.protocol_fees += e.fee;
          break;
        case PayloadKind::SwapRefund:
          f.refunded += e.tx.value;
          break;
        default:
          break;
      }
    }
  }
  return f;
}

Terminal classify(const std::array<LegFlows, 2>& flows, Phase phase) {
  const auto& a = flows[0];
  const auto& b = flows[1];
  const bool both_released = a.released > 0 && b.released > 0 && a.released + a.protocol_fees == a.locked &&
                             b.released + b.protocol_fees == b.locked && a.refunded == 0 && b.refunded == 0;
  const bool both_returned = a.released == 0 && b.released == 0 && a.refunded == a.locked && b.refunded == b.locked;
  if (phase == Phase::Published && both_released) return Terminal::Published;
  if ((phase == Phase::Refunded || phase == Phase::Aborted) && both_returned) return Terminal::Refunded;
  return Terminal::Mixed;
}

SwapWorldResult run_swap_world(const SwapWorldConfig& cfg) {
  auto net_cfg = cfg.net;
  net_cfg.seed = cfg.seed;
  net::Simulator sim(net_cfg);
  sim.keep_transcript(false);

  std::vector<NodeId> roster_a, roster_b;
  for (std::size_t i = 0; i < cfg.nodes_per_chain; ++i) {
    roster_a.push_back(sim.spawn_node(
        net::make_profile(NodeId{static_cast<std::uint32_t>(1 + i)}, net::NodeClass::Server, 64, std::nullopt, cfg.seed)));
    roster_b.push_back(sim.spawn_node(net::make_profile(
        NodeId{static_cast<std::uint32_t>(1 + cfg.nodes_per_chain + i)}, net::NodeClass::Server, 64, std::nullopt,
        cfg.seed)));
  }

  const auto alice = KeyPair::derive(cfg.seed, "party/alice");
  const auto bob = KeyPair::derive(cfg.seed, "party/bob");
  consensus::LedgerState ga, gb;
  ga.touch(alice.account()).balance = cfg.balance_a;
  gb.touch(bob.account()).balance = cfg.balance_b;
  ga.supply = cfg.balance_a;
  gb.supply = cfg.balance_b;

  consensus::ChainConfig ca;
  ca.label = "A";
  ca.seed = cfg.seed;
  ca.relay = NodeId{kRelayA};
  ca.group_size = cfg.nodes_per_chain;
  auto cb = ca;
  cb.label = "B";
  cb.relay = NodeId{kRelayB};
  consensus::Chain a(ca, roster_a, ga, sim);
  consensus::Chain b(cb, roster_b, gb, sim);

  SwapCoordinator coord(a, b, NodeId{kEndpointA}, NodeId{kEndpointB}, NodeId{kFirstParty});
  coord.register_party(alice);
  coord.register_party(bob);
  coord.register_acceptor(bob.account());

  WorldSink sink(a, b, coord, cfg.stall);
  sim.set_sink(&sink);

  SwapOffer offer;
  offer.party_a = alice.account();
  offer.chain_a = "A";
  offer.amount_a = cfg.amount_a;
  offer.chain_b = "B";
  offer.want_b = cfg.want_b;
  offer.timeout_cycles = cfg.timeout_cycles;
  offer.fee_bps = cfg.fee_bps;
  const auto id = coord.open(sim, sign_offer(offer, alice), cfg.plan);
  if (cfg.tamper_at) coord.tamper_receipt(id, *cfg.tamper_at);
  if (cfg.reject_release) coord.reject_release(id, *cfg.reject_release);

  SwapWorldResult r;
  while (sim.cycle() < cfg.max_cycles) {
    sim.run_until_cycle(sim.cycle() + 1);
    if (!a.state().conserved() || !b.state().conserved()) r.conserved = false;
    if (coord.quiescent()) break;
  }
  r.cycles = sim.cycle();
  r.phase = coord.contract(id).phase;
  r.sent_mask = coord.sent_mask(id);
  r.order = coord.sent_order(id);
  r.flows = {leg_flows(a, id), leg_flows(b, id)};
  r.trace = coord.trace();
  r.custody_clean = a.state().balance(a.custody()) == coord.custody(Side::A).balance() &&
                    b.state().balance(b.custody()) == coord.custody(Side::B).balance() &&
                    coord.custody(Side::A).balance() == 0 && coord.custody(Side::B).balance() == 0;
  r.terminal = coord.quiescent() ? classify(r.flows, r.phase) : Terminal::Stuck;
  return r;
}

ModelCheckReport model_check(const ModelCheckConfig& cfg) {
  ModelCheckReport report;

  auto tally = [&](const SwapWorldResult& r, const std::string& where) {
    ++report.executions;
    switch (r.terminal) {
      case Terminal::Published: ++report.published; break;
      case Terminal::Refunded: ++report.refunded; break;
      case Terminal::Mixed:
        ++report.mixed;
        report.violations.push_back("mixed terminal state at " + where);
        break;
      case Terminal::Stuck:
        ++report.stuck;
        report.violations.push_back("non-terminal swap at " + where);
        break;
    }
    if (!r.conserved) ++report.conservation_failures;
    if (!r.custody_clean) {
      ++report.custody_leaks;
      report.violations.push_back("custody leak at " + where);
    }
  };

  auto tree = [&](SwapWorldConfig base, const std::string& label) {
    ++report.placements;
    struct Leaf {
      std::uint16_t decided = 0;
      std::uint16_t dropped = 0;
    };
    std::vector<Leaf> leaves;
    std::function<void(DropPlan, SwapWorldResult)> explore = [&](DropPlan plan, SwapWorldResult result) {
      for (Slot slot : result.order) {
        const auto i = static_cast<std::size_t>(slot);
        if (plan.drop[i]) continue;
        DropPlan dropped = plan;
        dropped.drop[i] = true;
        base.plan = dropped;
        explore(dropped, run_swap_world(base));
        plan.drop[i] = false;
      }
      Leaf leaf;
      for (std::size_t i = 0; i < kSlots; ++i) {
        if (!plan.drop[i]) continue;
        leaf.decided |= static_cast<std::uint16_t>(1u << i);
        if (*plan.drop[i]) leaf.dropped |= static_cast<std::uint16_t>(1u << i);
      }
      leaves.push_back(leaf);
      std::string where = label + " drops=";
      for (std::size_t i = 0; i < kSlots; ++i) {
        if (plan.drop[i] && *plan.drop[i]) where += std::string(slot_name(static_cast<Slot>(i))) + ",";
      }
      tally(result, where);
    };
    DropPlan root;
    base.plan = root;
    explore(root, run_swap_world(base));

    for (std::uint32_t mask = 0; mask < (1u << kSlots); ++mask) {
      std::size_t hits = 0;
      for (const auto& leaf : leaves) {
        if ((mask & leaf.decided) == leaf.dropped) ++hits;
      }
      if (hits == 1) {
        ++report.masks_checked;
      } else {
        report.violations.push_back(label + " mask " + std::to_string(mask) + " maps to " + std::to_string(hits) +
                                    " executions");
      }
    }
  };

  for (auto t : cfg.timeouts) {
    auto base = cfg.base;
    base.timeout_cycles = t;
    base.stall.reset();
    tree(base, "timeout=" + std::to_string(t));
  }
  for (const auto& s : cfg.stalls) {
    auto base = cfg.base;
    base.stall = s;
    tree(base, "stall=" + std::string(side_name(s.side)) + "@" + std::to_string(s.from_cycle) + "+" +
                   std::to_string(s.length));
  }
  return report;
}

}  // namespace parax::interop
