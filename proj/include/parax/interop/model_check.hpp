#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parax/interop/coordinator.hpp"

namespace parax::interop {

/// A chain skips `length` ticks starting at simulation cycle `from_cycle`.
struct StallPlacement {
  Side side = Side::A;
  std::uint64_t from_cycle = 0;
  std::uint64_t length = 0;
};

/// Two chains of `nodes_per_chain` honest servers, one offerer on chain A
/// and one acceptor on chain B, one swap.
struct SwapWorldConfig {
  std::uint64_t seed = 11;
  std::size_t nodes_per_chain = 4;
  net::NetConfig net{10, 0, 0.0, 500, 11};
  Amount balance_a = 1'000 * kBaseUnitsPerCoin;
  Amount balance_b = 1'000 * kBaseUnitsPerCoin;
  Amount amount_a = 100 * kBaseUnitsPerCoin;
  Amount want_b = 100 * kBaseUnitsPerCoin;
  std::uint64_t timeout_cycles = kDefaultTimeoutCycles;
  std::uint32_t fee_bps = kDefaultFeeBps;
  DropPlan plan;
  std::optional<StallPlacement> stall;
  std::optional<Side> tamper_at;
  std::optional<Side> reject_release;
  std::uint64_t max_cycles = 120;
};

enum class Terminal { Published, Refunded, Mixed, Stuck };
std::string_view terminal_name(Terminal t);

/// Value that left and returned to each party through custody on one chain.
struct LegFlows {
  Amount locked = 0;
  Amount released = 0;  // paid out to the counterparty, net of protocol fee
  Amount refunded = 0;
  Amount protocol_fees = 0;
  Amount lock_fees = 0;  // friction on lock transactions
};

struct SwapWorldResult {
  Phase phase = Phase::Initiated;
  Terminal terminal = Terminal::Stuck;
  std::uint16_t sent_mask = 0;
  std::vector<Slot> order;
  std::array<LegFlows, 2> flows{};
  bool conserved = true;      // every chain state balances against its supply
  bool custody_clean = true;  // custody holds nothing once terminal
  std::uint64_t cycles = 0;
  std::vector<SwapTraceLine> trace;
};

/// Classifies the finished swap from block contents alone.
Terminal classify(const std::array<LegFlows, 2>& flows, Phase phase);

/// Sums the swap's settlement entries in a chain's blocks.
LegFlows leg_flows(const consensus::Chain& chain, const Digest& swap_id);

SwapWorldResult run_swap_world(const SwapWorldConfig& cfg);

struct ModelCheckConfig {
  SwapWorldConfig base;
  std::vector<std::uint64_t> timeouts;         // one drop tree per value
  std::vector<StallPlacement> stalls;          // one drop tree per placement, base timeout
};

struct ModelCheckReport {
  std::size_t placements = 0;
  std::size_t executions = 0;
  std::size_t masks_checked = 0;  // 4096 per placement when every mask maps to one leaf
  std::size_t published = 0;
  std::size_t refunded = 0;
  std::size_t mixed = 0;
  std::size_t stuck = 0;
  std::size_t conservation_failures = 0;
  std::size_t custody_leaks = 0;
  std::vector<std::string> violations;

  bool ok() const {
    return mixed == 0 && stuck == 0 && conservation_failures == 0 && custody_leaks == 0 && violations.empty();
  }
};

/// Depth-first over drop decisions in send order: every message that an
/// execution actually sends is tried delivered and dropped. Leaves are then
/// checked to cover all 2^12 drop masks exactly once.
ModelCheckReport model_check(const ModelCheckConfig& cfg);

}  // namespace parax::interop
