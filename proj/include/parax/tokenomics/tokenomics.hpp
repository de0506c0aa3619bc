#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "parax/ledger/transaction.hpp"
#include "parax/ledger/types.hpp"

namespace parax::tokenomics {

/// One cycle's raw observations, appended by the chain after each block.
struct CycleLog {
  std::uint64_t cycle = 0;
  Amount transferred = 0;    // sum of values moved in the cycle's block
  Amount total_balance = 0;  // sum of account balances after the block
  std::uint64_t tx_count = 0;
  std::uint64_t resource_units = 0;
  std::array<std::uint32_t, 4> n_g{};  // committee sizes per group
};

/// A node's offered resources: capacity units per cycle and duty cycle.
struct NodeOffer {
  std::uint32_t capacity = 0;
  double availability = 1.0;
};

struct CycleMetrics {
  std::uint64_t cycle = 0;
  std::array<std::uint32_t, 4> n_g{};
  std::uint64_t tx_count = 0;
  std::uint64_t resource_units = 0;
  std::uint64_t cycle_ms = 0;
  double velocity = 0.0;
  double supply = 0.0;  // S
  double demand = 0.0;  // D
};

/// S is the capacity offered by the active nodes, D the declared units
/// waiting or admitted, v = transferred value over the last `window` logs
/// divided by their mean total balance.
CycleMetrics measure_cycle(std::span<const CycleLog> logs, std::size_t window,
                           std::span<const NodeOffer> active, std::uint64_t demand_units,
                           std::uint64_t cycle_ms = 0);

enum class CorrectionAction { NoAction, RaisePressure, EasePressure };

std::string_view action_name(CorrectionAction a);

/// 1:1 supply/demand target with a 10% margin either way.
CorrectionAction check_resource_balance(const CycleMetrics& m);

inline constexpr double kBalanceMargin = 0.10;

struct FrictionState {
  double friction = 1.0;  // base units per resource unit
  double f_min = 1.0;
  double f_max = 1e6;
  double alpha = 0.5;
  Amount pool = 0;
};

/// F' = clamp(F * (D/S)^a, F_min, F_max); `a` doubles while the balance
/// check asks for correction. Holds F when S is zero.
FrictionState update_friction(FrictionState state, const CycleMetrics& metrics,
                              CorrectionAction action = CorrectionAction::NoAction);

struct FeeRecord {
  std::uint64_t units = 0;
  Amount fee = 0;
};

/// fee = ceil(F * units).
FeeRecord charge_friction(std::uint64_t units, double friction);
inline FeeRecord charge_friction(const SignedTransaction& tx, double friction) {
  return charge_friction(resource_units(tx), friction);
}

struct Payout {
  AccountId to;
  Amount amount = 0;

  bool operator==(const Payout&) const = default;
};

struct Distribution {
  std::vector<Payout> payouts;  // ordered by account id
  Amount remainder = 0;         // stays in the pool
};

/// Pro-rata split of `pool` by participation weight; integer-division
/// remainders stay in the pool. Empty or all-zero weights pay nothing.
Distribution distribute_rewards(Amount pool, const std::map<AccountId, std::uint64_t>& weights);

/// floor(supply * rate_bps / 10^4).
Amount mint_inflation(Amount supply, std::uint32_t rate_bps);

}  // namespace parax::tokenomics
