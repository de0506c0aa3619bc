#include "parax/tokenomics/tokenomics.hpp"

#include <algorithm>
#include <cmath>

namespace parax::tokenomics {

CycleMetrics measure_cycle(std::span<const CycleLog> logs, std::size_t window,
                           std::span<const NodeOffer> active, std::uint64_t demand_units,
                           std::uint64_t cycle_ms) {
  CycleMetrics m;
  m.cycle_ms = cycle_ms;
  m.demand = static_cast<double>(demand_units);
  for (const auto& n : active) m.supply += n.capacity * n.availability;

  if (logs.empty()) return m;
  const auto& last = logs.back();
  m.cycle = last.cycle;
  m.n_g = last.n_g;
  m.tx_count = last.tx_count;
  m.resource_units = last.resource_units;

  const std::size_t w = std::min(std::max<std::size_t>(window, 1), logs.size());
  double transferred = 0.0;
  double balance = 0.0;
  for (const auto& l : logs.last(w)) {
    transferred += static_cast<double>(l.transferred);
    balance += static_cast<double>(l.total_balance);
  }
  const double mean_balance = balance / static_cast<double>(w);
  m.velocity = mean_balance > 0.0 ? transferred / mean_balance : 0.0;
  return m;
}

std::string_view action_name(CorrectionAction a) {
  switch (a) {
    case CorrectionAction::NoAction: return "none";
    case CorrectionAction::RaisePressure: return "raise";
    case CorrectionAction::EasePressure: return "ease";
  }
  return "?";
}

CorrectionAction check_resource_balance(const CycleMetrics& m) {
  if (m.supply <= 0.0) return CorrectionAction::NoAction;
  const double ratio = m.demand / m.supply;
  if (ratio > 1.0 + kBalanceMargin) return CorrectionAction::RaisePressure;
  if (ratio < 1.0 - kBalanceMargin) return CorrectionAction::EasePressure;
  return CorrectionAction::NoAction;
}

FrictionState update_friction(FrictionState state, const CycleMetrics& metrics,
                              CorrectionAction action) {
  if (metrics.supply <= 0.0) return state;
  const double alpha = action == CorrectionAction::NoAction ? state.alpha : 2.0 * state.alpha;
  const double ratio = metrics.demand / metrics.supply;
  state.friction = std::clamp(state.friction * std::pow(ratio, alpha), state.f_min, state.f_max);
  return state;
}

FeeRecord charge_friction(std::uint64_t units, double friction) {
  // The epsilon keeps exact products (1.1 * 10) from rounding up a unit.
  const double raw = friction * static_cast<double>(units);
  return {units, static_cast<Amount>(std::ceil(raw - 1e-9))};
}

Distribution distribute_rewards(Amount pool, const std::map<AccountId, std::uint64_t>& weights) {
  Distribution d;
  d.remainder = pool;
  unsigned __int128 total = 0;
  for (const auto& [acct, w] : weights) total += w;
  if (total == 0 || pool == 0) return d;
  for (const auto& [acct, w] : weights) {
    if (w == 0) continue;
    auto share = static_cast<Amount>(static_cast<unsigned __int128>(pool) * w / total);
    if (share == 0) continue;
    d.payouts.push_back({acct, share});
    d.remainder -= share;
  }
  return d;
}

Amount mint_inflation(Amount supply, std::uint32_t rate_bps) {
  return static_cast<Amount>(static_cast<unsigned __int128>(supply) * rate_bps / 10'000);
}

}  // namespace parax::tokenomics
