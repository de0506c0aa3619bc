#include <doctest.h>

#include <cmath>
#include <random>

#include "parax/consensus/state.hpp"
#include "parax/ledger/keys.hpp"
#include "parax/tokenomics/tokenomics.hpp"

using namespace parax;
using namespace parax::tokenomics;

namespace {

AccountId acct(int i) { return KeyPair::derive(5, "p" + std::to_string(i)).account(); }

CycleMetrics ratio(double d, double s) {
  CycleMetrics m;
  m.demand = d;
  m.supply = s;
  return m;
}

}  // namespace

TEST_SUITE("tokenomics") {

TEST_CASE("measure_cycle: idle, supply and velocity") {
  const auto idle = measure_cycle({}, 4, {}, 0);
  CHECK(idle.demand == 0.0);
  CHECK(idle.tx_count == 0);

  std::vector<NodeOffer> eight(8, NodeOffer{10, 1.0});
  CHECK(measure_cycle({}, 4, eight, 0).supply == doctest::Approx(80.0));
  std::vector<NodeOffer> mixed{{10, 1.0}, {10, 0.5}};
  CHECK(measure_cycle({}, 4, mixed, 0).supply == doctest::Approx(15.0));

  // transfers 10+15+25 = 50 over balances averaging 100
  std::vector<CycleLog> logs{{0, 999, 500}, {1, 10, 90}, {2, 15, 100}, {3, 25, 110}};
  CHECK(measure_cycle(logs, 3, eight, 7).velocity == doctest::Approx(0.5));
  CHECK(measure_cycle(logs, 3, eight, 7).demand == 7.0);
}

TEST_CASE("update_friction: fixed point, controller formula and clamps") {
  FrictionState f;
  f.friction = 1.0;
  f.alpha = 1.0;
  CHECK(update_friction(f, ratio(80, 80)).friction == 1.0);
  CHECK(update_friction(f, ratio(96, 80)).friction == doctest::Approx(1.2));
  f.f_max = 1000;
  CHECK(update_friction(f, ratio(1e6, 1)).friction == 1000);
  CHECK(update_friction(f, ratio(1, 1e6)).friction == f.f_min);
  CHECK(update_friction(f, ratio(5, 0)).friction == 1.0);

  f.alpha = 0.5;
  f.friction = 4.0;
  CHECK(update_friction(f, ratio(4, 1), CorrectionAction::RaisePressure).friction == doctest::Approx(16.0));
  CHECK(update_friction(f, ratio(4, 1)).friction == doctest::Approx(8.0));
}

TEST_CASE("fixed point holds for random states") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    FrictionState f;
    f.f_min = 0.01 + u(rng);
    f.f_max = f.f_min + 1 + 1000 * u(rng);
    f.friction = f.f_min + (f.f_max - f.f_min) * u(rng);
    f.alpha = 0.05 + 2 * u(rng);
    const double s = 1 + 1000 * u(rng);
    CHECK(update_friction(f, ratio(s, s)).friction == doctest::Approx(f.friction).epsilon(1e-12));
  }
}

TEST_CASE("check_resource_balance uses a 10% margin") {
  CHECK(check_resource_balance(ratio(105, 100)) == CorrectionAction::NoAction);
  CHECK(check_resource_balance(ratio(110, 100)) == CorrectionAction::NoAction);
  CHECK(check_resource_balance(ratio(120, 100)) == CorrectionAction::RaisePressure);
  CHECK(check_resource_balance(ratio(50, 100)) == CorrectionAction::EasePressure);
  CHECK(check_resource_balance(ratio(90, 100)) == CorrectionAction::NoAction);
}

TEST_CASE("charge_friction rounds up") {
  CHECK(charge_friction(3, 1.0).fee == 3);
  CHECK(charge_friction(3, 0.5).fee == 2);
  CHECK(charge_friction(10, 1.1).fee == 11);
  CHECK(charge_friction(1, 2.0000001).fee == 3);
  for (std::uint64_t units = 1; units < 50; ++units)
    for (int k = 1; k < 40; ++k) {
      const double f = k * 0.25;
      CHECK(charge_friction(units, f).fee == static_cast<Amount>((units * k + 3) / 4));
    }
}

TEST_CASE("exact-balance sender with the fee pushing over is refused untouched") {
  const auto kp = KeyPair::derive(5, "edge");
  consensus::LedgerState s;
  s.touch(kp.account()).balance = 10;
  s.supply = 10;
  TxDraft d;
  d.to = acct(1);
  d.value = 10;
  const auto tx = create_transaction(kp, d, NodeId{1}, 0).tx;
  const auto fee = charge_friction(tx, 1.0).fee;
  CHECK(consensus::check_apply(s, tx, fee) == consensus::RejectReason::InsufficientBalance);
  CHECK(s.balance(kp.account()) == 10);
}

TEST_CASE("distribute_rewards splits pro rata and keeps remainders") {
  constexpr Amount coin = kBaseUnitsPerCoin;
  auto four = distribute_rewards(10 * coin, {{acct(1), 1}, {acct(2), 1}, {acct(3), 1}, {acct(4), 1}});
  CHECK(four.payouts.size() == 4);
  for (const auto& p : four.payouts) CHECK(p.amount == 2 * coin + coin / 2);
  CHECK(four.remainder == 0);

  auto split = distribute_rewards(10 * coin, {{acct(1), 3}, {acct(2), 1}});
  Amount a1 = 0, a2 = 0;
  for (const auto& p : split.payouts) (p.to == acct(1) ? a1 : a2) = p.amount;
  CHECK(a1 == 7 * coin + coin / 2);
  CHECK(a2 == 2 * coin + coin / 2);

  const auto empty = distribute_rewards(10, {});
  CHECK(empty.payouts.empty());
  CHECK(empty.remainder == 10);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::map<AccountId, std::uint64_t> w;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 7); ++k) w[acct(k)] = rng() % 50;
    const Amount pool = rng() % 100000;
    const auto d = distribute_rewards(pool, w);
    Amount paid = 0;
    for (const auto& p : d.payouts) paid += p.amount;
    CHECK(paid + d.remainder == pool);
    std::uint64_t total = 0;
    for (const auto& [a, x] : w) total += x;
    if (total) CHECK(d.remainder < w.size());
  }
}

TEST_CASE("mint_inflation: zero rate, 1 bps and compounding") {
  CHECK(mint_inflation(1'000'000'000, 0) == 0);
  CHECK(mint_inflation(1'000'000'000, 1) == 100'000);
  Amount supply = 1'000'000'000;
  Amount minted = 0;
  for (int b = 0; b < 2; ++b) {
    const auto m = mint_inflation(supply, 1);
    minted += m;
    supply += m;
  }
  CHECK(minted == static_cast<Amount>(std::llround(1e9 * (std::pow(1.0001, 2) - 1))));
}

}
