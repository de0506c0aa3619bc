#include "parax/scenario/workload.hpp"

#include <algorithm>
#include <cmath>

#include "parax/ledger/error.hpp"
#include "parax/tokenomics/tokenomics.hpp"

namespace parax::scenario {

Workload::Workload(const WorkloadSpec& spec, const std::string& label, std::uint64_t seed, NodeId client_endpoint)
    : spec_(spec), endpoint_(client_endpoint) {
  std::seed_seq seq{seed, digest("workload/" + label).prefix64()};
  rng_.seed(seq);
  accounts_.reserve(spec.accounts);
  for (std::uint32_t i = 0; i < spec.accounts; ++i) {
    accounts_.push_back(KeyPair::derive(seed, "account/" + label + "/" + std::to_string(i)));
  }
  if (spec.contract_fraction > 0.0) {
    for (std::uint32_t i = 0; i < spec.contracts; ++i) {
      contracts_.push_back(KeyPair::derive(seed, "contract/" + label + "/" + std::to_string(i)).account());
    }
  }
  busy_.assign(accounts_.size(), false);
}

void Workload::seed_genesis(consensus::LedgerState& genesis) const {
  for (const auto& k : accounts_) {
    genesis.touch(k.account()).balance += spec_.initial_balance;
    genesis.supply += spec_.initial_balance;
  }
  for (const auto& c : contracts_) genesis.touch(c).is_contract = true;
}

Initiated Workload::make_tx(const consensus::Chain& chain, std::size_t sender, std::uint64_t cycle) {
  const auto& key = accounts_[sender];
  TxDraft d;
  d.nonce = chain.next_nonce(key.account());

  const double u = net::unit_interval(rng_);
  auto payload = [&](PayloadKind kind) {
    Bytes p(std::max<std::uint32_t>(spec_.payload_bytes, 1));
    p[0] = static_cast<std::uint8_t>(kind);
    for (std::size_t i = 1; i < p.size(); ++i) p[i] = static_cast<std::uint8_t>(rng_());
    return p;
  };
  auto other_account = [&] {
    auto j = net::uniform_below(rng_, accounts_.size() - 1);
    if (j >= sender) ++j;
    return accounts_[j].account();
  };
  if (u < spec_.contract_fraction) {
    d.to = contracts_[net::uniform_below(rng_, contracts_.size())];
    d.payload = payload(PayloadKind::ContractCall);
  } else if (u < spec_.contract_fraction + spec_.receipt_fraction) {
    d.to = other_account();
    d.payload = payload(PayloadKind::Receipt);
  } else if (u < spec_.contract_fraction + spec_.receipt_fraction + spec_.data_fraction) {
    d.to = other_account();
    d.payload = payload(PayloadKind::Data);
  } else {
    d.to = other_account();
  }

  const auto units = 1 + d.payload.size() / 256;
  // headroom for friction rising before the transaction settles
  const auto fee_bound = tokenomics::charge_friction(units, chain.friction().friction * 4.0).fee;
  const auto balance = chain.state().balance(key.account());
  const bool invalid = net::unit_interval(rng_) < spec_.invalid_fraction;
  if (invalid) {
    d.value = balance + 1 + net::uniform_below(rng_, spec_.value_max);
  } else {
    d.value = spec_.value_min + net::uniform_below(rng_, spec_.value_max - spec_.value_min + 1);
    if (balance < fee_bound + spec_.value_min) return {};
    d.value = std::min(d.value, balance - fee_bound);
  }

  const auto& roster = chain.roster();
  const NodeId gateway = roster[net::uniform_below(rng_, roster.size())];
  auto in = create_transaction(key, std::move(d), gateway, cycle, chain.config().stamp_difficulty);
  if (invalid) {
    ++stats_.invalid;
    invalid_hashes_.insert(hash_transaction(in.tx));
  }
  return in;
}

void Workload::generate(net::Simulator& sim, consensus::Chain& chain, std::uint64_t cycle, double f_initial) {
  double rate = spec_.rate;
  if (spec_.elasticity > 0.0) rate *= std::pow(f_initial / chain.friction().friction, spec_.elasticity);
  if (rate <= 0.0 || accounts_.size() < 2) return;

  std::poisson_distribution<std::uint64_t> arrivals(rate);
  const auto n = arrivals(rng_);
  const auto cycle_ms = sim.config().cycle_ms;
  std::vector<net::SimTime> departs(n);
  for (auto& t : departs) t = sim.cycle_start(cycle) + net::uniform_below(rng_, cycle_ms);
  std::sort(departs.begin(), departs.end());

  std::vector<std::size_t> idle;
  for (std::size_t i = 0; i < busy_.size(); ++i) {
    if (!busy_[i]) idle.push_back(i);
  }
  for (auto depart : departs) {
    if (idle.empty()) {
      ++stats_.suppressed;
      continue;
    }
    const auto pick = net::uniform_below(rng_, idle.size());
    const auto sender = idle[pick];
    idle.erase(idle.begin() + static_cast<std::ptrdiff_t>(pick));

    auto in = make_tx(chain, sender, cycle);
    if (in.tx.signature.empty()) {
      ++stats_.suppressed;
      continue;
    }
    ++stats_.generated;
    const auto size = canonical_encode(in.tx).size();
    const auto tag = next_tag_++;
    const NodeId gateway = in.initiator.signers.front();
    const auto out = sim.send(endpoint_, gateway, "tx", size, tag, net::DropPolicy::Sampled, depart);
    if (!out.delivered) {
      ++stats_.lost;
      continue;
    }
    busy_[sender] = true;
    sent_.emplace(tag, std::make_pair(sender, std::move(in)));
  }
}

void Workload::on_deliver(const net::Message& m, consensus::Chain& chain) {
  auto it = sent_.find(m.tag);
  if (it == sent_.end()) return;
  auto [sender, in] = std::move(it->second);
  sent_.erase(it);
  try {
    const auto h = chain.submit(in);
    inflight_.emplace(h, sender);
    submitted_.push_back(h);
    ++stats_.submitted;
  } catch (const Error&) {
    ++stats_.refused;
    busy_[sender] = false;
  }
}

void Workload::poll(const consensus::Chain& chain) {
  for (auto it = inflight_.begin(); it != inflight_.end();) {
    const auto out = chain.outcome(it->first);
    if (out && (out->status == dag::Status::Finalized || out->status == dag::Status::Rejected)) {
      busy_[it->second] = false;
      it = inflight_.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace parax::scenario
