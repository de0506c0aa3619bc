#include "parax/interop/coordinator.hpp"

#include <algorithm>

#include "parax/ledger/error.hpp"

namespace parax::interop {

namespace {

constexpr std::size_t kMessageSize = 128;

std::size_t idx_of(Side s) { return static_cast<std::size_t>(s); }

}  // namespace

std::string_view slot_name(Slot s) {
  switch (s) {
    case Slot::OfferA: return "offer-a";
    case Slot::OfferB: return "offer-b";
    case Slot::LockSubmitA: return "lock-submit-a";
    case Slot::LockNoticeA: return "lock-notice-a";
    case Slot::MatchNotice: return "match-notice";
    case Slot::LockSubmitB: return "lock-submit-b";
    case Slot::LockNoticeB: return "lock-notice-b";
    case Slot::ChecksumAB: return "checksum-ab";
    case Slot::ChecksumBA: return "checksum-ba";
    case Slot::ReleaseA: return "release-a";
    case Slot::ReleaseB: return "release-b";
    case Slot::PublishNotice: return "publish";
  }
  return "?";
}

DropPlan DropPlan::from_mask(std::uint16_t mask) {
  DropPlan p;
  for (std::size_t i = 0; i < kSlots; ++i) p.drop[i] = ((mask >> i) & 1u) != 0;
  return p;
}

SwapCoordinator::SwapCoordinator(consensus::Chain& a, consensus::Chain& b, NodeId endpoint_a, NodeId endpoint_b,
                                 NodeId first_party_endpoint)
    : a_(a), b_(b), endpoint_a_(endpoint_a), endpoint_b_(endpoint_b), next_party_endpoint_(raw(first_party_endpoint)) {
  custody_[0].chain = a.label();
  custody_[1].chain = b.label();
}

void SwapCoordinator::register_party(const KeyPair& key) {
  const auto id = key.account();
  if (keys_.count(id)) return;
  keys_.emplace(id, key);
  endpoints_.emplace(id, NodeId{next_party_endpoint_++});
}

void SwapCoordinator::register_acceptor(const AccountId& account) {
  if (std::find(acceptors_.begin(), acceptors_.end(), account) == acceptors_.end()) acceptors_.push_back(account);
}

NodeId SwapCoordinator::party_endpoint(const AccountId& a) const { return endpoints_.at(a); }

std::vector<Digest> SwapCoordinator::swap_ids() const {
  std::vector<Digest> out;
  for (const auto& s : sessions_) out.push_back(s.contract.swap_id);
  return out;
}

const SwapContract& SwapCoordinator::contract(const Digest& swap_id) const {
  return sessions_.at(by_id_.at(swap_id)).contract;
}

std::uint16_t SwapCoordinator::sent_mask(const Digest& swap_id) const {
  return sessions_.at(by_id_.at(swap_id)).sent_mask;
}

std::vector<Slot> SwapCoordinator::sent_order(const Digest& swap_id) const {
  return sessions_.at(by_id_.at(swap_id)).order;
}

void SwapCoordinator::tamper_receipt(const Digest& swap_id, Side at) {
  sessions_.at(by_id_.at(swap_id)).tamper[idx_of(at)] = true;
}

void SwapCoordinator::reject_release(const Digest& swap_id, Side side) {
  sessions_.at(by_id_.at(swap_id)).reject_release[idx_of(side)] = true;
}

bool SwapCoordinator::handles(const net::Message& m) const { return m.kind.rfind("swap/", 0) == 0; }

void SwapCoordinator::record(const Session& s, net::Simulator& sim, Side side, std::string detail) {
  trace_.push_back({s.contract.swap_id, s.contract.phase, sim.now(), chain(side).label(), std::move(detail)});
}

void SwapCoordinator::send(net::Simulator& sim, std::size_t idx, Slot slot, NodeId from, NodeId to) {
  auto& s = sessions_[idx];
  const auto& choice = s.plan.drop[static_cast<std::size_t>(slot)];
  const auto policy = !choice ? net::DropPolicy::Sampled : (*choice ? net::DropPolicy::ForceDrop : net::DropPolicy::ForceDeliver);
  s.sent_mask |= static_cast<std::uint16_t>(1u << static_cast<unsigned>(slot));
  s.order.push_back(slot);
  sim.send(from, to, "swap/" + std::string(slot_name(slot)), kMessageSize, idx * 16 + static_cast<std::uint64_t>(slot),
           policy);
}

Digest SwapCoordinator::open(net::Simulator& sim, const SignedOffer& offer, DropPlan plan) {
  const auto id = offer_id(offer.offer);
  if (by_id_.count(id)) throw Error(Errc::DuplicateSwap, id.short_hex());
  if (!keys_.count(offer.offer.party_a)) throw Error(Errc::BadSignature, "offerer not registered");
  Session s;
  s.contract = initiate_swap(offer, a_.state(), sim.cycle());
  s.plan = plan;
  const std::size_t idx = sessions_.size();
  sessions_.push_back(std::move(s));
  by_id_.emplace(id, idx);
  record(sessions_[idx], sim, Side::A, "offer " + std::to_string(offer.offer.amount_a) + " for " +
                                           std::to_string(offer.offer.want_b));
  const NodeId party = party_endpoint(offer.offer.party_a);
  send(sim, idx, Slot::OfferA, party, endpoint_a_);
  send(sim, idx, Slot::OfferB, party, endpoint_b_);
  send(sim, idx, Slot::LockSubmitA, party, endpoint_a_);
  return id;
}

void SwapCoordinator::submit_lock(net::Simulator& sim, std::size_t idx, Side side, const AccountId& party,
                                  Amount amount) {
  auto& s = sessions_[idx];
  auto& c = chain(side);
  const auto in = lock_transaction(keys_.at(party), c.custody(), amount, s.contract.swap_id, c.next_nonce(party),
                                   c.roster().front(), c.cycle());
  try {
    const auto h = c.submit(in);
    inflight_.push_back({idx, side, Role::Lock, h, {side, PayloadKind::SwapRefund, party, amount, 0}, false});
    record(s, sim, side, "lock submitted " + h.short_hex());
  } catch (const Error& e) {
    record(s, sim, side, std::string("lock not submitted: ") + e.what());
  }
}

void SwapCoordinator::submit_order(net::Simulator& sim, std::size_t idx, const SettlementOrder& order, Role role) {
  auto& s = sessions_[idx];
  auto& c = chain(order.side);
  const auto in = settlement_transaction(order, s.contract.swap_id, c.custody_key(), c.next_nonce(c.custody()),
                                         c.roster().front(), c.cycle());
  const auto h = hash_transaction(in.tx);
  if (role == Role::Release && s.reject_release[idx_of(order.side)]) c.inject_rejection(h);
  try {
    c.submit(in);
  } catch (const Error& e) {
    record(s, sim, order.side, std::string("settlement not submitted: ") + e.what());
    return;
  }
  inflight_.push_back({idx, order.side, role, h, order, false});
  record(s, sim, order.side,
         std::string(role == Role::Release ? "release" : "refund") + " submitted " + h.short_hex());
}

void SwapCoordinator::refund_all(net::Simulator& sim, std::size_t idx, std::vector<SettlementOrder> orders) {
  for (const auto& o : orders) submit_order(sim, idx, o, Role::Refund);
}

void SwapCoordinator::try_match(net::Simulator& sim, std::size_t idx) {
  auto& s = sessions_[idx];
  if (s.contract.phase != Phase::LockedA || !s.knows_offer[1] || !s.receipts[1][0]) return;
  std::vector<Candidate> candidates;
  for (const auto& a : acceptors_) candidates.push_back({a});
  const auto m = flash_match(s.contract, candidates, b_.state());
  if (!m.matched) {
    record(s, sim, Side::B, "no acceptor");
    return;
  }
  record(s, sim, Side::B, "matched " + m.party->short_hex());
  send(sim, idx, Slot::MatchNotice, endpoint_b_, party_endpoint(*m.party));
}

void SwapCoordinator::try_verify(net::Simulator& sim, std::size_t idx, Side side) {
  auto& s = sessions_[idx];
  const auto i = idx_of(side);
  if (s.contract.phase != Phase::LockedBoth || !s.own_checksum[i] || !s.peer_checksum[i]) return;
  const Digest ca = side == Side::A ? *s.own_checksum[i] : *s.peer_checksum[i];
  const Digest cb = side == Side::A ? *s.peer_checksum[i] : *s.own_checksum[i];
  if (ca != cb) {
    sync_settle(s.contract, ca, cb);
    record(s, sim, side, "checksum mismatch");
    refund_all(sim, idx, abort_swap(s.contract));
    return;
  }
  s.verified[i] = true;
  record(s, sim, side, "checksum verified " + ca.short_hex());
  if (s.verified[0] && s.verified[1]) {
    sync_settle(s.contract, ca, cb);
    record(s, sim, side, "synced");
    start_release(sim, idx);
  }
}

void SwapCoordinator::start_release(net::Simulator& sim, std::size_t idx) {
  auto& s = sessions_[idx];
  s.releasing = true;
  for (const auto& o : release_orders(s.contract)) submit_order(sim, idx, o, Role::Release);
}

void SwapCoordinator::on_deliver(net::Simulator& sim, const net::Message& m) {
  const std::size_t idx = m.tag / 16;
  const auto slot = static_cast<Slot>(m.tag % 16);
  if (idx >= sessions_.size()) return;
  auto& s = sessions_[idx];
  const bool live = !is_terminal(s.contract.phase);
  switch (slot) {
    case Slot::OfferA:
      s.knows_offer[0] = true;
      record(s, sim, Side::A, "offer received");
      break;
    case Slot::OfferB:
      s.knows_offer[1] = true;
      record(s, sim, Side::B, "offer received");
      try_match(sim, idx);
      break;
    case Slot::LockSubmitA:
      if (live) submit_lock(sim, idx, Side::A, s.contract.party_a, s.contract.asset[0]);
      break;
    case Slot::LockNoticeA: {
      auto r = s.carried_receipt.at(slot);
      if (s.tamper[1]) r.tx_hash.bytes[0] ^= 0xFF;
      s.receipts[1][0] = r;
      record(s, sim, Side::B, "lock receipt A received");
      try_match(sim, idx);
      break;
    }
    case Slot::MatchNotice:
      if (live && s.contract.phase == Phase::Matched) {
        send(sim, idx, Slot::LockSubmitB, party_endpoint(*s.contract.party_b), endpoint_b_);
      }
      break;
    case Slot::LockSubmitB:
      if (live && s.contract.phase == Phase::Matched) {
        submit_lock(sim, idx, Side::B, *s.contract.party_b, s.contract.asset[1]);
      }
      break;
    case Slot::LockNoticeB: {
      auto r = s.carried_receipt.at(slot);
      if (s.tamper[0]) r.tx_hash.bytes[0] ^= 0xFF;
      s.receipts[0][1] = r;
      record(s, sim, Side::A, "lock receipt B received");
      if (live && s.receipts[0][0]) {
        s.own_checksum[0] = lock_checksum(s.contract.swap_id, *s.receipts[0][0], r, Phase::LockedBoth);
        s.carried_checksum[Slot::ChecksumAB] = *s.own_checksum[0];
        send(sim, idx, Slot::ChecksumAB, endpoint_a_, endpoint_b_);
        try_verify(sim, idx, Side::A);
      }
      break;
    }
    case Slot::ChecksumAB:
      s.peer_checksum[1] = s.carried_checksum.at(slot);
      try_verify(sim, idx, Side::B);
      break;
    case Slot::ChecksumBA:
      s.peer_checksum[0] = s.carried_checksum.at(slot);
      try_verify(sim, idx, Side::A);
      break;
    case Slot::ReleaseA:
    case Slot::ReleaseB:
    case Slot::PublishNotice:
      record(s, sim, slot == Slot::ReleaseB ? Side::B : Side::A, std::string(slot_name(slot)) + " received");
      break;
  }
}

void SwapCoordinator::on_lock_final(net::Simulator& sim, const InFlight& f, const consensus::TxOutcome& out) {
  auto& s = sessions_[f.session];
  const LockReceipt receipt{f.side, f.order.to, f.order.value, f.tx_hash, out.height.value_or(0)};
  custody_[idx_of(f.side)].credit(s.contract.swap_id, f.order.value);
  const bool live = !is_terminal(s.contract.phase);
  if (f.side == Side::A && live && s.contract.phase == Phase::Initiated && s.knows_offer[0]) {
    lock_asset(s.contract, receipt);
    s.receipts[0][0] = receipt;
    record(s, sim, Side::A, "lock finalized height=" + std::to_string(receipt.height));
    s.carried_receipt[Slot::LockNoticeA] = receipt;
    send(sim, f.session, Slot::LockNoticeA, endpoint_a_, endpoint_b_);
    return;
  }
  if (f.side == Side::B && live && s.contract.phase == Phase::Matched && s.contract.party_b == receipt.party) {
    lock_asset(s.contract, receipt);
    s.receipts[1][1] = receipt;
    record(s, sim, Side::B, "lock finalized height=" + std::to_string(receipt.height));
    s.own_checksum[1] = lock_checksum(s.contract.swap_id, *s.receipts[1][0], receipt, Phase::LockedBoth);
    s.carried_receipt[Slot::LockNoticeB] = receipt;
    s.carried_checksum[Slot::ChecksumBA] = *s.own_checksum[1];
    send(sim, f.session, Slot::LockNoticeB, endpoint_b_, endpoint_a_);
    send(sim, f.session, Slot::ChecksumBA, endpoint_b_, endpoint_a_);
    try_verify(sim, f.session, Side::B);
    return;
  }
  record(s, sim, f.side, "lock finalized out of phase; bouncing");
  submit_order(sim, f.session, f.order, Role::Refund);
}

const SwapCoordinator::InFlight* SwapCoordinator::release_leg(std::size_t idx, Side side) const {
  const InFlight* found = nullptr;
  for (const auto& f : inflight_) {
    if (f.session == idx && f.side == side && f.role == Role::Release) found = &f;
  }
  return found;
}

std::array<consensus::CommitControls, 2> SwapCoordinator::reconcile(const consensus::PreparedCycle* a,
                                                                    const consensus::PreparedCycle* b) const {
  std::array<consensus::CommitControls, 2> controls;
  const std::array<const consensus::PreparedCycle*, 2> prep{a, b};
  for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
    const auto& s = sessions_[idx];
    if (!s.releasing || is_terminal(s.contract.phase)) continue;
    for (Side x : {Side::A, Side::B}) {
      const Side y = other(x);
      const auto* px = prep[idx_of(x)];
      const auto* leg = release_leg(idx, x);
      if (!px || !leg || leg->dead || !px->validated(leg->tx_hash)) continue;
      if (s.released[idx_of(y)]) continue;
      const auto* partner = release_leg(idx, y);
      const auto partner_out = partner ? chain(y).outcome(partner->tx_hash) : std::nullopt;
      const bool partner_dead = !partner || partner->dead ||
                                (partner_out && partner_out->status == dag::Status::Rejected);
      if (partner_dead) {
        controls[idx_of(x)].veto.insert(leg->tx_hash);
        continue;
      }
      const auto* py = prep[idx_of(y)];
      if (!py || !py->validated(partner->tx_hash)) controls[idx_of(x)].hold.insert(leg->tx_hash);
    }
  }
  return controls;
}

void SwapCoordinator::after_commit(net::Simulator& sim) {
  std::vector<InFlight> still;
  std::vector<InFlight> retry;
  std::vector<std::size_t> published;
  auto current = std::move(inflight_);
  inflight_.clear();
  for (auto& f : current) {
    if (f.dead) {
      still.push_back(f);
      continue;
    }
    const auto out = chain(f.side).outcome(f.tx_hash);
    if (!out || (out->status != dag::Status::Finalized && out->status != dag::Status::Rejected)) {
      still.push_back(f);
      continue;
    }
    auto& s = sessions_[f.session];
    const bool final = out->status == dag::Status::Finalized;
    switch (f.role) {
      case Role::Lock:
        if (final) {
          on_lock_final(sim, f, *out);
        } else {
          record(s, sim, f.side, "lock rejected: " + std::string(consensus::reason_name(out->reason)));
        }
        break;
      case Role::Refund:
        if (final) {
          custody_[idx_of(f.side)].debit(s.contract.swap_id, f.order.value + f.order.fee);
          record(s, sim, f.side, "refund finalized height=" + std::to_string(out->height.value_or(0)));
        } else {
          retry.push_back(f);
        }
        break;
      case Role::Release:
        if (final) {
          custody_[idx_of(f.side)].debit(s.contract.swap_id, f.order.value + f.order.fee);
          s.released[idx_of(f.side)] = true;
          record(s, sim, f.side, "release finalized height=" + std::to_string(out->height.value_or(0)));
          if (s.released[0] && s.released[1]) published.push_back(f.session);
        } else {
          f.dead = true;
          record(s, sim, f.side, "release rejected: " + std::string(consensus::reason_name(out->reason)));
          still.push_back(f);
        }
        break;
    }
  }
  // on_lock_final may have queued new transactions meanwhile
  for (auto& f : inflight_) still.push_back(std::move(f));
  inflight_ = std::move(still);

  for (const auto& f : retry) {
    record(sessions_[f.session], sim, f.side, "refund retried");
    submit_order(sim, f.session, f.order, Role::Refund);
  }

  // a dead leg is retried once its partner committed; two dead legs abort
  for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
    auto& s = sessions_[idx];
    if (!s.releasing || is_terminal(s.contract.phase)) continue;
    std::array<std::optional<InFlight>, 2> dead;
    for (const auto& f : inflight_) {
      if (f.session == idx && f.role == Role::Release && f.dead) dead[idx_of(f.side)] = f;
    }
    for (Side x : {Side::A, Side::B}) {
      if (dead[idx_of(x)] && s.released[idx_of(other(x))]) {
        const auto order = dead[idx_of(x)]->order;
        std::erase_if(inflight_, [&](const InFlight& f) { return f.session == idx && f.role == Role::Release && f.side == x; });
        record(s, sim, x, "release retried");
        submit_order(sim, idx, order, Role::Release);
      }
    }
    const bool a_gone = dead[0].has_value() && !s.released[0];
    const bool b_gone = dead[1].has_value() && !s.released[1];
    if (a_gone && b_gone) {
      std::erase_if(inflight_, [&](const InFlight& f) { return f.session == idx && f.role == Role::Release; });
      refund_all(sim, idx, abort_swap(s.contract));
      record(s, sim, Side::A, "settlement failed; refunding");
    }
  }

  for (std::size_t idx : published) {
    auto& s = sessions_[idx];
    publish_state(s.contract);
    record(s, sim, Side::A, "published");
    send(sim, idx, Slot::ReleaseA, endpoint_a_, party_endpoint(*s.contract.party_b));
    send(sim, idx, Slot::ReleaseB, endpoint_b_, party_endpoint(s.contract.party_a));
    send(sim, idx, Slot::PublishNotice, endpoint_a_, endpoint_b_);
  }

  for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
    auto& s = sessions_[idx];
    if (s.releasing || is_terminal(s.contract.phase)) continue;
    const auto before = s.contract.phase;
    auto orders = expire(s.contract, sim.cycle());
    if (s.contract.phase != before) {
      record(s, sim, Side::A, "timeout");
      refund_all(sim, idx, std::move(orders));
    }
  }
}

bool SwapCoordinator::quiescent() const {
  return inflight_.empty() &&
         std::all_of(sessions_.begin(), sessions_.end(), [](const Session& s) { return is_terminal(s.contract.phase); });
}

void run_pair_tick(net::Simulator& sim, consensus::Chain& a, consensus::Chain& b, SwapCoordinator* coord,
                   std::array<bool, 2> stalled) {
  std::optional<consensus::PreparedCycle> pa, pb;
  if (!stalled[0]) pa = a.prepare_cycle(sim);
  if (!stalled[1]) pb = b.prepare_cycle(sim);
  std::array<consensus::CommitControls, 2> controls;
  if (coord) controls = coord->reconcile(pa ? &*pa : nullptr, pb ? &*pb : nullptr);
  if (pa) a.commit_cycle(sim, std::move(*pa), controls[0]);
  if (pb) b.commit_cycle(sim, std::move(*pb), controls[1]);
  if (coord) coord->after_commit(sim);
}

}  // namespace parax::interop
