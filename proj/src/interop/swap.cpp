#include "parax/interop/swap.hpp"

#include <algorithm>

#include "parax/ledger/error.hpp"

namespace parax::interop {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Initiated: return "Initiated";
    case Phase::LockedA: return "LockedA";
    case Phase::Matched: return "Matched";
    case Phase::LockedBoth: return "LockedBoth";
    case Phase::Synced: return "Synced";
    case Phase::Published: return "Published";
    case Phase::Refunded: return "Refunded";
    case Phase::Aborted: return "Aborted";
  }
  return "?";
}

std::string_view side_name(Side s) { return s == Side::A ? "A" : "B"; }

bool phase_step_allowed(Phase from, Phase to) {
  if (is_terminal(from)) return false;
  if (to == Phase::Refunded || to == Phase::Aborted) return true;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

namespace {

void advance(SwapContract& s, Phase to) {
  if (!phase_step_allowed(s.phase, to)) {
    throw Error(Errc::WrongPhase, std::string(phase_name(s.phase)) + " -> " + std::string(phase_name(to)));
  }
  s.history.emplace_back(s.phase, to);
  s.phase = to;
}

void require(const SwapContract& s, Phase p) {
  if (s.phase != p) {
    throw Error(Errc::WrongPhase, "need " + std::string(phase_name(p)) + ", at " + std::string(phase_name(s.phase)));
  }
}

std::vector<SettlementOrder> refunds_for(const SwapContract& s) {
  std::vector<SettlementOrder> out;
  for (const auto& lock : s.locks) {
    if (!lock) continue;
    out.push_back({lock->side, PayloadKind::SwapRefund, lock->party, lock->amount, 0});
  }
  return out;
}

}  // namespace

Bytes encode_offer(const SwapOffer& o) {
  ByteWriter w;
  w.str("parax-offer")
      .raw(o.party_a.key.bytes)
      .str(o.chain_a)
      .u64(o.amount_a)
      .str(o.chain_b)
      .u64(o.want_b)
      .u64(o.timeout_cycles)
      .u32(o.fee_bps)
      .u64(o.salt);
  return std::move(w).take();
}

Digest offer_id(const SwapOffer& o) { return digest(encode_offer(o)); }

SignedOffer sign_offer(const SwapOffer& o, const KeyPair& key) {
  return {o, key.public_key(), key.sign(encode_offer(o))};
}

bool verify_offer(const SignedOffer& s) {
  return account_of(s.signer) == s.offer.party_a && verify_detached(encode_offer(s.offer), s.signature, s.signer);
}

Bytes encode_receipt(const LockReceipt& r) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(r.side)).raw(r.party.key.bytes).u64(r.amount).raw(r.tx_hash.bytes).u64(r.height);
  return std::move(w).take();
}

Amount protocol_fee(Amount amount, std::uint32_t fee_bps) {
  const auto num = static_cast<unsigned __int128>(amount) * fee_bps;
  return static_cast<Amount>((num + 9999) / 10000);
}

SwapContract initiate_swap(const SignedOffer& signed_offer, const consensus::LedgerState& chain_a_state,
                           std::uint64_t now_cycle) {
  if (!verify_offer(signed_offer)) throw Error(Errc::BadSignature, "offer signature");
  const auto& o = signed_offer.offer;
  if (o.amount_a > chain_a_state.balance(o.party_a)) {
    throw Error(Errc::InsufficientBalance, "party A holds " + std::to_string(chain_a_state.balance(o.party_a)));
  }
  SwapContract s;
  s.swap_id = offer_id(o);
  s.offer = o;
  s.chain_a = o.chain_a;
  s.chain_b = o.chain_b;
  s.party_a = o.party_a;
  s.asset = {o.amount_a, o.want_b};
  s.timeout_at = now_cycle + o.timeout_cycles;
  s.fee_bps = o.fee_bps;
  return s;
}

void lock_asset(SwapContract& swap, const LockReceipt& receipt) {
  const auto idx = static_cast<std::size_t>(receipt.side);
  if (receipt.side == Side::A) {
    require(swap, Phase::Initiated);
    if (receipt.party != swap.party_a || receipt.amount != swap.asset[0]) {
      throw Error(Errc::WrongPhase, "lock does not match the offer");
    }
    swap.locks[idx] = receipt;
    advance(swap, Phase::LockedA);
  } else {
    require(swap, Phase::Matched);
    if (!swap.party_b || receipt.party != *swap.party_b || receipt.amount != swap.asset[1]) {
      throw Error(Errc::WrongPhase, "lock does not match the matched party");
    }
    swap.locks[idx] = receipt;
    advance(swap, Phase::LockedBoth);
  }
}

MatchResult flash_match(SwapContract& swap, std::vector<Candidate> candidates,
                        const consensus::LedgerState& chain_b_state) {
  require(swap, Phase::LockedA);
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.account < b.account; });
  for (const auto& c : candidates) {
    if (c.account == swap.party_a) continue;
    if (chain_b_state.balance(c.account) >= swap.asset[1]) {
      swap.party_b = c.account;
      advance(swap, Phase::Matched);
      return {true, c.account};
    }
  }
  return {};
}

Digest lock_checksum(const Digest& swap_id, const LockReceipt& a, const LockReceipt& b, Phase phase) {
  return Hasher()
      .update(encode_receipt(a))
      .update(encode_receipt(b))
      .update(swap_id)
      .update_u8(static_cast<std::uint8_t>(phase))
      .finish();
}

SettlementRecord sync_settle(SwapContract& swap, const Digest& checksum_a, const Digest& checksum_b) {
  require(swap, Phase::LockedBoth);
  SettlementRecord r{checksum_a, checksum_b, checksum_a == checksum_b};
  swap.checksums[Phase::LockedBoth] = checksum_a;
  advance(swap, r.matched ? Phase::Synced : Phase::Aborted);
  return r;
}

std::array<SettlementOrder, 2> release_orders(const SwapContract& swap) {
  require(swap, Phase::Synced);
  const Amount fee_a = protocol_fee(swap.asset[0], swap.fee_bps);
  const Amount fee_b = protocol_fee(swap.asset[1], swap.fee_bps);
  return {SettlementOrder{Side::A, PayloadKind::SwapRelease, *swap.party_b, swap.asset[0] - fee_a, fee_a},
          SettlementOrder{Side::B, PayloadKind::SwapRelease, swap.party_a, swap.asset[1] - fee_b, fee_b}};
}

void publish_state(SwapContract& swap) {
  require(swap, Phase::Synced);
  advance(swap, Phase::Published);
}

std::vector<SettlementOrder> expire(SwapContract& swap, std::uint64_t now_cycle) {
  if (is_terminal(swap.phase) || now_cycle < swap.timeout_at) return {};
  auto out = refunds_for(swap);
  advance(swap, Phase::Refunded);
  return out;
}

std::vector<SettlementOrder> abort_swap(SwapContract& swap) {
  if (swap.phase == Phase::Aborted) return refunds_for(swap);
  auto out = refunds_for(swap);
  advance(swap, Phase::Aborted);
  return out;
}

Initiated settlement_transaction(const SettlementOrder& order, const Digest& swap_id, const KeyPair& custody,
                                 std::uint64_t nonce, NodeId gateway, std::uint64_t cycle) {
  TxDraft d;
  d.to = order.to;
  d.value = order.value;
  d.nonce = nonce;
  d.payload = encode_settlement({order.kind, swap_id, order.fee});
  return create_transaction(custody, std::move(d), gateway, cycle);
}

Initiated lock_transaction(const KeyPair& party, const AccountId& custody, Amount amount, const Digest& swap_id,
                           std::uint64_t nonce, NodeId gateway, std::uint64_t cycle) {
  TxDraft d;
  d.to = custody;
  d.value = amount;
  d.nonce = nonce;
  d.payload = encode_settlement({PayloadKind::SwapLock, swap_id, 0});
  return create_transaction(party, std::move(d), gateway, cycle);
}

Amount CustodyAccount::balance() const {
  Amount total = 0;
  for (const auto& [_, a] : entries) total += a;
  return total;
}

void CustodyAccount::credit(const Digest& swap_id, Amount amount) { entries[swap_id] += amount; }

void CustodyAccount::debit(const Digest& swap_id, Amount amount) {
  auto it = entries.find(swap_id);
  if (it == entries.end() || it->second < amount) {
    throw Error(Errc::InsufficientBalance, "custody entry " + swap_id.short_hex());
  }
  it->second -= amount;
  if (it->second == 0) entries.erase(it);
}

}  // namespace parax::interop
