#include "parax/consensus/state.hpp"

#include <vector>

#include "parax/consensus/merkle.hpp"
#include "parax/ledger/error.hpp"
#include "parax/tokenomics/tokenomics.hpp"

namespace parax::consensus {

std::string_view reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::HashMismatch: return "hash-mismatch";
    case RejectReason::InsufficientBalance: return "insufficient-balance";
    case RejectReason::BadNonce: return "bad-nonce";
    case RejectReason::MalformedPayload: return "malformed-payload";
    case RejectReason::BadSignature: return "bad-signature";
    case RejectReason::RelayTimeout: return "relay-timeout";
    case RejectReason::PairVeto: return "pair-veto";
    case RejectReason::Injected: return "injected";
  }
  return "?";
}

Account& LedgerState::touch(const AccountId& id) {
  auto [it, inserted] = accounts_.try_emplace(id);
  if (inserted) it->second.id = id;
  return it->second;
}

const Account* LedgerState::find(const AccountId& id) const {
  auto it = accounts_.find(id);
  return it == accounts_.end() ? nullptr : &it->second;
}

Amount LedgerState::balance(const AccountId& id) const {
  auto* a = find(id);
  return a ? a->balance : 0;
}

std::uint64_t LedgerState::nonce(const AccountId& id) const {
  auto* a = find(id);
  return a ? a->nonce : 0;
}

bool LedgerState::is_contract(const AccountId& id) const {
  auto* a = find(id);
  return a && a->is_contract;
}

Amount LedgerState::total_balances() const {
  Amount total = 0;
  for (const auto& [id, a] : accounts_) total += a.balance;
  return total;
}

namespace {

Digest account_leaf(const Account& a) {
  std::uint8_t flags = (a.is_contract ? 1 : 0) | (a.governance_flag ? 2 : 0);
  return Hasher()
      .update_u8(0x41)
      .update(a.id.key)
      .update_u64(a.balance)
      .update_u64(a.nonce)
      .update_u8(flags)
      .finish();
}

}  // namespace

Digest LedgerState::root() const {
  std::vector<Digest> leaves;
  leaves.reserve(accounts_.size() + 1);
  for (const auto& [id, a] : accounts_) leaves.push_back(account_leaf(a));
  leaves.push_back(Hasher().update_u8(0x50).update_u64(pool).update_u64(supply).finish());
  return merkle_root(leaves);
}

void encode_state(ByteWriter& w, const LedgerState& s) {
  w.u32(static_cast<std::uint32_t>(s.accounts().size()));
  for (const auto& [id, a] : s.accounts()) {
    std::uint8_t flags = (a.is_contract ? 1 : 0) | (a.governance_flag ? 2 : 0);
    w.raw(id.key.bytes).u64(a.balance).u64(a.nonce).u8(flags);
  }
  w.u64(s.pool).u64(s.supply);
}

LedgerState decode_state(ByteReader& r) {
  LedgerState s;
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    AccountId id{Digest{r.fixed<32>()}};
    auto& a = s.touch(id);
    a.balance = r.u64();
    a.nonce = r.u64();
    auto flags = r.u8();
    a.is_contract = flags & 1;
    a.governance_flag = flags & 2;
  }
  s.pool = r.u64();
  s.supply = r.u64();
  return s;
}

std::optional<Amount> expected_fee(const LedgerState& s, const SignedTransaction& tx, double friction) {
  if (s.is_contract(tx.sender)) {
    auto settlement = decode_settlement(tx.payload);
    if (!settlement || settlement->kind == PayloadKind::SwapLock) return std::nullopt;
    return settlement->protocol_fee;
  }
  return tokenomics::charge_friction(tx, friction).fee;
}

RejectReason check_apply(const LedgerState& s, const SignedTransaction& tx, Amount fee) {
  if (tx.nonce != s.nonce(tx.sender)) return RejectReason::BadNonce;
  const Amount bal = s.balance(tx.sender);
  if (tx.value > bal || fee > bal - tx.value) return RejectReason::InsufficientBalance;
  return RejectReason::None;
}

void apply(LedgerState& s, const SignedTransaction& tx, Amount fee) {
  auto& from = s.touch(tx.sender);
  from.balance -= tx.value + fee;
  from.nonce += 1;
  s.touch(tx.to).balance += tx.value;
  s.pool += fee;
}

}  // namespace parax::consensus
