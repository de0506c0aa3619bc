#pragma once

#include <map>
#include <optional>

#include "parax/ledger/account.hpp"
#include "parax/ledger/bytes.hpp"
#include "parax/ledger/transaction.hpp"

namespace parax::consensus {

/// Why a vote, a validation, or the constructor turned a transaction down.
enum class RejectReason : std::uint8_t {
  None = 0,
  HashMismatch,
  InsufficientBalance,
  BadNonce,
  MalformedPayload,
  BadSignature,
  RelayTimeout,
  PairVeto,
  Injected,
};

std::string_view reason_name(RejectReason r);

/// Account balances plus the reward pool. `supply` is genesis supply plus
/// everything minted; conservation means balances + pool == supply.
class LedgerState {
 public:
  Account& touch(const AccountId& id);
  const Account* find(const AccountId& id) const;

  Amount balance(const AccountId& id) const;
  std::uint64_t nonce(const AccountId& id) const;
  bool is_contract(const AccountId& id) const;

  Amount total_balances() const;
  bool conserved() const { return total_balances() + pool == supply; }

  /// 4-ary Merkle root over accounts in id order followed by the
  /// (pool, supply) leaf.
  Digest root() const;

  const std::map<AccountId, Account>& accounts() const { return accounts_; }

  Amount pool = 0;
  Amount supply = 0;

  bool operator==(const LedgerState&) const = default;

 private:
  std::map<AccountId, Account> accounts_;
};

void encode_state(ByteWriter& w, const LedgerState& s);
LedgerState decode_state(ByteReader& r);

/// Fee the ledger expects: friction for user transactions, the declared
/// protocol fee for custody settlements (senders flagged as contracts).
/// nullopt when a contract-originated transaction is not a settlement.
std::optional<Amount> expected_fee(const LedgerState& s, const SignedTransaction& tx, double friction);

/// Checks nonce and balance for applying `tx` with `fee` on top of `s`.
RejectReason check_apply(const LedgerState& s, const SignedTransaction& tx, Amount fee);

/// Debits sender value+fee, credits `to`, moves fee into the pool.
void apply(LedgerState& s, const SignedTransaction& tx, Amount fee);

}  // namespace parax::consensus
