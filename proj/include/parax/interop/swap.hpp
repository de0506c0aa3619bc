#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parax/consensus/state.hpp"
#include "parax/ledger/keys.hpp"
#include "parax/ledger/transaction.hpp"

namespace parax::interop {

enum class Phase : std::uint8_t {
  Initiated = 1,
  LockedA,
  Matched,
  LockedBoth,
  Synced,
  Published,
  Refunded,
  Aborted,
};

std::string_view phase_name(Phase p);
constexpr bool is_terminal(Phase p) {
  return p == Phase::Published || p == Phase::Refunded || p == Phase::Aborted;
}
/// Forward order plus the failure exits allowed from every non-terminal phase.
bool phase_step_allowed(Phase from, Phase to);

enum class Side : std::uint8_t { A = 0, B = 1 };
constexpr Side other(Side s) { return s == Side::A ? Side::B : Side::A; }
std::string_view side_name(Side s);

inline constexpr std::uint32_t kDefaultFeeBps = 150;
inline constexpr std::uint64_t kDefaultTimeoutCycles = 8;

/// What party A signs: give `amount_a` on chain A for `want_b` on chain B.
struct SwapOffer {
  AccountId party_a;
  std::string chain_a;
  Amount amount_a = 0;
  std::string chain_b;
  Amount want_b = 0;
  std::uint64_t timeout_cycles = kDefaultTimeoutCycles;
  std::uint32_t fee_bps = kDefaultFeeBps;
  std::uint64_t salt = 0;

  bool operator==(const SwapOffer&) const = default;
};

Bytes encode_offer(const SwapOffer& o);
Digest offer_id(const SwapOffer& o);

struct SignedOffer {
  SwapOffer offer;
  PublicKey signer{};
  Signature signature{};
};

SignedOffer sign_offer(const SwapOffer& o, const KeyPair& key);
bool verify_offer(const SignedOffer& s);

/// Finalized lock transaction on one chain.
struct LockReceipt {
  Side side = Side::A;
  AccountId party;
  Amount amount = 0;
  Digest tx_hash;
  std::uint64_t height = 0;

  bool operator==(const LockReceipt&) const = default;
};

Bytes encode_receipt(const LockReceipt& r);

struct SwapContract {
  Digest swap_id;
  SwapOffer offer;
  std::string chain_a;
  std::string chain_b;
  AccountId party_a;
  std::optional<AccountId> party_b;
  std::array<Amount, 2> asset{};  // amount given on chain A, amount given on chain B
  Phase phase = Phase::Initiated;
  std::array<std::optional<LockReceipt>, 2> locks;
  std::map<Phase, Digest> checksums;
  std::uint64_t timeout_at = 0;  // simulation cycle
  std::uint32_t fee_bps = kDefaultFeeBps;
  std::vector<std::pair<Phase, Phase>> history;
};

/// Protocol fee on one released leg: ceil(amount * fee_bps / 10^4).
Amount protocol_fee(Amount amount, std::uint32_t fee_bps);

/// Throws BadSignature or InsufficientBalance (against chain A's state).
SwapContract initiate_swap(const SignedOffer& offer, const consensus::LedgerState& chain_a_state,
                           std::uint64_t now_cycle);

/// Records a finalized lock. A locks from Initiated (-> LockedA), B from
/// Matched (-> LockedBoth). Throws WrongPhase otherwise.
void lock_asset(SwapContract& swap, const LockReceipt& receipt);

struct Candidate {
  AccountId account;
};

struct MatchResult {
  bool matched = false;
  std::optional<AccountId> party;
};

/// Binds the lowest-id candidate whose balance on chain B covers the wanted
/// amount. Requires LockedA; no candidate leaves the swap in LockedA.
MatchResult flash_match(SwapContract& swap, std::vector<Candidate> candidates,
                        const consensus::LedgerState& chain_b_state);

/// digest(receipt_a || receipt_b || swap_id || phase).
Digest lock_checksum(const Digest& swap_id, const LockReceipt& a, const LockReceipt& b, Phase phase);

struct SettlementRecord {
  Digest checksum_a;
  Digest checksum_b;
  bool matched = false;
};

/// Compares the checksums each chain computed from the receipts it holds.
/// Match -> Synced, mismatch -> Aborted. Throws WrongPhase outside LockedBoth.
SettlementRecord sync_settle(SwapContract& swap, const Digest& checksum_a, const Digest& checksum_b);

/// A custody transfer the coordinator must get finalized.
struct SettlementOrder {
  Side side = Side::A;  // chain it executes on
  PayloadKind kind = PayloadKind::SwapRelease;
  AccountId to;
  Amount value = 0;
  Amount fee = 0;  // protocol fee into that chain's pool
};

/// The paired release: custody A -> party B and custody B -> party A, each
/// net of the protocol fee. Throws WrongPhase unless Synced.
std::array<SettlementOrder, 2> release_orders(const SwapContract& swap);

/// Marks Published once both releases are final. Throws WrongPhase unless Synced.
void publish_state(SwapContract& swap);

/// Refund orders for every recorded lock and phase Refunded, when the
/// timeout has passed and the swap is not terminal; otherwise nothing.
std::vector<SettlementOrder> expire(SwapContract& swap, std::uint64_t now_cycle);

/// Refund orders for recorded locks and phase Aborted (failed settlement).
std::vector<SettlementOrder> abort_swap(SwapContract& swap);

/// Builds the signed custody transaction for an order.
Initiated settlement_transaction(const SettlementOrder& order, const Digest& swap_id, const KeyPair& custody,
                                 std::uint64_t nonce, NodeId gateway, std::uint64_t cycle);

/// Builds party -> custody lock transaction.
Initiated lock_transaction(const KeyPair& party, const AccountId& custody, Amount amount, const Digest& swap_id,
                           std::uint64_t nonce, NodeId gateway, std::uint64_t cycle);

/// Escrow ledger mirrored against the chain's custody balance.
struct CustodyAccount {
  std::string chain;
  std::map<Digest, Amount> entries;

  Amount balance() const;
  void credit(const Digest& swap_id, Amount amount);
  /// Throws InsufficientBalance if the entry would go negative.
  void debit(const Digest& swap_id, Amount amount);
};

}  // namespace parax::interop
