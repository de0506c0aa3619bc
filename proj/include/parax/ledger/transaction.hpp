#pragma once

#include <cstdint>
#include <optional>

#include "parax/ledger/bytes.hpp"
#include "parax/ledger/certificate.hpp"
#include "parax/ledger/keys.hpp"
#include "parax/ledger/types.hpp"

namespace parax {

/// First payload byte. Receipt-family kinds route to G3.
enum class PayloadKind : std::uint8_t {
  Data = 0x01,
  ContractCall = 0x02,
  Receipt = 0x03,
  SwapLock = 0x04,
  SwapRelease = 0x05,
  SwapRefund = 0x06,
};

struct SignedTransaction {
  AccountId sender;
  std::optional<Group> node_groups_hint;
  AccountId to;
  Amount value = 0;
  Digest cert_id;    // zero until the initiator certificate exists
  Digest hash_data;  // digest(payload)
  std::uint64_t nonce = 0;
  Bytes payload;
  Bytes signature;  // public key (32) || ed25519 signature (64)

  bool operator==(const SignedTransaction&) const = default;

  std::optional<PayloadKind> payload_kind() const;
};

inline constexpr std::size_t kSignatureFieldSize = 32 + 64;

/// Wire layout, all integers big-endian:
///   sender[32] hint:u8 to[32] value:u64 cert_id[32] hash_data[32]
///   nonce:u64 payload:(u32 len, bytes) signature:(u32 len, bytes)
/// hint is 0 for "none" or the group number 1..4.
Bytes canonical_encode(const SignedTransaction& tx);
void encode_transaction(ByteWriter& w, const SignedTransaction& tx);
SignedTransaction decode_transaction(ByteView bytes);
SignedTransaction decode_transaction(ByteReader& r);

Digest hash_transaction(const SignedTransaction& tx);

/// Digest with cert_id and signature cleared; the initiator certificate
/// is issued over this.
Digest pre_hash(const SignedTransaction& tx);

/// Throws KeyMismatch when `key` does not derive tx.sender.
SignedTransaction sign_transaction(SignedTransaction tx, const KeyPair& key);

/// Never throws; malformed signatures are simply invalid.
bool verify_signature(const SignedTransaction& tx);

/// Declared resource units: 1 + payload bytes / 256.
std::uint64_t resource_units(const SignedTransaction& tx);

struct TxDraft {
  AccountId to;
  Amount value = 0;
  std::uint64_t nonce = 0;
  Bytes payload;
  std::optional<Group> hint;
};

struct Initiated {
  SignedTransaction tx;
  Certificate initiator;
};

/// Client-side creation: the gateway node issues the initiator certificate
/// over the pre-hash, the sender fills cert_id and signs.
Initiated create_transaction(const KeyPair& sender, TxDraft draft, NodeId gateway,
                             std::uint64_t cycle, unsigned stamp_difficulty = 0);

/// Settlement payloads emitted by the custody contract.
struct SettlementPayload {
  PayloadKind kind = PayloadKind::SwapRelease;
  Digest swap_id;
  Amount protocol_fee = 0;
};

Bytes encode_settlement(const SettlementPayload& p);
std::optional<SettlementPayload> decode_settlement(ByteView payload);

}  // namespace parax
