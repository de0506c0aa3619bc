#include "parax/ledger/transaction.hpp"

#include <algorithm>

#include "parax/ledger/error.hpp"

namespace parax {

std::optional<PayloadKind> SignedTransaction::payload_kind() const {
  if (payload.empty()) return std::nullopt;
  auto k = payload.front();
  if (k < 0x01 || k > 0x06) return std::nullopt;
  return static_cast<PayloadKind>(k);
}

void encode_transaction(ByteWriter& w, const SignedTransaction& tx) {
  w.raw(tx.sender.key.bytes);
  w.u8(tx.node_groups_hint ? static_cast<std::uint8_t>(*tx.node_groups_hint) : 0);
  w.raw(tx.to.key.bytes);
  w.u64(tx.value);
  w.raw(tx.cert_id.bytes);
  w.raw(tx.hash_data.bytes);
  w.u64(tx.nonce);
  w.bytes(tx.payload);
  w.bytes(tx.signature);
}

Bytes canonical_encode(const SignedTransaction& tx) {
  ByteWriter w;
  encode_transaction(w, tx);
  return std::move(w).take();
}

SignedTransaction decode_transaction(ByteReader& r) {
  SignedTransaction tx;
  tx.sender.key.bytes = r.fixed<32>();
  auto hint = r.u8();
  if (hint != 0) {
    auto g = group_from_u8(hint);
    if (!g) throw Error(Errc::Decode, "bad group hint");
    tx.node_groups_hint = g;
  }
  tx.to.key.bytes = r.fixed<32>();
  tx.value = r.u64();
  tx.cert_id.bytes = r.fixed<32>();
  tx.hash_data.bytes = r.fixed<32>();
  tx.nonce = r.u64();
  tx.payload = r.bytes();
  tx.signature = r.bytes();
  return tx;
}

SignedTransaction decode_transaction(ByteView bytes) {
  ByteReader r(bytes);
  auto tx = decode_transaction(r);
  r.expect_done();
  return tx;
}

Digest hash_transaction(const SignedTransaction& tx) { return digest(canonical_encode(tx)); }

Digest pre_hash(const SignedTransaction& tx) {
  auto copy = tx;
  copy.cert_id = Digest{};
  copy.signature.clear();
  return hash_transaction(copy);
}

namespace {

Bytes signing_bytes(const SignedTransaction& tx) {
  auto copy = tx;
  copy.signature.clear();
  return canonical_encode(copy);
}

}  // namespace

SignedTransaction sign_transaction(SignedTransaction tx, const KeyPair& key) {
  if (key.account() != tx.sender) {
    throw Error(Errc::KeyMismatch, "key derives " + key.account().short_hex() + ", sender is " +
                                       tx.sender.short_hex());
  }
  auto sig = key.sign(signing_bytes(tx));
  tx.signature.assign(key.public_key().begin(), key.public_key().end());
  tx.signature.insert(tx.signature.end(), sig.begin(), sig.end());
  return tx;
}

bool verify_signature(const SignedTransaction& tx) {
  if (tx.signature.size() != kSignatureFieldSize) return false;
  PublicKey pk{};
  Signature sig{};
  std::copy_n(tx.signature.begin(), 32, pk.begin());
  std::copy_n(tx.signature.begin() + 32, 64, sig.begin());
  if (account_of(pk) != tx.sender) return false;
  return verify_detached(signing_bytes(tx), sig, pk);
}

std::uint64_t resource_units(const SignedTransaction& tx) { return 1 + tx.payload.size() / 256; }

Initiated create_transaction(const KeyPair& sender, TxDraft draft, NodeId gateway,
                             std::uint64_t cycle, unsigned difficulty) {
  SignedTransaction tx;
  tx.sender = sender.account();
  tx.node_groups_hint = draft.hint;
  tx.to = draft.to;
  tx.value = draft.value;
  tx.nonce = draft.nonce;
  tx.payload = std::move(draft.payload);
  tx.hash_data = digest(tx.payload);

  auto initiator = issue_certificate(Stage::Initiator, pre_hash(tx), {gateway}, cycle,
                                     tx.hash_data, 1, difficulty);
  tx.cert_id = initiator.cert_hash;
  return Initiated{sign_transaction(std::move(tx), sender), std::move(initiator)};
}

Bytes encode_settlement(const SettlementPayload& p) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(p.kind)).raw(p.swap_id.bytes).u64(p.protocol_fee);
  return std::move(w).take();
}

std::optional<SettlementPayload> decode_settlement(ByteView payload) {
  if (payload.size() != 1 + 32 + 8) return std::nullopt;
  ByteReader r(payload);
  SettlementPayload p;
  auto k = r.u8();
  if (k != static_cast<std::uint8_t>(PayloadKind::SwapRelease) &&
      k != static_cast<std::uint8_t>(PayloadKind::SwapRefund) &&
      k != static_cast<std::uint8_t>(PayloadKind::SwapLock)) {
    return std::nullopt;
  }
  p.kind = static_cast<PayloadKind>(k);
  p.swap_id.bytes = r.fixed<32>();
  p.protocol_fee = r.u64();
  return p;
}

}  // namespace parax
