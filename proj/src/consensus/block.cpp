#include "parax/consensus/block.hpp"

#include <algorithm>

#include "parax/consensus/merkle.hpp"
#include "parax/ledger/error.hpp"

namespace parax::consensus {

Digest Block::tx_root() const { return merkle_root(tx_hashes); }

Digest block_subject(const Block& b) {
  return Hasher()
      .update_u64(b.height)
      .update(b.prev_hash.bytes)
      .update_u64(b.cycle)
      .update(b.tx_root().bytes)
      .update(b.state_root.bytes)
      .update(b.cert_root.bytes)
      .finish();
}

Digest block_hash(const Block& b) {
  return Hasher().update(block_subject(b).bytes).update(b.constructor_cert.cert_hash.bytes).finish();
}

Digest tamper_root(const Digest& root) { return Hasher().update_u8(0xFF).update(root.bytes).finish(); }

Digest compute_cert_root(const std::vector<BlockEntry>& entries) {
  TrieCommitment trie;
  for (const auto& e : entries) {
    trie.insert(e.group, Stage::Initiator, e.initiator.cert_hash);
    trie.insert(e.group, Stage::Validator, e.validator.cert_hash);
  }
  return trie.root();
}

void encode_block(ByteWriter& w, const Block& b) {
  w.u64(b.height).raw(b.prev_hash.bytes).u64(b.cycle);
  w.u32(static_cast<std::uint32_t>(b.tx_hashes.size()));
  for (const auto& h : b.tx_hashes) w.raw(h.bytes);
  w.raw(b.state_root.bytes).raw(b.cert_root.bytes);
  encode_certificate(w, b.constructor_cert);
  w.f64(b.friction);
  w.u32(static_cast<std::uint32_t>(b.entries.size()));
  for (const auto& e : b.entries) {
    encode_transaction(w, e.tx);
    w.u8(static_cast<std::uint8_t>(e.group)).u64(e.fee);
    encode_certificate(w, e.initiator);
    encode_certificate(w, e.validator);
  }
  w.u32(static_cast<std::uint32_t>(b.payouts.size()));
  for (const auto& p : b.payouts) w.raw(p.to.key.bytes).u64(p.amount);
  w.u64(b.minted);
}

Block decode_block(ByteReader& r) {
  Block b;
  b.height = r.u64();
  b.prev_hash.bytes = r.fixed<32>();
  b.cycle = r.u64();
  const auto n = r.u32();
  if (n > r.remaining() / 32) throw Error(Errc::Decode, "tx hash count");
  b.tx_hashes.resize(n);
  for (auto& h : b.tx_hashes) h.bytes = r.fixed<32>();
  b.state_root.bytes = r.fixed<32>();
  b.cert_root.bytes = r.fixed<32>();
  b.constructor_cert = decode_certificate(r);
  b.friction = r.f64();
  const auto m = r.u32();
  if (m > r.remaining()) throw Error(Errc::Decode, "entry count");
  b.entries.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    BlockEntry e;
    e.tx = decode_transaction(r);
    const auto g = group_from_u8(r.u8());
    if (!g) throw Error(Errc::Decode, "group");
    e.group = *g;
    e.fee = r.u64();
    e.initiator = decode_certificate(r);
    e.validator = decode_certificate(r);
    b.entries.push_back(std::move(e));
  }
  const auto p = r.u32();
  if (p > r.remaining() / 40) throw Error(Errc::Decode, "payout count");
  b.payouts.resize(p);
  for (auto& po : b.payouts) {
    po.to.key.bytes = r.fixed<32>();
    po.amount = r.u64();
  }
  b.minted = r.u64();
  return b;
}

BlockDraft construct_block(std::vector<ValidatedTx> validated, const LedgerState& prior,
                           std::uint64_t height, const Digest& prev_hash, const BlockParams& params) {
  std::sort(validated.begin(), validated.end(), [](const ValidatedTx& a, const ValidatedTx& b) {
    return std::tie(a.cycle, a.vertex) < std::tie(b.cycle, b.vertex);
  });
  BlockDraft d;
  d.state = prior;
  d.block.height = height;
  d.block.prev_hash = prev_hash;
  d.block.cycle = params.cycle;
  d.block.friction = params.friction;

  for (auto& v : validated) {
    if (!v.validator) {
      throw Error(Errc::MissingValidatorCert, hash_transaction(v.tx).short_hex());
    }
    const auto fee = expected_fee(d.state, v.tx, params.friction);
    RejectReason why = fee ? check_apply(d.state, v.tx, *fee) : RejectReason::MalformedPayload;
    if (why != RejectReason::None) {
      d.vetoed.emplace_back(v.vertex, why);
      continue;
    }
    apply(d.state, v.tx, *fee);
    d.transferred += v.tx.value;
    d.included.push_back(v.vertex);
    d.block.tx_hashes.push_back(hash_transaction(v.tx));
    d.block.entries.push_back({std::move(v.tx), v.group, *fee, std::move(v.initiator),
                               std::move(*v.validator)});
  }

  d.state.pool += params.mint;
  d.state.supply += params.mint;
  d.block.minted = params.mint;

  d.distribution = tokenomics::distribute_rewards(d.state.pool, params.participation);
  for (const auto& p : d.distribution.payouts) d.state.touch(p.to).balance += p.amount;
  d.state.pool = d.distribution.remainder;
  d.block.payouts = d.distribution.payouts;

  d.block.state_root = d.state.root();
  d.block.cert_root = compute_cert_root(d.block.entries);
  return d;
}

LedgerState replay_block(const LedgerState& prior, const Block& b, std::size_t constructor_quorum) {
  if (b.tx_hashes.size() != b.entries.size()) throw Error(Errc::CorruptOutput, "tx hash list");
  LedgerState s = prior;
  for (std::size_t i = 0; i < b.entries.size(); ++i) {
    const auto& e = b.entries[i];
    const auto h = hash_transaction(e.tx);
    if (h != b.tx_hashes[i]) throw Error(Errc::CorruptOutput, "tx hash " + std::to_string(i));
    if (!verify_signature(e.tx)) throw Error(Errc::BadSignature, h.short_hex());
    if (e.validator.stage != Stage::Validator || !certificate_intact(e.validator) ||
        e.validator.subject != validator_subject(e.initiator.cert_hash, h)) {
      throw Error(Errc::MissingValidatorCert, h.short_hex());
    }
    if (e.initiator.stage != Stage::Initiator || !certificate_intact(e.initiator) ||
        e.initiator.subject != pre_hash(e.tx) || e.tx.cert_id != e.initiator.cert_hash) {
      throw Error(Errc::CorruptOutput, "initiator certificate " + h.short_hex());
    }
    const auto fee = expected_fee(s, e.tx, b.friction);
    if (!fee || *fee != e.fee) throw Error(Errc::CorruptOutput, "fee " + h.short_hex());
    switch (check_apply(s, e.tx, e.fee)) {
      case RejectReason::None: break;
      case RejectReason::BadNonce: throw Error(Errc::NonceGap, h.short_hex());
      default: throw Error(Errc::InsufficientBalance, h.short_hex());
    }
    apply(s, e.tx, e.fee);
  }
  s.pool += b.minted;
  s.supply += b.minted;
  Amount paid = 0;
  for (const auto& p : b.payouts) {
    s.touch(p.to).balance += p.amount;
    paid += p.amount;
  }
  if (paid > s.pool) throw Error(Errc::CorruptOutput, "payouts exceed pool");
  s.pool -= paid;

  if (compute_cert_root(b.entries) != b.cert_root) throw Error(Errc::CorruptOutput, "cert_root");
  const auto& cc = b.constructor_cert;
  if (cc.stage != Stage::Constructor || !certificate_intact(cc) || cc.subject != block_subject(b) ||
      cc.signers.size() < constructor_quorum) {
    throw Error(Errc::QuorumUnderflow, "constructor certificate at height " + std::to_string(b.height));
  }
  if (s.root() != b.state_root) {
    throw Error(Errc::StateRootMismatch, "height " + std::to_string(b.height));
  }
  return s;
}

}  // namespace parax::consensus
