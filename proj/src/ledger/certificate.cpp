#include "parax/ledger/certificate.hpp"

#include <algorithm>

#include "parax/ledger/error.hpp"

namespace parax {

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Initiator: return "initiator";
    case Stage::Validator: return "validator";
    case Stage::Constructor: return "constructor";
  }
  return "?";
}

namespace {

void encode_body(ByteWriter& w, const Certificate& c) {
  w.u8(static_cast<std::uint8_t>(c.stage)).raw(c.subject.bytes);
  w.u32(static_cast<std::uint32_t>(c.signers.size()));
  for (auto s : c.signers) w.u32(raw(s));
  w.u64(c.cycle).raw(c.proof.bytes).u32(c.quorum).u64(c.stamp);
}

}  // namespace

Digest compute_cert_hash(const Certificate& c) {
  ByteWriter w;
  encode_body(w, c);
  return digest(w.data());
}

bool certificate_intact(const Certificate& c) {
  if (c.signers.empty() || c.signers.size() < c.quorum) return false;
  if (!std::is_sorted(c.signers.begin(), c.signers.end())) return false;
  if (std::adjacent_find(c.signers.begin(), c.signers.end()) != c.signers.end()) return false;
  return compute_cert_hash(c) == c.cert_hash;
}

Certificate issue_certificate(Stage stage, const Digest& subject, std::vector<NodeId> signers,
                              std::uint64_t cycle, const Digest& proof, std::size_t quorum,
                              unsigned difficulty) {
  if (signers.empty()) throw Error(Errc::EmptySigners, std::string(stage_name(stage)));
  std::sort(signers.begin(), signers.end());
  signers.erase(std::unique(signers.begin(), signers.end()), signers.end());
  if (quorum == 0) quorum = 1;
  if (signers.size() < quorum) {
    throw Error(Errc::QuorumUnderflow, std::to_string(signers.size()) + " signers, quorum " +
                                           std::to_string(quorum));
  }

  Certificate c;
  c.stage = stage;
  c.subject = subject;
  c.signers = std::move(signers);
  c.cycle = cycle;
  c.proof = proof;
  c.quorum = static_cast<std::uint32_t>(quorum);

  ByteWriter prefix;
  encode_body(prefix, c);
  Bytes buf = std::move(prefix).take();
  const std::size_t stamp_at = buf.size() - 8;
  const std::uint64_t bound = difficulty == 0 ? 1 : (std::uint64_t{1} << std::min(difficulty + 16, 48u));
  for (std::uint64_t stamp = 0; stamp < bound; ++stamp) {
    for (int i = 0; i < 8; ++i) buf[stamp_at + i] = static_cast<std::uint8_t>(stamp >> (56 - 8 * i));
    auto h = digest(buf);
    if (leading_zero_bits(h) >= difficulty) {
      c.stamp = stamp;
      c.cert_hash = h;
      return c;
    }
  }
  throw std::runtime_error("certificate stamp search exhausted at difficulty " + std::to_string(difficulty));
}

Digest validator_subject(const Digest& initiator_cert_hash, const Digest& tx_hash) {
  return Hasher().update_u8(0x56).update(initiator_cert_hash).update(tx_hash).finish();
}

void encode_certificate(ByteWriter& w, const Certificate& c) {
  encode_body(w, c);
  w.raw(c.cert_hash.bytes);
}

Certificate decode_certificate(ByteReader& r) {
  Certificate c;
  auto stage = r.u8();
  if (stage < 1 || stage > 3) throw Error(Errc::Decode, "bad certificate stage");
  c.stage = static_cast<Stage>(stage);
  c.subject.bytes = r.fixed<32>();
  auto n = r.u32();
  if (n > r.remaining() / 4) throw Error(Errc::Decode, "signer count too large");
  c.signers.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) c.signers.push_back(NodeId{r.u32()});
  c.cycle = r.u64();
  c.proof.bytes = r.fixed<32>();
  c.quorum = r.u32();
  c.stamp = r.u64();
  c.cert_hash.bytes = r.fixed<32>();
  return c;
}

}  // namespace parax
