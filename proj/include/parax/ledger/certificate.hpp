#pragma once

#include <cstdint>
#include <vector>

#include "parax/ledger/bytes.hpp"
#include "parax/ledger/types.hpp"

namespace parax {

enum class Stage : std::uint8_t { Initiator = 1, Validator = 2, Constructor = 3 };

std::string_view stage_name(Stage s);

/// Stage certificate binding a subject digest to a signer set.
///
/// The chain of custody for one finalized transaction is
///   tx.cert_id == initiator.cert_hash
///   validator.subject == validator_subject(initiator.cert_hash, tx_hash)
///   constructor.subject commits to the block's cert_root, which contains
///   both earlier certificates as leaves.
struct Certificate {
  Stage stage = Stage::Initiator;
  Digest subject;
  std::vector<NodeId> signers;  // sorted, unique
  std::uint64_t cycle = 0;
  Digest proof;
  std::uint32_t quorum = 1;  // signer count the stage required
  std::uint64_t stamp = 0;   // anti-spam nonce
  Digest cert_hash;

  bool operator==(const Certificate&) const = default;
};

Digest compute_cert_hash(const Certificate& c);

/// True when cert_hash matches the fields and the signer set meets quorum.
bool certificate_intact(const Certificate& c);

/// Builds a certificate and searches `stamp` until cert_hash carries at
/// least `difficulty` leading zero bits.
///
/// Throws EmptySigners when `signers` is empty and QuorumUnderflow when
/// there are fewer distinct signers than `quorum` (Initiator needs one).
Certificate issue_certificate(Stage stage, const Digest& subject, std::vector<NodeId> signers,
                              std::uint64_t cycle, const Digest& proof, std::size_t quorum = 1,
                              unsigned difficulty = 0);

/// Stamp difficulty falls one bit per unit of fee priority, floor 0.
constexpr unsigned stamp_difficulty(unsigned base, unsigned fee_priority) {
  return fee_priority >= base ? 0u : base - fee_priority;
}

Digest validator_subject(const Digest& initiator_cert_hash, const Digest& tx_hash);

void encode_certificate(ByteWriter& w, const Certificate& c);
Certificate decode_certificate(ByteReader& r);

}  // namespace parax
