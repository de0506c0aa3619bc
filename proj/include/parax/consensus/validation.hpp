#pragma once

#include <optional>
#include <span>
#include <vector>

#include "parax/consensus/state.hpp"
#include "parax/ledger/certificate.hpp"
#include "parax/ledger/keys.hpp"
#include "parax/ledger/transaction.hpp"
#include "parax/shard/shard.hpp"

namespace parax::consensus {

/// Splits the canonical encoding into k contiguous segments whose sizes
/// differ by at most one byte (the longer ones first).
std::vector<Bytes> split_segments(ByteView encoding, std::size_t k);
std::vector<Bytes> segment_transaction(const SignedTransaction& tx, std::size_t k);

/// Segments per transaction for a committee of `members`: min(members, 4).
constexpr std::size_t segments_for(std::size_t members) { return members < 4 ? members : 4; }

enum class Verdict : std::uint8_t { Approve = 1, Reject = 2 };

struct SegmentVote {
  NodeId voter{};
  Digest tx_hash;
  std::uint32_t segment_index = 0;
  Verdict verdict = Verdict::Reject;
  RejectReason reason = RejectReason::None;
  Digest segment_digest;  // digest of the bytes the voter actually checked
  Signature signature{};

  bool operator==(const SegmentVote&) const = default;
};

Bytes vote_signing_bytes(const SegmentVote& v);
Digest vote_hash(const SegmentVote& v);
SegmentVote sign_vote(SegmentVote v, const KeyPair& key);
bool verify_vote(const SegmentVote& v, const PublicKey& key);

struct ValidatorSet {
  Group group = Group::Transfer;
  std::uint32_t shard = 0;
  std::uint64_t cycle = 0;
  std::vector<NodeId> members;  // selector rank order
  std::vector<PublicKey> keys;  // parallel to members
  std::size_t quorum = 1;

  bool contains(NodeId n) const;
  const PublicKey* key_of(NodeId n) const;
};

ValidatorSet make_validator_set(Group group, std::uint32_t shard, std::uint64_t cycle,
                                std::vector<NodeId> members, std::vector<PublicKey> keys);

/// What a validator knows when it checks a segment.
struct ValidationContext {
  const LedgerState& state;
  std::optional<Amount> fee;          // nullopt: fee rule does not apply (malformed)
  std::uint64_t expected_nonce = 0;   // committed nonce + earlier live txs of the sender
  std::size_t segments = 1;
  const shard::ShardMap& shards;
  std::span<const NodeId> forwarded_to;  // committee that received the batch
  std::optional<bool> signature_valid;   // verify_signature(tx), when already known
};

/// Approve iff the received bytes hash to the declared segment and, for
/// segment 0, the sender can cover value + fee at the expected nonce.
/// Throws NotHolder when the node neither homes the segment's shard nor
/// belongs to the committee the batch was forwarded to.
SegmentVote validate_segment(NodeId node, const KeyPair& key, const SignedTransaction& tx,
                             std::size_t segment_index, ByteView received,
                             const ValidationContext& ctx);

enum class Outcome { Validated, Rejected, Deferred };

std::string_view outcome_name(Outcome o);

struct ValidationResult {
  Outcome outcome = Outcome::Deferred;
  std::optional<Certificate> certificate;  // Validator certificate when Validated
  std::vector<NodeId> approvers;
  std::vector<NodeId> counted;       // voters whose votes were accepted
  std::vector<NodeId> equivocators;  // conflicting votes on a segment
  RejectReason reason = RejectReason::None;
};

/// Validated iff every segment has at least quorum approvals over the
/// declared segment digest. Rejected when rejections on some segment make
/// quorum unreachable; otherwise Deferred (votes missing). Votes with bad
/// signatures are ignored; a voter sending conflicting votes on a segment
/// is discarded for that segment. Throws ForeignVote for non-members.
ValidationResult aggregate_votes(std::span<const SegmentVote> votes, const ValidatorSet& set,
                                 const SignedTransaction& tx, std::size_t segments,
                                 unsigned stamp_difficulty = 0);

}  // namespace parax::consensus
