#include "parax/consensus/validation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "parax/consensus/merkle.hpp"
#include "parax/ledger/error.hpp"

namespace parax::consensus {

std::vector<Bytes> split_segments(ByteView encoding, std::size_t k) {
  if (k == 0) k = 1;
  std::vector<Bytes> out;
  out.reserve(k);
  const std::size_t base = encoding.size() / k;
  const std::size_t extra = encoding.size() % k;
  std::size_t at = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.emplace_back(encoding.begin() + static_cast<std::ptrdiff_t>(at),
                     encoding.begin() + static_cast<std::ptrdiff_t>(at + len));
    at += len;
  }
  return out;
}

std::vector<Bytes> segment_transaction(const SignedTransaction& tx, std::size_t k) {
  return split_segments(canonical_encode(tx), k);
}

Bytes vote_signing_bytes(const SegmentVote& v) {
  ByteWriter w;
  w.str("parax-vote")
      .u32(raw(v.voter))
      .raw(v.tx_hash.bytes)
      .u32(v.segment_index)
      .u8(static_cast<std::uint8_t>(v.verdict))
      .u8(static_cast<std::uint8_t>(v.reason))
      .raw(v.segment_digest.bytes);
  return std::move(w).take();
}

Digest vote_hash(const SegmentVote& v) {
  return Hasher().update(vote_signing_bytes(v)).update(ByteView(v.signature)).finish();
}

SegmentVote sign_vote(SegmentVote v, const KeyPair& key) {
  v.signature = key.sign(vote_signing_bytes(v));
  return v;
}

bool verify_vote(const SegmentVote& v, const PublicKey& key) {
  return verify_detached(vote_signing_bytes(v), v.signature, key);
}

bool ValidatorSet::contains(NodeId n) const {
  return std::find(members.begin(), members.end(), n) != members.end();
}

const PublicKey* ValidatorSet::key_of(NodeId n) const {
  auto it = std::find(members.begin(), members.end(), n);
  if (it == members.end()) return nullptr;
  return &keys[static_cast<std::size_t>(it - members.begin())];
}

ValidatorSet make_validator_set(Group group, std::uint32_t shard, std::uint64_t cycle,
                                std::vector<NodeId> members, std::vector<PublicKey> keys) {
  ValidatorSet s;
  s.group = group;
  s.shard = shard;
  s.cycle = cycle;
  s.quorum = quorum_for(members.size());
  s.members = std::move(members);
  s.keys = std::move(keys);
  return s;
}

SegmentVote validate_segment(NodeId node, const KeyPair& key, const SignedTransaction& tx,
                             std::size_t segment_index, ByteView received,
                             const ValidationContext& ctx) {
  const auto expected = segment_transaction(tx, ctx.segments);
  if (segment_index >= expected.size()) {
    throw Error(Errc::IndexOutOfRange, "segment " + std::to_string(segment_index));
  }
  const auto declared = digest(expected[segment_index]);
  const bool forwarded =
      std::find(ctx.forwarded_to.begin(), ctx.forwarded_to.end(), node) != ctx.forwarded_to.end();
  if (!forwarded && !ctx.shards.holds(node, shard::shard_for_key(declared, ctx.shards))) {
    throw Error(Errc::NotHolder, "node " + std::to_string(raw(node)) + " segment " +
                                     std::to_string(segment_index));
  }

  SegmentVote v;
  v.voter = node;
  v.tx_hash = hash_transaction(tx);
  v.segment_index = static_cast<std::uint32_t>(segment_index);
  v.segment_digest = digest(received);

  RejectReason reason = RejectReason::None;
  if (v.segment_digest != declared) {
    reason = RejectReason::HashMismatch;
  } else if (segment_index == 0) {
    if (!(ctx.signature_valid ? *ctx.signature_valid : verify_signature(tx))) {
      reason = RejectReason::BadSignature;
    } else if (tx.hash_data != digest(tx.payload) || !ctx.fee) {
      reason = RejectReason::MalformedPayload;
    } else if (tx.nonce != ctx.expected_nonce) {
      reason = RejectReason::BadNonce;
    } else {
      const Amount bal = ctx.state.balance(tx.sender);
      if (tx.value > bal || *ctx.fee > bal - tx.value) reason = RejectReason::InsufficientBalance;
    }
  }
  v.verdict = reason == RejectReason::None ? Verdict::Approve : Verdict::Reject;
  v.reason = reason;
  return sign_vote(std::move(v), key);
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Validated: return "validated";
    case Outcome::Rejected: return "rejected";
    case Outcome::Deferred: return "deferred";
  }
  return "?";
}

ValidationResult aggregate_votes(std::span<const SegmentVote> votes, const ValidatorSet& set,
                                 const SignedTransaction& tx, std::size_t segments,
                                 unsigned stamp_difficulty) {
  for (const auto& v : votes) {
    if (!set.contains(v.voter)) {
      throw Error(Errc::ForeignVote, "voter " + std::to_string(raw(v.voter)));
    }
  }
  const auto tx_hash = hash_transaction(tx);
  const auto expected = segment_transaction(tx, segments);
  std::vector<Digest> declared;
  declared.reserve(expected.size());
  for (const auto& s : expected) declared.push_back(digest(s));

  // (segment, voter) -> distinct accepted votes
  std::map<std::pair<std::uint32_t, NodeId>, std::vector<const SegmentVote*>> by_slot;
  for (const auto& v : votes) {
    if (v.tx_hash != tx_hash || v.segment_index >= declared.size()) continue;
    if (!verify_vote(v, *set.key_of(v.voter))) continue;
    auto& slot = by_slot[{v.segment_index, v.voter}];
    bool duplicate = std::any_of(slot.begin(), slot.end(), [&](const SegmentVote* o) {
      return o->verdict == v.verdict && o->segment_digest == v.segment_digest;
    });
    if (!duplicate) slot.push_back(&v);
  }

  ValidationResult r;
  std::set<NodeId> approvers, counted, equivocators;
  std::vector<std::size_t> approve_count(declared.size(), 0), reject_count(declared.size(), 0);
  std::vector<RejectReason> first_reason(declared.size(), RejectReason::None);
  std::vector<Digest> proof_leaves;

  for (const auto& [slot, list] : by_slot) {
    const auto [segment, voter] = slot;
    if (list.size() > 1) {
      equivocators.insert(voter);
      continue;
    }
    const auto& v = *list.front();
    counted.insert(voter);
    if (v.verdict == Verdict::Approve && v.segment_digest == declared[segment]) {
      ++approve_count[segment];
      approvers.insert(voter);
      proof_leaves.push_back(vote_hash(v));
    } else if (v.verdict == Verdict::Reject) {
      ++reject_count[segment];
      if (first_reason[segment] == RejectReason::None) first_reason[segment] = v.reason;
    }
  }

  r.approvers.assign(approvers.begin(), approvers.end());
  r.counted.assign(counted.begin(), counted.end());
  r.equivocators.assign(equivocators.begin(), equivocators.end());

  const std::size_t n = set.members.size();
  const bool all_segments = std::all_of(approve_count.begin(), approve_count.end(),
                                        [&](std::size_t c) { return c >= set.quorum; });
  if (all_segments) {
    r.outcome = Outcome::Validated;
    std::sort(proof_leaves.begin(), proof_leaves.end());
    r.certificate = issue_certificate(Stage::Validator, validator_subject(tx.cert_id, tx_hash),
                                      r.approvers, set.cycle, merkle_root(proof_leaves), set.quorum,
                                      stamp_difficulty);
    return r;
  }
  for (std::size_t s = 0; s < declared.size(); ++s) {
    if (reject_count[s] > n - set.quorum) {
      r.outcome = Outcome::Rejected;
      r.reason = first_reason[s];
      return r;
    }
  }
  r.outcome = Outcome::Deferred;
  return r;
}

}  // namespace parax::consensus
