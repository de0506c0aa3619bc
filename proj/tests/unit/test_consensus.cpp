#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "parax/consensus/block.hpp"
#include "parax/consensus/validation.hpp"
#include "parax/ledger/error.hpp"

using namespace parax;
using namespace parax::consensus;

namespace {

struct Committee {
  std::vector<NodeId> ids;
  std::vector<KeyPair> keys;
  ValidatorSet set;
  shard::ShardMap shards;

  explicit Committee(std::size_t n) {
    std::vector<PublicKey> pubs;
    for (std::uint32_t i = 1; i <= n; ++i) {
      ids.push_back(NodeId{i});
      keys.push_back(KeyPair::derive(3, "member/" + std::to_string(i)));
      pubs.push_back(keys.back().public_key());
    }
    set = make_validator_set(Group::Transfer, 0, 1, ids, pubs);
    shards = shard::make_shard_map(1, 1, 3, ids);
  }
};

KeyPair alice() { return KeyPair::derive(3, "alice"); }
KeyPair bob() { return KeyPair::derive(3, "bob"); }

Initiated pay(const KeyPair& from, const AccountId& to, Amount value, std::uint64_t nonce) {
  TxDraft d;
  d.to = to;
  d.value = value;
  d.nonce = nonce;
  return create_transaction(from, d, NodeId{1}, 0);
}

LedgerState funded(Amount alice_balance) {
  LedgerState s;
  s.touch(alice().account()).balance = alice_balance;
  s.supply = alice_balance;
  return s;
}

std::vector<SegmentVote> honest_votes(const Committee& c, const SignedTransaction& tx, const LedgerState& s,
                                      double friction = 1.0) {
  const auto segs = segments_for(c.ids.size());
  const auto parts = segment_transaction(tx, segs);
  const ValidationContext ctx{s, expected_fee(s, tx, friction), s.nonce(tx.sender), segs, c.shards, c.ids, {}};
  std::vector<SegmentVote> votes;
  for (std::size_t i = 0; i < c.ids.size(); ++i)
    for (std::size_t k = 0; k < segs; ++k) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, k, parts[k], ctx));
  return votes;
}

ValidatedTx validated(const Committee& c, const Initiated& in, const LedgerState& s, dag::VertexId v) {
  const auto votes = honest_votes(c, in.tx, s);
  const auto r = aggregate_votes(votes, c.set, in.tx, segments_for(c.ids.size()));
  REQUIRE(r.outcome == Outcome::Validated);
  return {v, 0, in.tx, Group::Transfer, in.initiator, r.certificate};
}

Block seal(BlockDraft d, std::size_t signers) {
  std::vector<NodeId> ids;
  for (std::uint32_t i = 1; i <= signers; ++i) ids.push_back(NodeId{i});
  d.block.constructor_cert =
      issue_certificate(Stage::Constructor, block_subject(d.block), ids, d.block.cycle, d.block.state_root);
  return d.block;
}

}  // namespace

TEST_SUITE("validation") {

TEST_CASE("segment sizes and round trip") {
  Bytes ten(10);
  for (std::size_t i = 0; i < 10; ++i) ten[i] = static_cast<std::uint8_t>(i);
  const auto three = split_segments(ten, 3);
  REQUIRE(three.size() == 3);
  CHECK(three[0].size() == 4);
  CHECK(three[1].size() == 3);
  CHECK(three[2].size() == 3);
  CHECK(split_segments(ten, 1).front() == ten);

  const auto tx = pay(alice(), bob().account(), 5, 0).tx;
  const auto enc = canonical_encode(tx);
  for (std::size_t k = 1; k <= 16; ++k) {
    Bytes joined;
    for (const auto& s : segment_transaction(tx, k)) joined.insert(joined.end(), s.begin(), s.end());
    CHECK(joined == enc);
  }
  CHECK(segments_for(1) == 1);
  CHECK(segments_for(4) == 4);
  CHECK(segments_for(9) == 4);
}

TEST_CASE("validate_segment verdicts") {
  Committee c(4);
  const auto s = funded(100);
  const auto tx = pay(alice(), bob().account(), 10, 0).tx;
  const auto parts = segment_transaction(tx, 4);
  const ValidationContext ctx{s, expected_fee(s, tx, 1.0), 0, 4, c.shards, c.ids, {}};

  const auto ok = validate_segment(c.ids[0], c.keys[0], tx, 0, parts[0], ctx);
  CHECK(ok.verdict == Verdict::Approve);
  CHECK(verify_vote(ok, c.keys[0].public_key()));
  CHECK_FALSE(verify_vote(ok, c.keys[1].public_key()));

  auto bent = parts[2];
  bent[0] ^= 1;
  const auto mismatch = validate_segment(c.ids[1], c.keys[1], tx, 2, bent, ctx);
  CHECK(mismatch.verdict == Verdict::Reject);
  CHECK(mismatch.reason == RejectReason::HashMismatch);

  // balance 100 covers value 99 + fee 1 but not value 100 + fee 1
  const auto edge = pay(alice(), bob().account(), 99, 0).tx;
  const ValidationContext ectx{s, expected_fee(s, edge, 1.0), 0, 1, c.shards, c.ids, {}};
  CHECK(validate_segment(c.ids[0], c.keys[0], edge, 0, canonical_encode(edge), ectx).verdict == Verdict::Approve);
  const auto over = pay(alice(), bob().account(), 100, 0).tx;
  const ValidationContext octx{s, expected_fee(s, over, 1.0), 0, 1, c.shards, c.ids, {}};
  const auto v = validate_segment(c.ids[0], c.keys[0], over, 0, canonical_encode(over), octx);
  CHECK(v.reason == RejectReason::InsufficientBalance);

  const ValidationContext nctx{s, expected_fee(s, tx, 1.0), 1, 4, c.shards, c.ids, {}};
  CHECK(validate_segment(c.ids[0], c.keys[0], tx, 0, parts[0], nctx).reason == RejectReason::BadNonce);

  const ValidationContext outsider{s, expected_fee(s, tx, 1.0), 0, 4, shard::make_shard_map(1, 1, 3, std::vector<NodeId>{NodeId{1}}), {}, {}};
  try {
    validate_segment(NodeId{9}, c.keys[0], tx, 0, parts[0], outsider);
    FAIL("expected NotHolder");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotHolder);
  }
}

TEST_CASE("aggregation: quorum arithmetic, unanimity, all-reject") {
  Committee c(4);
  CHECK(c.set.quorum == 3);
  const auto s = funded(100);
  const auto tx = pay(alice(), bob().account(), 10, 0).tx;
  const auto parts = split_segments(canonical_encode(tx), 1);
  const ValidationContext ctx{s, expected_fee(s, tx, 1.0), 0, 1, c.shards, c.ids, {}};
  auto bent = parts[0];
  bent.back() ^= 1;

  std::vector<SegmentVote> votes;
  for (std::size_t i = 0; i < 4; ++i) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, i == 3 ? bent : parts[0], ctx));
  auto r = aggregate_votes(votes, c.set, tx, 1);
  CHECK(r.outcome == Outcome::Validated);
  REQUIRE(r.certificate);
  CHECK(r.certificate->signers.size() == 3);
  CHECK(r.certificate->subject == validator_subject(tx.cert_id, hash_transaction(tx)));

  votes.clear();
  for (std::size_t i = 0; i < 4; ++i) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, parts[0], ctx));
  CHECK(aggregate_votes(votes, c.set, tx, 1).approvers.size() == 4);

  votes.clear();
  for (std::size_t i = 0; i < 4; ++i) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, bent, ctx));
  r = aggregate_votes(votes, c.set, tx, 1);
  CHECK(r.outcome == Outcome::Rejected);
  CHECK_FALSE(r.certificate);
  CHECK(r.reason == RejectReason::HashMismatch);

  // two approvals and nothing else: neither quorum nor a blocking minority
  votes.resize(0);
  for (std::size_t i = 0; i < 2; ++i) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, parts[0], ctx));
  CHECK(aggregate_votes(votes, c.set, tx, 1).outcome == Outcome::Deferred);
}

TEST_CASE("aggregation: every approve/reject/missing split over 4 members matches the quorum rule") {
  Committee c(4);
  const auto s = funded(100);
  const auto tx = pay(alice(), bob().account(), 10, 0).tx;
  const auto enc = canonical_encode(tx);
  auto bent = enc;
  bent[0] ^= 1;
  const ValidationContext ctx{s, expected_fee(s, tx, 1.0), 0, 1, c.shards, c.ids, {}};
  for (int mask = 0; mask < 81; ++mask) {
    std::vector<SegmentVote> votes;
    int approve = 0, reject = 0, m = mask;
    for (std::size_t i = 0; i < 4; ++i, m /= 3) {
      if (m % 3 == 1) {
        votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, enc, ctx));
        ++approve;
      } else if (m % 3 == 2) {
        votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, bent, ctx));
        ++reject;
      }
    }
    const auto want = approve >= 3 ? Outcome::Validated : reject >= 2 ? Outcome::Rejected : Outcome::Deferred;
    CHECK(aggregate_votes(votes, c.set, tx, 1).outcome == want);
  }
}

TEST_CASE("equivocation, forged votes and foreign voters") {
  Committee c(4);
  const auto s = funded(100);
  const auto tx = pay(alice(), bob().account(), 10, 0).tx;
  const auto enc = canonical_encode(tx);
  auto bent = enc;
  bent[0] ^= 1;
  const ValidationContext ctx{s, expected_fee(s, tx, 1.0), 0, 1, c.shards, c.ids, {}};
  std::vector<SegmentVote> votes;
  for (std::size_t i = 0; i < 3; ++i) votes.push_back(validate_segment(c.ids[i], c.keys[i], tx, 0, enc, ctx));
  votes.push_back(validate_segment(c.ids[2], c.keys[2], tx, 0, bent, ctx));
  auto r = aggregate_votes(votes, c.set, tx, 1);
  CHECK(r.equivocators == std::vector<NodeId>{c.ids[2]});
  CHECK(r.outcome == Outcome::Deferred);

  votes.resize(2);
  auto forged = validate_segment(c.ids[3], c.keys[0], tx, 0, enc, ctx);
  votes.push_back(forged);
  CHECK(aggregate_votes(votes, c.set, tx, 1).outcome == Outcome::Deferred);

  auto foreign = votes.front();
  foreign.voter = NodeId{77};
  votes.push_back(foreign);
  CHECK_THROWS_AS(aggregate_votes(votes, c.set, tx, 1), Error);
}

}

TEST_SUITE("block") {

TEST_CASE("empty validated set keeps the prior root") {
  const auto s = funded(10);
  const auto d = construct_block({}, s, 1, Digest{}, {});
  CHECK(d.block.tx_hashes.empty());
  CHECK(d.block.state_root == s.root());
}

TEST_CASE("A(10) pays B 4 with fee 1") {
  Committee c(4);
  const auto s = funded(10);
  const auto in = pay(alice(), bob().account(), 4, 0);
  BlockParams p;
  p.friction = 1.0;
  const auto d = construct_block({validated(c, in, s, 0)}, s, 1, Digest{}, p);
  CHECK(d.state.balance(alice().account()) == 5);
  CHECK(d.state.balance(bob().account()) == 4);
  CHECK(d.state.pool == 1);
  CHECK(d.state.conserved());
  CHECK(d.block.entries.front().fee == 1);
  CHECK(replay_block(s, seal(d, 3), 3) == d.state);
}

TEST_CASE("second spend of the same balance is vetoed") {
  Committee c(4);
  const auto s = funded(10);
  const auto first = pay(alice(), bob().account(), 6, 0);
  const auto second = pay(alice(), bob().account(), 6, 1);
  // validators check each spend against the same committed balance
  auto s1 = s;
  s1.touch(alice().account()).nonce = 1;
  const auto d = construct_block({validated(c, first, s, 0), {1, 0, second.tx, Group::Transfer, second.initiator,
                                                             validated(c, second, s1, 1).validator}},
                                 s, 1, Digest{}, {});
  CHECK(d.included == std::vector<dag::VertexId>{0});
  REQUIRE(d.vetoed.size() == 1);
  CHECK(d.vetoed[0] == std::pair<dag::VertexId, RejectReason>{1, RejectReason::InsufficientBalance});
  CHECK(d.state.balance(alice().account()) == 3);
}

TEST_CASE("missing validator certificate throws") {
  const auto s = funded(10);
  const auto in = pay(alice(), bob().account(), 1, 0);
  CHECK_THROWS_AS(construct_block({{0, 0, in.tx, Group::Transfer, in.initiator, std::nullopt}}, s, 1, Digest{}, {}), Error);
}

TEST_CASE("minting and pro-rata payout keep conservation") {
  Committee c(4);
  const auto s = funded(1000);
  const auto in = pay(alice(), bob().account(), 10, 0);
  BlockParams p;
  p.mint = 7;
  p.participation = {{KeyPair::derive(3, "n1").account(), 3}, {KeyPair::derive(3, "n2").account(), 1}};
  const auto d = construct_block({validated(c, in, s, 0)}, s, 1, Digest{}, p);
  // pool 1 + 7 = 8 split 3:1
  CHECK(d.state.balance(KeyPair::derive(3, "n1").account()) == 6);
  CHECK(d.state.balance(KeyPair::derive(3, "n2").account()) == 2);
  CHECK(d.state.pool == 0);
  CHECK(d.state.supply == 1007);
  CHECK(d.state.conserved());
  CHECK(replay_block(s, seal(d, 3), 3) == d.state);
}

TEST_CASE("encode/decode round trip and tamper detection on every field") {
  Committee c(4);
  const auto s = funded(100);
  const auto in = pay(alice(), bob().account(), 4, 0);
  const auto b = seal(construct_block({validated(c, in, s, 0)}, s, 1, Digest{}, {}), 3);
  ByteWriter w;
  encode_block(w, b);
  ByteReader r(w.data());
  CHECK(decode_block(r) == b);

  auto expect_throw = [&](Block bad, Errc code) {
    try {
      replay_block(s, bad, 3);
      FAIL("tamper not detected");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  auto b1 = b;
  b1.entries[0].tx.value = 5;
  expect_throw(b1, Errc::CorruptOutput);
  auto b2 = b;
  b2.state_root.bytes[0] ^= 1;
  expect_throw(b2, Errc::QuorumUnderflow);
  auto b3 = b;
  b3.payouts.push_back({bob().account(), 1});
  expect_throw(b3, Errc::StateRootMismatch);
  auto b4 = seal(construct_block({validated(c, in, s, 0)}, s, 1, Digest{}, {}), 2);
  expect_throw(b4, Errc::QuorumUnderflow);
  auto b5 = b;
  b5.entries[0].validator.signers.pop_back();
  expect_throw(b5, Errc::MissingValidatorCert);
  // a root signed by a quorum but wrong for the transactions
  auto d6 = construct_block({validated(c, in, s, 0)}, s, 1, Digest{}, {});
  d6.block.state_root = tamper_root(d6.block.state_root);
  expect_throw(seal(d6, 3), Errc::StateRootMismatch);
}

}
