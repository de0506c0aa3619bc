#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracle.hpp"
#include "parax/ledger/error.hpp"
#include "parax/ledger/transaction.hpp"
#include "parax/shard/shard.hpp"

using namespace parax;
using namespace parax::shard;

namespace {

std::vector<NodeId> nodes(std::uint32_t n) {
  std::vector<NodeId> out;
  for (std::uint32_t i = 1; i <= n; ++i) out.push_back(NodeId{i});
  return out;
}

Digest ref_key(std::uint64_t seed, std::uint64_t cycle, std::uint64_t tag, NodeId n) {
  std::vector<std::uint8_t> buf;
  oracle::append_be64(buf, seed);
  oracle::append_be64(buf, cycle);
  oracle::append_be64(buf, tag);
  oracle::append_be64(buf, raw(n));
  return oracle::sha256(buf);
}

std::vector<NodeId> ref_select(std::uint64_t seed, std::uint64_t cycle, std::uint64_t tag,
                               const std::vector<NodeId>& pool, std::size_t k) {
  std::vector<std::pair<Digest, NodeId>> ranked;
  for (auto n : pool) ranked.emplace_back(ref_key(seed, cycle, tag, n), n);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first.bytes < b.first.bytes; });
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
  return out;
}

}  // namespace

TEST_SUITE("selector") {

TEST_CASE("seed 1, cycle 7, G2, 8 nodes, k=3 matches exhaustive ranking") {
  const auto pool = nodes(8);
  const auto tag = committee_tag(Group::Transfer);
  CHECK(select_validators(1, 7, tag, pool, 3) == ref_select(1, 7, tag, pool, 3));
  for (auto n : pool) CHECK(selector_key(1, 7, tag, n) == ref_key(1, 7, tag, n));
}

TEST_CASE("k equal to the pool returns the whole pool in rank order") {
  const auto pool = nodes(8);
  const auto all = select_validators(3, 11, kConstructorTag, pool, 8);
  CHECK(all == ref_select(3, 11, kConstructorTag, pool, 8));
  auto sorted = all;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == pool);
}

TEST_CASE("brute-force agreement across seeds, cycles, tags and pool sizes") {
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (std::uint64_t cycle = 0; cycle < 25; ++cycle)
      for (std::uint32_t n : {1u, 4u, 9u})
        for (auto g : kAllGroups) {
          const auto pool = nodes(n);
          const std::size_t k = std::min<std::size_t>(n, 4);
          CHECK(select_validators(seed, cycle, committee_tag(g, 2), pool, k) ==
                ref_select(seed, cycle, committee_tag(g, 2), pool, k));
        }
}

TEST_CASE("redraw period holds the draw constant within an epoch") {
  const auto pool = nodes(8);
  for (std::uint64_t c = 0; c < 40; ++c) {
    CHECK(select_validators(5, c, 2, pool, 3, 8) == ref_select(5, c - c % 8, 2, pool, 3));
  }
}

TEST_CASE("empty or short pool throws InsufficientNodes") {
  CHECK_THROWS_AS(select_validators(1, 1, 2, std::vector<NodeId>{}, 1), Error);
  try {
    select_validators(1, 1, 2, nodes(2), 3);
    FAIL("expected InsufficientNodes");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientNodes);
  }
}

TEST_CASE("10,000 cycles, 8 nodes, k=2: counts within 2500 +- 130 and chi-square p > 0.001") {
  const auto pool = nodes(8);
  std::map<NodeId, double> counts;
  for (std::uint64_t c = 0; c < 10'000; ++c)
    for (auto n : select_validators(1, c, committee_tag(Group::Transfer), pool, 2)) counts[n] += 1;
  double chi2 = 0;
  for (auto n : pool) {
    CHECK(counts[n] >= 2370);
    CHECK(counts[n] <= 2630);
    chi2 += (counts[n] - 2500) * (counts[n] - 2500) / 2500;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(7), chi2));
  CHECK(p > 0.001);
}

}

TEST_SUITE("shard") {

TEST_CASE("classify_group follows the group table and is stable") {
  const auto kp = KeyPair::derive(1, "s");
  auto make = [&](Bytes payload) {
    TxDraft d;
    d.to = KeyPair::derive(1, "t").account();
    d.value = 1;
    d.payload = std::move(payload);
    return create_transaction(kp, d, NodeId{1}, 0).tx;
  };
  const auto transfer = make({});
  CHECK(classify_group(transfer, true) == Group::Contract);
  CHECK(classify_group(transfer, false) == Group::Transfer);
  CHECK(classify_group(make({0x03, 1}), false) == Group::Receipt);
  CHECK(classify_group(make({0x01, 1}), false) == Group::Other);
  CHECK(classify_group(make({0x02, 1}), false) == Group::Other);
  CHECK(classify_group(make({0x02, 1}), true) == Group::Contract);
  for (int i = 0; i < 3; ++i) CHECK(classify_group(make({0x03}), false) == Group::Receipt);
}

TEST_CASE("shard_for_key edges and uniformity over equal ranges") {
  const auto map = make_shard_map(4, 2, 1, nodes(6));
  REQUIRE(map.valid());
  Digest zero{}, ones{};
  ones.bytes.fill(0xff);
  CHECK(shard_for_key(zero, map) == map.ranges.front().shard);
  CHECK(shard_for_key(ones, map) == map.ranges.back().shard);

  std::mt19937_64 rng(5);
  std::array<int, 4> hits{};
  for (int i = 0; i < 1000; ++i) {
    Digest d;
    for (auto& b : d.bytes) b = static_cast<std::uint8_t>(rng());
    ++hits[shard_for_key(d, map)];
  }
  for (int h : hits) {
    CHECK(h >= 200);
    CHECK(h <= 300);
  }
}

TEST_CASE("ranges tile the key space with no gaps") {
  for (std::uint32_t count : {1u, 3u, 4u, 7u, 16u}) {
    const auto map = make_shard_map(count, 1, 9, nodes(4));
    REQUIRE(map.ranges.size() == count);
    CHECK(map.ranges.front().lo == 0);
    CHECK(map.ranges.back().hi == UINT64_MAX);
    for (std::size_t i = 1; i < map.ranges.size(); ++i) CHECK(map.ranges[i].lo == map.ranges[i - 1].hi + 1);
    CHECK(map.valid());
  }
}

TEST_CASE("rebalance is deterministic and its plan reproduces the new map") {
  const auto pool = nodes(4);
  const auto map = make_shard_map(4, 2, 7, pool);
  for (std::uint64_t cycle : {16u, 32u, 48u, 64u}) {
    const auto a = rebalance(7, cycle, map, pool);
    const auto b = rebalance(7, cycle, map, pool);
    CHECK(a.plan == b.plan);
    CHECK(a.map == b.map);
    CHECK(a.map.ranges == map.ranges);
    CHECK(apply_plan(map, a.plan) == a.map);
    for (const auto& homes : a.map.homes) CHECK(homes.size() == 2);
    CHECK(a.map.valid());
  }
}

TEST_CASE("rebalance boundaries") {
  CHECK_FALSE(is_rebalance_boundary(0, 16));
  CHECK(is_rebalance_boundary(16, 16));
  CHECK_FALSE(is_rebalance_boundary(17, 16));
  CHECK_FALSE(is_rebalance_boundary(16, 0));
}

}
