#include <doctest.h>

#include "oracle.hpp"
#include "parax/consensus/merkle.hpp"
#include "parax/ledger/error.hpp"

using namespace parax;
using namespace parax::consensus;

namespace {

Digest leaf_of(std::size_t i) { return oracle::sha256("leaf-" + std::to_string(i)); }

std::vector<Digest> leaves(std::size_t n) {
  std::vector<Digest> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(leaf_of(i));
  return out;
}

// Straight transcription of the tree rules, built on OpenSSL.
Digest ref_root(const std::vector<Digest>& ls) {
  const auto sentinel = oracle::sha256(std::string());
  if (ls.empty()) return sentinel;
  std::vector<Digest> level;
  for (const auto& l : ls) {
    std::vector<std::uint8_t> buf{0x00};
    oracle::append(buf, l);
    level.push_back(oracle::sha256(buf));
  }
  while (level.size() > 1) {
    std::vector<Digest> up;
    for (std::size_t i = 0; i < level.size(); i += 4) {
      std::vector<std::uint8_t> buf{0x01};
      for (std::size_t j = 0; j < 4; ++j) oracle::append(buf, i + j < level.size() ? level[i + j] : sentinel);
      up.push_back(oracle::sha256(buf));
    }
    level = std::move(up);
  }
  return level[0];
}

}  // namespace

TEST_SUITE("merkle") {

TEST_CASE("four-leaf root equals the hand expansion") {
  const auto ls = leaves(4);
  std::vector<std::uint8_t> top{0x01};
  for (const auto& l : ls) {
    std::vector<std::uint8_t> leaf{0x00};
    oracle::append(leaf, l);
    oracle::append(top, oracle::sha256(leaf));
  }
  CHECK(merkle_root(ls) == oracle::sha256(top));
}

TEST_CASE("empty and single-leaf trees") {
  CHECK(merkle_root(std::vector<Digest>{}) == oracle::sha256(std::string()));
  CHECK(merkle_sentinel() == oracle::sha256(std::string()));
  const auto one = leaves(1);
  CHECK(merkle_root(one) == merkle_leaf_hash(one[0]));
}

TEST_CASE("roots match the reference for 0..64 leaves") {
  for (std::size_t n = 0; n <= 64; ++n) CHECK(merkle_root(leaves(n)) == ref_root(leaves(n)));
}

TEST_CASE("every proof verifies and every single-bit leaf or root mutation fails") {
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto ls = leaves(n);
    const auto root = merkle_root(ls);
    for (std::size_t i = 0; i < n; ++i) {
      const auto proof = merkle_prove(ls, i);
      REQUIRE(merkle_verify(root, ls[i], proof));
      for (std::size_t bit = 0; bit < 256; ++bit) {
        auto leaf = ls[i];
        leaf.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        if (merkle_verify(root, leaf, proof)) FAIL("leaf bit flip accepted n=" << n << " i=" << i << " bit=" << bit);
        auto r = root;
        r.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        if (merkle_verify(r, ls[i], proof)) FAIL("root bit flip accepted n=" << n << " i=" << i << " bit=" << bit);
      }
    }
  }
}

TEST_CASE("sibling and position mutations fail") {
  for (std::size_t n : {2u, 5u, 16u, 17u, 64u}) {
    const auto ls = leaves(n);
    const auto root = merkle_root(ls);
    for (std::size_t i = 0; i < n; ++i) {
      const auto proof = merkle_prove(ls, i);
      for (std::size_t s = 0; s < proof.steps.size(); ++s) {
        for (std::size_t k = 0; k < 3; ++k) {
          for (std::size_t bit = 0; bit < 256; bit += 37) {
            auto p = proof;
            p.steps[s].siblings[k].bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            CHECK_FALSE(merkle_verify(root, ls[i], p));
          }
        }
        auto p = proof;
        p.steps[s].position = static_cast<std::uint8_t>((p.steps[s].position + 1) % 4);
        CHECK_FALSE(merkle_verify(root, ls[i], p));
      }
    }
  }
}

TEST_CASE("out-of-range proof index throws") {
  CHECK_THROWS_AS(merkle_prove(leaves(3), 3), Error);
}

TEST_CASE("trie commitment is insertion-order independent and proves members") {
  TrieCommitment a, b;
  std::vector<std::tuple<Group, Stage, Digest>> items;
  for (int i = 0; i < 9; ++i) {
    items.emplace_back(kAllGroups[i % 4], i % 2 ? Stage::Validator : Stage::Initiator, leaf_of(i));
  }
  for (const auto& [g, s, d] : items) a.insert(g, s, d);
  for (auto it = items.rbegin(); it != items.rend(); ++it) b.insert(std::get<0>(*it), std::get<1>(*it), std::get<2>(*it));
  CHECK(a.root() == b.root());
  for (const auto& [g, s, d] : items) {
    const auto proof = a.prove(g, s, d);
    REQUIRE(proof);
    CHECK(merkle_verify(a.root(), TrieCommitment::leaf_value(g, s, d), *proof));
  }
  CHECK_FALSE(a.prove(Group::Other, Stage::Constructor, leaf_of(100)));
}

}
