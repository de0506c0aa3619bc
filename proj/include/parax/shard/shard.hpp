#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parax/ledger/transaction.hpp"
#include "parax/ledger/types.hpp"

namespace parax::shard {

/// Domain-separation tag mixed into the selector digest. Group committees
/// use `committee_tag`, the constructor draw `kConstructorTag`, storage homes
/// `home_tag`.
using SelectorTag = std::uint32_t;

constexpr SelectorTag committee_tag(Group g, std::uint32_t shard = 0) {
  return static_cast<SelectorTag>(g) | (shard << 8);
}
inline constexpr SelectorTag kConstructorTag = 5;
constexpr SelectorTag home_tag(std::uint32_t shard) { return 0x0100'0000u | shard; }

/// G1 when the target is a contract account, G3 for receipt-family
/// payloads, G2 for payload-free transfers, G4 otherwise.
Group classify_group(const SignedTransaction& tx, bool to_is_contract);

/// Selector rank key: digest(seed || cycle || tag || node).
Digest selector_key(std::uint64_t seed, std::uint64_t cycle, SelectorTag tag, NodeId node);

/// Hash-ranking node selector: the k nodes with the smallest selector keys,
/// in rank order. The draw is re-randomized every `redraw_every` cycles.
/// Throws InsufficientNodes when the pool is empty or smaller than k.
std::vector<NodeId> select_validators(std::uint64_t seed, std::uint64_t cycle, SelectorTag tag,
                                      std::span<const NodeId> pool, std::size_t k,
                                      std::uint64_t redraw_every = 1);

struct ShardRange {
  std::uint64_t lo = 0;  // inclusive, over Digest::prefix64()
  std::uint64_t hi = 0;  // inclusive
  std::uint32_t shard = 0;

  bool operator==(const ShardRange&) const = default;
};

struct ShardMap {
  std::vector<ShardRange> ranges;
  std::vector<std::vector<NodeId>> homes;  // indexed by shard id, sorted
  std::size_t replication = 1;

  std::size_t shard_count() const { return homes.size(); }
  bool holds(NodeId node, std::uint32_t shard) const;
  /// Ranges cover [0, 2^64) without gaps or overlaps and every shard has
  /// exactly `replication` homes.
  bool valid() const;

  bool operator==(const ShardMap&) const = default;
};

/// `count` equal-width prefix ranges; initial homes drawn at cycle 0.
ShardMap make_shard_map(std::uint32_t count, std::size_t replication, std::uint64_t seed,
                        std::span<const NodeId> nodes);

std::uint32_t shard_for_key(const Digest& key, const ShardMap& map);

struct Move {
  std::uint32_t shard = 0;
  NodeId from{};
  NodeId to{};

  bool operator==(const Move&) const = default;
};

struct Rebalanced {
  ShardMap map;
  std::vector<Move> plan;
};

constexpr bool is_rebalance_boundary(std::uint64_t cycle, std::uint64_t every) {
  return every != 0 && cycle != 0 && cycle % every == 0;
}

/// Re-draws every shard's homes with the selector; ranges are untouched.
Rebalanced rebalance(std::uint64_t seed, std::uint64_t cycle, const ShardMap& map,
                     std::span<const NodeId> nodes);

/// Applies a plan to a map's home sets (used to check plans are complete).
ShardMap apply_plan(ShardMap map, std::span<const Move> plan);

}  // namespace parax::shard
