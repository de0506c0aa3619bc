#include "parax/shard/shard.hpp"

#include <algorithm>

#include "parax/ledger/error.hpp"

namespace parax::shard {

Group classify_group(const SignedTransaction& tx, bool to_is_contract) {
  if (to_is_contract) return Group::Contract;
  if (tx.payload.empty()) return Group::Transfer;
  switch (tx.payload.front()) {
    case static_cast<std::uint8_t>(PayloadKind::Receipt):
    case static_cast<std::uint8_t>(PayloadKind::SwapRelease):
    case static_cast<std::uint8_t>(PayloadKind::SwapRefund):
      return Group::Receipt;
    default:
      return Group::Other;
  }
}

Digest selector_key(std::uint64_t seed, std::uint64_t cycle, SelectorTag tag, NodeId node) {
  return Hasher()
      .update_u64(seed)
      .update_u64(cycle)
      .update_u64(tag)
      .update_u64(raw(node))
      .finish();
}

std::vector<NodeId> select_validators(std::uint64_t seed, std::uint64_t cycle, SelectorTag tag,
                                      std::span<const NodeId> pool, std::size_t k,
                                      std::uint64_t redraw_every) {
  if (pool.empty() || k > pool.size()) {
    throw Error(Errc::InsufficientNodes,
                "need " + std::to_string(k) + " of " + std::to_string(pool.size()) + " nodes");
  }
  const std::uint64_t epoch = redraw_every <= 1 ? cycle : cycle - cycle % redraw_every;

  std::vector<std::pair<Digest, NodeId>> ranked;
  ranked.reserve(pool.size());
  for (auto n : pool) ranked.emplace_back(selector_key(seed, epoch, tag, n), n);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());

  std::vector<NodeId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
  return out;
}

bool ShardMap::holds(NodeId node, std::uint32_t shard) const {
  if (shard >= homes.size()) return false;
  return std::binary_search(homes[shard].begin(), homes[shard].end(), node);
}

bool ShardMap::valid() const {
  if (ranges.empty() || ranges.size() != homes.size()) return false;
  if (ranges.front().lo != 0 || ranges.back().hi != UINT64_MAX) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].lo > ranges[i].hi) return false;
    if (i > 0 && ranges[i].lo != ranges[i - 1].hi + 1) return false;
    if (ranges[i].shard >= homes.size()) return false;
  }
  return std::all_of(homes.begin(), homes.end(),
                     [&](const auto& h) { return h.size() == replication; });
}

namespace {

std::vector<NodeId> draw_homes(std::uint64_t seed, std::uint64_t cycle, std::uint32_t shard,
                               std::size_t replication, std::span<const NodeId> nodes) {
  auto homes = select_validators(seed, cycle, home_tag(shard), nodes, replication);
  std::sort(homes.begin(), homes.end());
  return homes;
}

}  // namespace

ShardMap make_shard_map(std::uint32_t count, std::size_t replication, std::uint64_t seed,
                        std::span<const NodeId> nodes) {
  if (count == 0) count = 1;
  ShardMap map;
  map.replication = replication;
  auto boundary = [count](std::uint32_t s) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(s) << 64) / count);
  };
  for (std::uint32_t s = 0; s < count; ++s) {
    std::uint64_t lo = boundary(s);
    std::uint64_t hi = s + 1 == count ? UINT64_MAX : boundary(s + 1) - 1;
    map.ranges.push_back({lo, hi, s});
    map.homes.push_back(draw_homes(seed, 0, s, replication, nodes));
  }
  return map;
}

std::uint32_t shard_for_key(const Digest& key, const ShardMap& map) {
  const auto p = key.prefix64();
  auto it = std::lower_bound(map.ranges.begin(), map.ranges.end(), p,
                             [](const ShardRange& r, std::uint64_t v) { return r.hi < v; });
  return it->shard;
}

Rebalanced rebalance(std::uint64_t seed, std::uint64_t cycle, const ShardMap& map,
                     std::span<const NodeId> nodes) {
  Rebalanced out{map, {}};
  for (std::uint32_t s = 0; s < map.homes.size(); ++s) {
    auto fresh = draw_homes(seed, cycle, s, map.replication, nodes);
    const auto& old = map.homes[s];
    std::vector<NodeId> leaving, joining;
    std::set_difference(old.begin(), old.end(), fresh.begin(), fresh.end(),
                        std::back_inserter(leaving));
    std::set_difference(fresh.begin(), fresh.end(), old.begin(), old.end(),
                        std::back_inserter(joining));
    for (std::size_t i = 0; i < leaving.size() && i < joining.size(); ++i) {
      out.plan.push_back({s, leaving[i], joining[i]});
    }
    out.map.homes[s] = std::move(fresh);
  }
  return out;
}

ShardMap apply_plan(ShardMap map, std::span<const Move> plan) {
  for (const auto& m : plan) {
    auto& h = map.homes.at(m.shard);
    std::replace(h.begin(), h.end(), m.from, m.to);
    std::sort(h.begin(), h.end());
  }
  return map;
}

}  // namespace parax::shard
