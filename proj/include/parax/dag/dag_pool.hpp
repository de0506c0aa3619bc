#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "parax/ledger/transaction.hpp"
#include "parax/shard/shard.hpp"

namespace parax::dag {

using VertexId = std::uint64_t;

enum class Status : std::uint8_t { Pending, Assigned, Validated, Finalized, Rejected };

std::string_view status_name(Status s);

/// Forward-only lattice Pending -> Assigned -> Validated -> Finalized, with
/// Rejected reachable from the three non-final states.
bool transition_allowed(Status from, Status to);

struct DagVertex {
  VertexId id = 0;  // admission index
  Digest tx_hash;
  std::vector<VertexId> parents;  // 0..2, always older ids
  std::uint64_t cycle = 0;
  Group group = Group::Transfer;
  Status status = Status::Pending;
};

/// The four indexed projections of the vertex store.
struct DagViews {
  std::map<AccountId, Digest> global_state_view;  // latest finalized tx touching the account
  std::map<Digest, VertexId> tx_view;
  std::map<std::uint32_t, std::set<Digest>> storage_view;  // shard -> stored tx hashes
  std::map<std::uint64_t, std::vector<std::pair<VertexId, Status>>> parsing_index;

  bool operator==(const DagViews&) const = default;
};

struct CycleBatch {
  std::uint64_t cycle = 0;
  std::map<Group, std::vector<VertexId>> groups;

  bool empty() const { return groups.empty(); }
  std::size_t size() const;
};

/// Blockless mempool. Single writer; the chain owns one per instance.
class DagPool {
 public:
  explicit DagPool(std::vector<shard::ShardRange> storage_ranges = {{0, UINT64_MAX, 0}});

  /// Admits a signed transaction as a Pending vertex whose parents are
  /// frontier(2). Throws BadSignature, DuplicateTransaction or NonceGap.
  VertexId insert_transaction(const SignedTransaction& tx, Group group, std::uint64_t current_cycle);

  /// Closes the current cycle: every Pending vertex becomes Assigned and is
  /// returned grouped by group id. The counter always advances.
  CycleBatch advance_cycle();

  /// Throws IllegalTransition outside the lattice.
  const DagVertex& mark_status(VertexId id, Status next);

  /// The k oldest non-rejected vertices with no Validated/Finalized child.
  std::vector<VertexId> frontier(std::size_t k) const;

  const DagVertex& vertex(VertexId id) const { return vertices_.at(id); }
  const SignedTransaction& transaction(VertexId id) const { return txs_.at(id); }
  std::size_t size() const { return vertices_.size(); }
  std::uint64_t cycle() const { return cycle_; }
  bool contains(const Digest& tx_hash) const { return views_.tx_view.count(tx_hash) != 0; }
  std::uint64_t expected_nonce(const AccountId& sender) const;

  const DagViews& views() const { return views_; }
  /// Recomputes the four views from the vertex store alone.
  DagViews rebuild_views() const;

  /// One line per vertex: `vertex_id parent_ids cycle group status tx_hash`,
  /// parents comma-separated or `-`.
  std::string dump() const;

 private:
  void record_state(VertexId id);

  std::vector<shard::ShardRange> ranges_;
  std::vector<DagVertex> vertices_;
  std::vector<SignedTransaction> txs_;
  std::vector<bool> was_validated_;
  std::vector<VertexId> pending_;
  std::set<VertexId> tips_;
  std::unordered_map<AccountId, std::uint64_t> next_nonce_;
  std::map<AccountId, VertexId> latest_final_;
  DagViews views_;
  std::uint64_t cycle_ = 0;
};

}  // namespace parax::dag
