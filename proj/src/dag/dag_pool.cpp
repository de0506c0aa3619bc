#include "parax/dag/dag_pool.hpp"

#include <algorithm>
#include <sstream>

#include "parax/ledger/error.hpp"

namespace parax::dag {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Pending: return "pending";
    case Status::Assigned: return "assigned";
    case Status::Validated: return "validated";
    case Status::Finalized: return "finalized";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

bool transition_allowed(Status from, Status to) {
  switch (from) {
    case Status::Pending: return to == Status::Assigned || to == Status::Rejected;
    case Status::Assigned: return to == Status::Validated || to == Status::Rejected;
    case Status::Validated: return to == Status::Finalized || to == Status::Rejected;
    case Status::Finalized:
    case Status::Rejected: return false;
  }
  return false;
}

std::size_t CycleBatch::size() const {
  std::size_t n = 0;
  for (const auto& [g, ids] : groups) n += ids.size();
  return n;
}

namespace {

std::uint32_t shard_of(const std::vector<shard::ShardRange>& ranges, const Digest& key) {
  const auto p = key.prefix64();
  auto it = std::lower_bound(ranges.begin(), ranges.end(), p,
                             [](const shard::ShardRange& r, std::uint64_t v) { return r.hi < v; });
  return it->shard;
}

}  // namespace

DagPool::DagPool(std::vector<shard::ShardRange> storage_ranges) : ranges_(std::move(storage_ranges)) {}

std::uint64_t DagPool::expected_nonce(const AccountId& sender) const {
  auto it = next_nonce_.find(sender);
  return it == next_nonce_.end() ? 0 : it->second;
}

VertexId DagPool::insert_transaction(const SignedTransaction& tx, Group group,
                                     std::uint64_t current_cycle) {
  if (!verify_signature(tx)) throw Error(Errc::BadSignature, "transaction signature invalid");
  const auto h = hash_transaction(tx);
  if (contains(h)) throw Error(Errc::DuplicateTransaction, h.short_hex());
  const auto expected = expected_nonce(tx.sender);
  if (tx.nonce != expected) {
    throw Error(Errc::NonceGap, "nonce " + std::to_string(tx.nonce) + ", expected " +
                                    std::to_string(expected));
  }

  DagVertex v;
  v.id = vertices_.size();
  v.tx_hash = h;
  v.parents = frontier(2);
  v.cycle = current_cycle;
  v.group = group;
  v.status = Status::Pending;

  views_.tx_view.emplace(h, v.id);
  views_.storage_view[shard_of(ranges_, h)].insert(h);
  tips_.insert(v.id);
  pending_.push_back(v.id);
  next_nonce_[tx.sender] = expected + 1;

  vertices_.push_back(std::move(v));
  txs_.push_back(tx);
  was_validated_.push_back(false);
  return vertices_.back().id;
}

CycleBatch DagPool::advance_cycle() {
  CycleBatch batch;
  batch.cycle = cycle_;
  for (auto id : pending_) {
    auto& v = vertices_[id];
    if (v.status != Status::Pending) continue;
    v.status = Status::Assigned;
    batch.groups[v.group].push_back(id);
  }
  pending_.clear();
  ++cycle_;
  return batch;
}

const DagVertex& DagPool::mark_status(VertexId id, Status next) {
  auto& v = vertices_.at(id);
  if (!transition_allowed(v.status, next)) {
    throw Error(Errc::IllegalTransition,
                std::string(status_name(v.status)) + " -> " + std::string(status_name(next)));
  }
  v.status = next;
  switch (next) {
    case Status::Validated:
      was_validated_[id] = true;
      for (auto p : v.parents) tips_.erase(p);
      views_.parsing_index[v.cycle].emplace_back(id, Status::Validated);
      break;
    case Status::Finalized:
      views_.parsing_index[v.cycle].emplace_back(id, Status::Finalized);
      record_state(id);
      break;
    case Status::Rejected: {
      tips_.erase(id);
      const auto& tx = txs_[id];
      auto& nn = next_nonce_[tx.sender];
      nn = std::min(nn, tx.nonce);
      break;
    }
    default:
      break;
  }
  // Keep index entries canonical: ordered by (vertex, status).
  if (next == Status::Validated || next == Status::Finalized) {
    auto& entries = views_.parsing_index[v.cycle];
    std::sort(entries.begin(), entries.end());
  }
  return v;
}

void DagPool::record_state(VertexId id) {
  const auto& tx = txs_[id];
  for (const auto& acct : {tx.sender, tx.to}) {
    auto [it, inserted] = latest_final_.emplace(acct, id);
    if (!inserted && it->second < id) it->second = id;
    views_.global_state_view[acct] = vertices_[it->second].tx_hash;
  }
}

std::vector<VertexId> DagPool::frontier(std::size_t k) const {
  std::vector<VertexId> out;
  for (auto it = tips_.begin(); it != tips_.end() && out.size() < k; ++it) out.push_back(*it);
  return out;
}

DagViews DagPool::rebuild_views() const {
  DagViews v;
  std::map<AccountId, VertexId> latest;
  for (const auto& vx : vertices_) {
    v.tx_view.emplace(vx.tx_hash, vx.id);
    v.storage_view[shard_of(ranges_, vx.tx_hash)].insert(vx.tx_hash);
    if (was_validated_[vx.id]) v.parsing_index[vx.cycle].emplace_back(vx.id, Status::Validated);
    if (vx.status == Status::Finalized) {
      v.parsing_index[vx.cycle].emplace_back(vx.id, Status::Finalized);
      const auto& tx = txs_[vx.id];
      latest[tx.sender] = vx.id;
      latest[tx.to] = vx.id;
    }
  }
  for (auto& [c, entries] : v.parsing_index) std::sort(entries.begin(), entries.end());
  for (const auto& [acct, id] : latest) v.global_state_view[acct] = vertices_[id].tx_hash;
  return v;
}

std::string DagPool::dump() const {
  std::ostringstream out;
  for (const auto& v : vertices_) {
    out << v.id << ' ';
    if (v.parents.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < v.parents.size(); ++i) out << (i ? "," : "") << v.parents[i];
    }
    out << ' ' << v.cycle << ' ' << group_name(v.group) << ' ' << status_name(v.status) << ' '
        << v.tx_hash.hex() << '\n';
  }
  return out.str();
}

}  // namespace parax::dag
