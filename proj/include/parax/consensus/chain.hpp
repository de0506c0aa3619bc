#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "parax/consensus/block.hpp"
#include "parax/consensus/validation.hpp"
#include "parax/dag/dag_pool.hpp"
#include "parax/net/simulator.hpp"
#include "parax/shard/shard.hpp"
#include "parax/tokenomics/tokenomics.hpp"

namespace parax::consensus {

struct ChainConfig {
  std::string label = "A";
  std::uint64_t seed = 1;
  NodeId relay = kRelay;  // external vote collector
  std::size_t group_size = 4;
  std::uint64_t redraw_every = 1;
  std::uint32_t shard_count = 1;
  std::size_t replication = 2;
  std::uint64_t rebalance_every = 16;
  std::uint64_t relay_bound = 1;
  unsigned stamp_difficulty = 0;
  tokenomics::FrictionState friction{};
  std::size_t velocity_window = 32;
  std::uint32_t mint_rate_bps = 0;
  std::uint64_t mint_every = 0;  // cycles between mint boundaries, 0 = never
};

struct TxOutcome {
  dag::Status status = dag::Status::Pending;
  std::uint64_t admitted = 0;  // chain cycle
  std::uint64_t decided = 0;
  std::optional<std::uint64_t> height;
  RejectReason reason = RejectReason::None;
};

struct TraceLine {
  std::uint64_t cycle = 0;
  std::optional<std::uint64_t> height;
  Digest tx_hash;
  Group group = Group::Transfer;
  std::string verdict;
};

struct EconomicsRow {
  std::uint64_t cycle = 0;
  double supply = 0.0;
  double demand = 0.0;
  double friction = 0.0;
  double velocity = 0.0;
  Amount pool = 0;
  Amount minted = 0;
  Amount distributed = 0;
};

struct CycleReport {
  std::uint64_t cycle = 0;
  std::size_t admitted = 0;
  std::size_t finalized = 0;
  std::size_t rejected = 0;
  std::size_t deferred = 0;
  std::size_t held = 0;
  std::optional<std::uint64_t> height;
  std::vector<std::string> errors;
};

struct PreparedCycle {
  std::uint64_t cycle = 0;
  std::vector<NodeId> active;
  std::vector<ValidatedTx> ready;
  std::map<NodeId, std::uint64_t> participation;
  std::array<std::uint32_t, 4> n_g{};
  std::uint64_t demand_units = 0;
  CycleReport report;

  bool validated(const Digest& tx_hash) const;
};

/// Settlement coupling: `hold` keeps validated transactions out of this
/// cycle's block (with later transactions of the same sender), `veto`
/// rejects them.
struct CommitControls {
  std::set<Digest> hold;
  std::set<Digest> veto;
};

/// One simulated ledger: creator queue, DAG, committees, constructor phase,
/// and the tokenomics loop. Driven once per CycleTick.
class Chain {
 public:
  Chain(ChainConfig cfg, std::vector<NodeId> roster, LedgerState genesis, const net::Simulator& sim);

  /// Creator queue. Throws BadSignature (transaction or initiator
  /// certificate) and DuplicateTransaction.
  Digest submit(const Initiated& in);
  std::uint64_t next_nonce(const AccountId& sender) const;
  /// The transaction is rejected by its committee when it is validated.
  void inject_rejection(const Digest& tx_hash) { injected_.insert(tx_hash); }

  PreparedCycle prepare_cycle(net::Simulator& sim);
  CycleReport commit_cycle(net::Simulator& sim, PreparedCycle&& prep, const CommitControls& controls = {});
  CycleReport run_cycle(net::Simulator& sim);

  std::optional<TxOutcome> outcome(const Digest& tx_hash) const;

  const ChainConfig& config() const { return cfg_; }
  const std::string& label() const { return cfg_.label; }
  const std::vector<NodeId>& roster() const { return roster_; }
  const LedgerState& state() const { return state_; }
  const LedgerState& genesis() const { return genesis_; }
  Digest genesis_hash() const;
  const std::vector<Block>& blocks() const { return blocks_; }
  const dag::DagPool& dag() const { return dag_; }
  const shard::ShardMap& shard_map() const { return shards_; }
  const std::vector<TraceLine>& trace() const { return trace_; }
  const std::vector<EconomicsRow>& economics() const { return economics_; }
  const std::vector<CycleReport>& reports() const { return reports_; }
  const std::vector<tokenomics::CycleLog>& logs() const { return logs_; }
  const tokenomics::FrictionState& friction() const { return friction_; }
  std::size_t constructor_quorum() const { return quorum_for(cfg_.group_size); }
  std::size_t backlog() const { return ingress_.size(); }
  std::uint64_t cycle() const { return dag_.cycle(); }

  const KeyPair& custody_key() const { return custody_; }
  AccountId custody() const { return custody_.account(); }

 private:
  struct Queued {
    SignedTransaction tx;
    Certificate initiator;
    Digest hash;
  };
  struct Bucket {
    std::vector<NodeId> members;
    std::uint64_t capacity = 0;
    std::uint64_t load = 0;
    std::vector<dag::VertexId> work;
  };
  using BucketKey = std::pair<Group, std::uint32_t>;

  void reject(dag::VertexId v, std::uint64_t cycle, RejectReason why, CycleReport& report);
  void forget_live(const SignedTransaction& tx, dag::VertexId v);
  void roll_back_nonce(const SignedTransaction& tx);
  std::uint64_t expected_nonce(const SignedTransaction& tx, dag::VertexId v) const;
  const KeyPair& node_key(NodeId n) const { return keys_.at(n); }

  ChainConfig cfg_;
  std::vector<NodeId> roster_;
  std::map<NodeId, KeyPair> keys_;
  KeyPair custody_;
  LedgerState genesis_;
  LedgerState state_;
  dag::DagPool dag_;
  shard::ShardMap shards_;
  tokenomics::FrictionState friction_;

  std::deque<Queued> ingress_;
  std::set<Digest> queued_;
  std::unordered_map<AccountId, std::uint64_t> next_nonce_;
  std::map<AccountId, std::set<dag::VertexId>> live_;
  std::map<dag::VertexId, Certificate> initiators_;
  std::vector<dag::VertexId> deferred_;
  std::vector<ValidatedTx> carried_;
  std::set<Digest> injected_;

  std::map<Digest, TxOutcome> outcomes_;
  std::vector<Block> blocks_;
  std::vector<TraceLine> trace_;
  std::vector<tokenomics::CycleLog> logs_;
  std::vector<EconomicsRow> economics_;
  std::vector<CycleReport> reports_;
};

/// Link target of block 0: H("parax-genesis" || label || genesis root).
Digest genesis_hash(std::string_view label, const LedgerState& genesis);

/// Constructor vote message: what a constructor signs for a block subject.
Bytes block_vote_bytes(const Digest& subject, NodeId voter);

}  // namespace parax::consensus
