#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "parax/consensus/chain.hpp"
#include "parax/scenario/config.hpp"

namespace parax::scenario {

struct WorkloadStats {
  std::uint64_t generated = 0;
  std::uint64_t invalid = 0;      // generated to overdraw
  std::uint64_t lost = 0;         // client message dropped or gateway down
  std::uint64_t refused = 0;      // submit threw
  std::uint64_t suppressed = 0;   // arrival found no idle or solvent sender
  std::uint64_t submitted = 0;
};

/// Client population of one chain. Each account keeps at most one
/// transaction in flight; arrivals are Poisson with a rate that falls as
/// friction rises when elasticity is non-zero.
class Workload {
 public:
  Workload(const WorkloadSpec& spec, const std::string& label, std::uint64_t seed, NodeId client_endpoint);

  /// Genesis entries for the client and contract accounts.
  void seed_genesis(consensus::LedgerState& genesis) const;

  /// Schedules the arrivals of `cycle` through the network.
  void generate(net::Simulator& sim, consensus::Chain& chain, std::uint64_t cycle, double f_initial);
  bool handles(const net::Message& m) const { return m.from == endpoint_ && m.kind == "tx"; }
  void on_deliver(const net::Message& m, consensus::Chain& chain);
  /// Frees senders whose transaction reached a final status.
  void poll(const consensus::Chain& chain);

  const WorkloadStats& stats() const { return stats_; }
  /// Hashes of transactions generated to be invalid.
  const std::set<Digest>& invalid_hashes() const { return invalid_hashes_; }
  /// Hashes accepted by the chain's creator queue.
  const std::vector<Digest>& submitted() const { return submitted_; }

 private:
  Initiated make_tx(const consensus::Chain& chain, std::size_t sender, std::uint64_t cycle);

  WorkloadSpec spec_;
  NodeId endpoint_;
  std::mt19937_64 rng_;
  std::vector<KeyPair> accounts_;
  std::vector<AccountId> contracts_;
  std::vector<bool> busy_;
  std::map<std::uint64_t, std::pair<std::size_t, Initiated>> sent_;  // tag -> (sender, tx)
  std::map<Digest, std::size_t> inflight_;
  std::uint64_t next_tag_ = 0;
  std::set<Digest> invalid_hashes_;
  std::vector<Digest> submitted_;
  WorkloadStats stats_;
};

}  // namespace parax::scenario
