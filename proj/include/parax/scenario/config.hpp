#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parax/net/simulator.hpp"
#include "parax/tokenomics/tokenomics.hpp"

namespace parax::scenario {

struct NodeSpec {
  std::uint32_t count = 1;
  net::NodeClass cls = net::NodeClass::Server;
  std::uint32_t capacity = 64;
  std::optional<double> availability;  // class default when absent
  net::FaultClass fault = net::FaultClass::Honest;
};

/// A fault window on a node id (ids count from 1 across all chains in
/// declaration order).
struct FaultSpec {
  std::uint32_t node = 0;
  net::FaultClass fault = net::FaultClass::Crash;
  std::uint64_t from_cycle = 0;
  std::uint64_t to_cycle = 0;
};

/// Poisson client load. Amounts are base units.
struct WorkloadSpec {
  double rate = 0.0;  // arrivals per cycle at f_initial
  std::uint32_t accounts = 16;
  Amount initial_balance = 1'000 * kBaseUnitsPerCoin;
  Amount value_min = 1;
  Amount value_max = 1'000;
  std::uint32_t contracts = 1;
  double contract_fraction = 0.0;
  double receipt_fraction = 0.0;
  double data_fraction = 0.0;
  double invalid_fraction = 0.0;
  std::uint32_t payload_bytes = 64;
  double elasticity = 0.0;       // demand scales by (f_initial / F)^elasticity
  std::uint64_t quiet_tail = 4;  // final cycles without new arrivals
};

struct ChainSpec {
  std::string label;
  std::vector<NodeSpec> nodes;
  WorkloadSpec workload;
};

struct PartySpec {
  std::string label;
  std::string chain;
  Amount balance = 0;
};

struct SwapSpec {
  std::string party;
  std::vector<std::string> acceptors;
  Amount amount = 0;
  Amount want = 0;
  std::uint64_t timeout_cycles = 8;
  std::uint32_t fee_bps = 150;
  std::uint64_t at_cycle = 0;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::uint64_t cycles = 100;
  std::uint32_t replicas = 1;
  net::NetConfig net;

  std::size_t group_size = 4;
  std::uint64_t redraw_every = 1;
  std::uint32_t shard_count = 1;
  std::size_t replication = 2;
  std::uint64_t rebalance_every = 16;
  std::uint64_t relay_bound = 1;
  unsigned stamp_difficulty = 0;

  tokenomics::FrictionState friction;
  std::size_t velocity_window = 32;
  std::uint32_t mint_rate_bps = 0;
  std::uint64_t mint_every = 0;

  std::vector<ChainSpec> chains;
  std::vector<FaultSpec> faults;
  std::vector<PartySpec> parties;
  std::vector<SwapSpec> swaps;
  std::vector<std::uint32_t> sweep;

  std::size_t node_count() const;
};

/// Parses a config document. Every violation is collected; an empty
/// `errors` means the result is usable.
ScenarioConfig parse_config(const nlohmann::json& doc, std::vector<std::string>& errors);

/// Reads and parses `path`. Throws FileNotFound, or SchemaViolation with
/// one line per problem.
ScenarioConfig validate_config(const std::filesystem::path& path);

/// Canonical JSON form of a parsed config (all defaults filled in).
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Sweep point: node counts, shard count, workload rate and accounts all
/// multiplied by `factor`.
ScenarioConfig scaled(const ScenarioConfig& cfg, std::uint32_t factor);

}  // namespace parax::scenario
