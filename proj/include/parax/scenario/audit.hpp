#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parax/consensus/block.hpp"
#include "parax/consensus/state.hpp"

namespace parax::scenario {

inline constexpr char kBlocksMagic[8] = {'P', 'A', 'R', 'A', 'X', 'B', 'L', 'K'};
inline constexpr std::uint32_t kBlocksVersion = 1;

/// One chain's section of blocks.bin.
struct ChainRecord {
  std::string label;
  std::uint64_t constructor_quorum = 0;
  AccountId custody;
  consensus::LedgerState genesis;
  std::vector<consensus::Block> blocks;
};

/// Layout (integers big-endian):
///   "PARAXBLK" version:u32 config:(u32 len, json) chains:u32
///   per chain: label:str quorum:u64 custody[32] genesis:(u32 len, state)
///              count:u64 then per block (u32 len, block) block_hash[32]
///   trailer: sha256 of everything before it
Bytes encode_blocks_file(const std::string& config_json, const std::vector<ChainRecord>& chains);

struct Violation {
  std::string chain;
  std::optional<std::uint64_t> height;
  std::optional<std::uint64_t> cycle;
  std::string error;
};

struct ChainAudit {
  std::string label;
  std::uint64_t blocks = 0;
  Digest final_hash;
  Amount genesis_supply = 0;
  Amount minted = 0;
  Amount custody_balance = 0;
};

struct AuditResult {
  bool pass = true;
  std::optional<Violation> first;
  std::vector<ChainAudit> chains;
};

/// Full replay from genesis: linkage, stored hashes, certificates, state
/// roots, conservation (balances + pool == genesis supply + mints) and
/// custody (balance == locks - settlements) after every block. Stops at
/// the first violation.
AuditResult audit_blocks(ByteView file);
AuditResult audit_directory(const std::filesystem::path& dir);

nlohmann::json to_json(const AuditResult& a);

}  // namespace parax::scenario
