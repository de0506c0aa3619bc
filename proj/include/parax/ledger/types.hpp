#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "parax/ledger/hash.hpp"

namespace parax {

/// HeartBit amounts in base units; 1 HeartBit = 10^6 base units.
using Amount = std::uint64_t;
inline constexpr Amount kBaseUnitsPerCoin = 1'000'000;

/// Simulated participant id. Zero is reserved for the per-chain relay.
enum class NodeId : std::uint32_t {};
inline constexpr NodeId kRelay{0};

constexpr std::uint32_t raw(NodeId id) { return static_cast<std::uint32_t>(id); }

/// Account ids are the digest of the owner's public key.
struct AccountId {
  Digest key;

  auto operator<=>(const AccountId&) const = default;
  std::string hex() const { return key.hex(); }
  std::string short_hex() const { return key.short_hex(); }
};

/// Transaction groups G1..G4.
enum class Group : std::uint8_t {
  Contract = 1,  // G1: smart-contract accounts
  Transfer = 2,  // G2: plain value transfers
  Receipt = 3,   // G3: receipt records
  Other = 4,     // G4: everything else
};

inline constexpr Group kAllGroups[] = {Group::Contract, Group::Transfer, Group::Receipt, Group::Other};

std::string_view group_name(Group g);  // "G1".."G4"
std::optional<Group> group_from_u8(std::uint8_t v);

/// Ceil(2n/3), the committee quorum.
constexpr std::size_t quorum_for(std::size_t members) { return (2 * members + 2) / 3; }

}  // namespace parax

template <>
struct std::hash<parax::AccountId> {
  std::size_t operator()(const parax::AccountId& a) const noexcept {
    return std::hash<parax::Digest>{}(a.key);
  }
};
