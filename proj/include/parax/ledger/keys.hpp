#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "parax/ledger/bytes.hpp"
#include "parax/ledger/types.hpp"

namespace parax {

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

/// Ed25519 keypair. Generation is deterministic from a 32-byte seed; the
/// simulator derives every key from the scenario seed and a label.
class KeyPair {
 public:
  static KeyPair from_seed(const Digest& seed);
  static KeyPair derive(std::uint64_t scenario_seed, std::string_view label);

  const PublicKey& public_key() const { return public_; }
  AccountId account() const;

  Signature sign(ByteView message) const;

 private:
  PublicKey public_{};
  std::array<std::uint8_t, 64> secret_{};
};

AccountId account_of(const PublicKey& pk);
bool verify_detached(ByteView message, const Signature& sig, const PublicKey& pk);

}  // namespace parax
