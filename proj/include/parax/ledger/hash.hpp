#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>

#include "parax/ledger/bytes.hpp"

namespace parax {

/// 256-bit SHA-256 digest.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  bool is_zero() const;
  std::string hex() const { return to_hex(bytes); }
  std::string short_hex() const { return hex().substr(0, 16); }
  /// First eight bytes, big-endian; used as the shard-range prefix.
  std::uint64_t prefix64() const;

  static Digest from_hex(std::string_view hex);
};

/// SHA-256 of a byte string.
Digest digest(ByteView data);
Digest digest(std::string_view text);

/// Incremental SHA-256 over several pieces.
class Hasher {
 public:
  Hasher();
  Hasher& update(ByteView data);
  Hasher& update(const Digest& d) { return update(ByteView(d.bytes)); }
  Hasher& update(std::string_view text) {
    return update(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  Hasher& update_u8(std::uint8_t v) { return update(ByteView(&v, 1)); }
  Hasher& update_u64(std::uint64_t v);
  Digest finish();

 private:
  alignas(16) std::array<std::uint8_t, 128> state_{};
};

unsigned leading_zero_bits(const Digest& d);

}  // namespace parax

template <>
struct std::hash<parax::Digest> {
  std::size_t operator()(const parax::Digest& d) const noexcept {
    return static_cast<std::size_t>(d.prefix64());
  }
};
