#include "parax/ledger/hash.hpp"

#include <sodium.h>

#include <bit>
#include <cstring>

#include "parax/ledger/error.hpp"

namespace parax {

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  }
};

void ensure_sodium() { static SodiumInit once; }

}  // namespace

bool Digest::is_zero() const {
  for (auto b : bytes)
    if (b != 0) return false;
  return true;
}

std::uint64_t Digest::prefix64() const {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
  return v;
}

Digest Digest::from_hex(std::string_view hex) {
  auto raw = parax::from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::Decode, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

Digest digest(ByteView data) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

Digest digest(std::string_view text) {
  return digest(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Hasher::Hasher() {
  ensure_sodium();
  crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

Hasher& Hasher::update(ByteView data) {
  crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()), data.data(),
                            data.size());
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 7; i >= 0; --i, v >>= 8) be[i] = static_cast<std::uint8_t>(v);
  return update(ByteView(be));
}

Digest Hasher::finish() {
  Digest d;
  crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()), d.bytes.data());
  return d;
}

unsigned leading_zero_bits(const Digest& d) {
  unsigned n = 0;
  for (auto b : d.bytes) {
    if (b == 0) {
      n += 8;
      continue;
    }
    n += static_cast<unsigned>(std::countl_zero(b));
    break;
  }
  return n;
}

}  // namespace parax
