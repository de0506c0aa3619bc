#pragma once

// Reference implementations the tests compare against. Hashing and
// signature checks go through OpenSSL, which shares no code with the
// libsodium backend under test.

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "parax/ledger/hash.hpp"

namespace oracle {

inline parax::Digest sha256(const std::vector<std::uint8_t>& data) {
  parax::Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

inline parax::Digest sha256(const std::string& s) { return sha256(std::vector<std::uint8_t>(s.begin(), s.end())); }

inline void append(std::vector<std::uint8_t>& out, const parax::Digest& d) {
  out.insert(out.end(), d.bytes.begin(), d.bytes.end());
}

inline void append_be64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline bool ed25519_verify(const std::array<std::uint8_t, 32>& pk, const std::vector<std::uint8_t>& msg,
                           const std::array<std::uint8_t, 64>& sig) {
  EVP_PKEY* key = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.data(), pk.size());
  if (!key) return false;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  bool ok = EVP_DigestVerifyInit(ctx, nullptr, nullptr, nullptr, key) == 1 &&
            EVP_DigestVerify(ctx, sig.data(), sig.size(), msg.data(), msg.size()) == 1;
  EVP_MD_CTX_free(ctx);
  EVP_PKEY_free(key);
  return ok;
}

}  // namespace oracle
