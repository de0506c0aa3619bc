#include "parax/ledger/keys.hpp"

#include <sodium.h>

namespace parax {

KeyPair KeyPair::from_seed(const Digest& seed) {
  digest(ByteView{});  // initializes libsodium
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_.data(), kp.secret_.data(), seed.bytes.data());
  return kp;
}

KeyPair KeyPair::derive(std::uint64_t scenario_seed, std::string_view label) {
  Hasher h;
  h.update(std::string_view("parax-key/"));
  h.update_u64(scenario_seed);
  h.update(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
  return from_seed(h.finish());
}

AccountId KeyPair::account() const { return account_of(public_); }

Signature KeyPair::sign(ByteView message) const {
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

AccountId account_of(const PublicKey& pk) { return AccountId{digest(ByteView(pk))}; }

bool verify_detached(ByteView message, const Signature& sig, const PublicKey& pk) {
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), pk.data()) == 0;
}

}  // namespace parax
