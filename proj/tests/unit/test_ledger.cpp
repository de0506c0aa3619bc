#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "parax/ledger/certificate.hpp"
#include "parax/ledger/error.hpp"
#include "parax/ledger/keys.hpp"
#include "parax/ledger/transaction.hpp"

using namespace parax;

TEST_SUITE("ledger") {

TEST_CASE("sha256 matches the FIPS 180-2 vectors") {
  CHECK(digest(std::string_view("abc")).hex() ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(digest(std::string_view("")).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(digest(std::string_view("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")).hex() ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  const std::string million(1'000'000, 'a');
  CHECK(digest(std::string_view(million)).hex() == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("sha256 agrees with OpenSSL on random inputs, one-shot and incremental") {
  std::mt19937_64 rng(42);
  for (int n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> data(rng() % 700);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const auto want = oracle::sha256(data);
    CHECK(digest(ByteView(data)) == want);

    Hasher h;
    std::size_t pos = 0;
    while (pos < data.size()) {
      const auto step = std::min<std::size_t>(1 + rng() % 97, data.size() - pos);
      h.update(ByteView(data.data() + pos, step));
      pos += step;
    }
    CHECK(h.finish() == want);
  }
}

TEST_CASE("update_u64 is big-endian") {
  std::vector<std::uint8_t> bytes;
  oracle::append_be64(bytes, 0x0102030405060708ull);
  CHECK(Hasher().update_u64(0x0102030405060708ull).finish() == oracle::sha256(bytes));
}

TEST_CASE("ed25519 keypair and signature match RFC 8032 test 1") {
  const auto seed = Digest::from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
  const auto kp = KeyPair::from_seed(seed);
  CHECK(to_hex(kp.public_key()) == "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const auto sig = kp.sign(ByteView{});
  CHECK(to_hex(sig) ==
        "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  CHECK(kp.account().key == oracle::sha256(std::vector<std::uint8_t>(kp.public_key().begin(), kp.public_key().end())));
}

TEST_CASE("libsodium signatures verify under OpenSSL and tampering is caught") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto kp = KeyPair::derive(99, "k" + std::to_string(i));
    std::vector<std::uint8_t> msg(rng() % 300);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
    auto sig = kp.sign(msg);
    CHECK(oracle::ed25519_verify(kp.public_key(), msg, sig));
    CHECK(verify_detached(msg, sig, kp.public_key()));
    sig[rng() % 64] ^= 0x10;
    CHECK_FALSE(oracle::ed25519_verify(kp.public_key(), msg, sig));
    CHECK_FALSE(verify_detached(msg, sig, kp.public_key()));
  }
}

TEST_CASE("derived keys are deterministic and label-separated") {
  CHECK(KeyPair::derive(1, "a").public_key() == KeyPair::derive(1, "a").public_key());
  CHECK(KeyPair::derive(1, "a").public_key() != KeyPair::derive(2, "a").public_key());
  CHECK(KeyPair::derive(1, "a").public_key() != KeyPair::derive(1, "b").public_key());
}

TEST_CASE("transaction wire layout, round trip and signature") {
  const auto alice = KeyPair::derive(1, "alice");
  const auto bob = KeyPair::derive(1, "bob");
  TxDraft d;
  d.to = bob.account();
  d.value = 12345;
  d.nonce = 3;
  d.payload = {0x02, 0xaa, 0xbb};
  const auto in = create_transaction(alice, d, NodeId{4}, 9);
  const auto& tx = in.tx;

  // sender hint to value cert_id hash_data nonce (len payload) (len sig)
  CHECK(canonical_encode(tx).size() == 32 + 1 + 32 + 8 + 32 + 32 + 8 + 4 + 3 + 4 + 96);
  CHECK(tx.hash_data == oracle::sha256(std::vector<std::uint8_t>{0x02, 0xaa, 0xbb}));
  CHECK(tx.cert_id == in.initiator.cert_hash);
  CHECK(in.initiator.subject == pre_hash(tx));
  CHECK(verify_signature(tx));

  const auto bytes = canonical_encode(tx);
  CHECK(decode_transaction(bytes) == tx);
  CHECK(hash_transaction(tx) == oracle::sha256(bytes));

  auto forged = tx;
  forged.value += 1;
  CHECK_FALSE(verify_signature(forged));
  auto truncated = tx;
  truncated.signature.resize(10);
  CHECK_FALSE(verify_signature(truncated));
  CHECK_THROWS_AS(sign_transaction(tx, bob), Error);
}

TEST_CASE("resource units grow by one per 256 payload bytes") {
  SignedTransaction tx;
  for (auto [len, units] : std::vector<std::pair<std::size_t, std::uint64_t>>{{0, 1}, {255, 1}, {256, 2}, {511, 2}, {512, 3}}) {
    tx.payload.assign(len, 1);
    CHECK(resource_units(tx) == units);
  }
}

TEST_CASE("certificates: hash binding, quorum and stamps") {
  const auto subject = digest(std::string_view("s"));
  auto c = issue_certificate(Stage::Validator, subject, {NodeId{3}, NodeId{1}, NodeId{3}, NodeId{2}}, 5, subject, 3);
  CHECK(c.signers == std::vector<NodeId>{NodeId{1}, NodeId{2}, NodeId{3}});
  CHECK(certificate_intact(c));
  auto bad = c;
  bad.cycle = 6;
  CHECK_FALSE(certificate_intact(bad));
  CHECK_THROWS_AS(issue_certificate(Stage::Initiator, subject, {}, 0, subject), Error);
  try {
    issue_certificate(Stage::Validator, subject, {NodeId{1}, NodeId{2}}, 0, subject, 3);
    FAIL("expected QuorumUnderflow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::QuorumUnderflow);
  }
  const auto stamped = issue_certificate(Stage::Initiator, subject, {NodeId{1}}, 0, subject, 1, 8);
  CHECK(leading_zero_bits(stamped.cert_hash) >= 8);
  CHECK(certificate_intact(stamped));
}

TEST_CASE("quorum is ceil(2n/3)") {
  for (std::size_t n = 1; n <= 64; ++n) {
    std::size_t q = 0;
    while (3 * q < 2 * n) ++q;
    CHECK(quorum_for(n) == q);
  }
}

}
