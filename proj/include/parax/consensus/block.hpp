#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "parax/consensus/state.hpp"
#include "parax/dag/dag_pool.hpp"
#include "parax/ledger/certificate.hpp"
#include "parax/ledger/transaction.hpp"
#include "parax/tokenomics/tokenomics.hpp"

namespace parax::consensus {

struct BlockEntry {
  SignedTransaction tx;
  Group group = Group::Transfer;
  Amount fee = 0;
  Certificate initiator;
  Certificate validator;

  bool operator==(const BlockEntry&) const = default;
};

struct Block {
  std::uint64_t height = 0;
  Digest prev_hash;
  std::uint64_t cycle = 0;
  std::vector<Digest> tx_hashes;
  Digest state_root;
  Digest cert_root;  // commitment over initiator and validator certificates
  Certificate constructor_cert;

  double friction = 0.0;
  std::vector<BlockEntry> entries;
  std::vector<tokenomics::Payout> payouts;
  Amount minted = 0;

  Digest tx_root() const;
  bool operator==(const Block&) const = default;
};

/// What constructors sign: H(height || prev || cycle || tx_root || state_root || cert_root).
Digest block_subject(const Block& b);
/// Hash over the header and the constructor certificate.
Digest block_hash(const Block& b);
/// Root a faulty constructor signs in place of the honest one.
Digest tamper_root(const Digest& root);

Digest compute_cert_root(const std::vector<BlockEntry>& entries);

void encode_block(ByteWriter& w, const Block& b);
Block decode_block(ByteReader& r);

struct ValidatedTx {
  dag::VertexId vertex = 0;
  std::uint64_t cycle = 0;  // admission cycle
  SignedTransaction tx;
  Group group = Group::Transfer;
  Certificate initiator;
  std::optional<Certificate> validator;
};

struct BlockParams {
  std::uint64_t cycle = 0;
  double friction = 1.0;
  Amount mint = 0;
  std::map<AccountId, std::uint64_t> participation;
};

struct BlockDraft {
  Block block;  // constructor_cert not yet set
  LedgerState state;
  std::vector<dag::VertexId> included;
  std::vector<std::pair<dag::VertexId, RejectReason>> vetoed;
  tokenomics::Distribution distribution;
  Amount transferred = 0;
};

/// Applies validated transactions in (admission cycle, vertex) order on top
/// of `prior`. A transaction that no longer applies (balance, nonce) is
/// vetoed and skipped. Then mints into the pool and pays the pool out by
/// participation. Throws MissingValidatorCert for an entry without one.
BlockDraft construct_block(std::vector<ValidatedTx> validated, const LedgerState& prior,
                           std::uint64_t height, const Digest& prev_hash, const BlockParams& params);

/// Re-executes a block on `prior` and checks every commitment. Throws on the
/// first violation: BadSignature, MissingValidatorCert, InsufficientBalance,
/// NonceGap, StateRootMismatch, QuorumUnderflow, CorruptOutput.
LedgerState replay_block(const LedgerState& prior, const Block& b, std::size_t constructor_quorum);

}  // namespace parax::consensus
