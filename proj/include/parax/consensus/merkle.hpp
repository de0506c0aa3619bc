#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "parax/ledger/certificate.hpp"
#include "parax/ledger/hash.hpp"

namespace parax::consensus {

/// 4-ary Merkle tree.
///   empty tree        -> digest("")                (the sentinel)
///   leaf L            -> digest(0x00 || L)
///   internal node     -> digest(0x01 || c0 || c1 || c2 || c3)
/// Levels are chunked by four; missing children are the sentinel. A
/// single leaf's root is its leaf hash.
inline constexpr std::size_t kArity = 4;

Digest merkle_sentinel();
Digest merkle_leaf_hash(const Digest& leaf);
Digest merkle_node_hash(std::span<const Digest, kArity> children);

Digest merkle_root(std::span<const Digest> leaves);

struct ProofStep {
  std::uint8_t position = 0;  // slot of the running hash among the four children
  std::array<Digest, kArity - 1> siblings{};

  bool operator==(const ProofStep&) const = default;
};

struct MerkleProof {
  std::vector<ProofStep> steps;  // bottom-up

  bool operator==(const MerkleProof&) const = default;
};

/// Throws IndexOutOfRange when index >= leaves.size().
MerkleProof merkle_prove(std::span<const Digest> leaves, std::size_t index);
bool merkle_verify(const Digest& root, const Digest& leaf, const MerkleProof& proof);

/// Certificate commitment keyed by (group, certificate hash). Leaves are
/// stage-tagged and kept in key order, so the root depends only on the set
/// of certificates, not on insertion order.
class TrieCommitment {
 public:
  void insert(Group group, Stage stage, const Digest& cert_hash);
  Digest root() const;
  /// Proof for a certificate previously inserted; nullopt otherwise.
  std::optional<MerkleProof> prove(Group group, Stage stage, const Digest& cert_hash) const;
  std::size_t size() const { return leaves_.size(); }

  static Digest leaf_value(Group group, Stage stage, const Digest& cert_hash);

 private:
  std::vector<Digest> ordered_leaves() const;

  struct Key {
    Group group;
    Digest cert_hash;
    Stage stage;
    auto operator<=>(const Key&) const = default;
  };
  std::vector<Key> leaves_;
};

}  // namespace parax::consensus
