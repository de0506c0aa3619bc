#include "parax/consensus/merkle.hpp"

#include <algorithm>
#include <optional>

#include "parax/ledger/error.hpp"

namespace parax::consensus {

Digest merkle_sentinel() {
  static const Digest s = digest(ByteView{});
  return s;
}

Digest merkle_leaf_hash(const Digest& leaf) { return Hasher().update_u8(0x00).update(leaf).finish(); }

Digest merkle_node_hash(std::span<const Digest, kArity> children) {
  Hasher h;
  h.update_u8(0x01);
  for (const auto& c : children) h.update(c);
  return h.finish();
}

namespace {

std::vector<Digest> next_level(const std::vector<Digest>& level) {
  std::vector<Digest> up;
  up.reserve((level.size() + kArity - 1) / kArity);
  for (std::size_t i = 0; i < level.size(); i += kArity) {
    std::array<Digest, kArity> children;
    for (std::size_t j = 0; j < kArity; ++j) {
      children[j] = i + j < level.size() ? level[i + j] : merkle_sentinel();
    }
    up.push_back(merkle_node_hash(children));
  }
  return up;
}

}  // namespace

Digest merkle_root(std::span<const Digest> leaves) {
  if (leaves.empty()) return merkle_sentinel();
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const auto& l : leaves) level.push_back(merkle_leaf_hash(l));
  while (level.size() > 1) level = next_level(level);
  return level.front();
}

MerkleProof merkle_prove(std::span<const Digest> leaves, std::size_t index) {
  if (index >= leaves.size()) {
    throw Error(Errc::IndexOutOfRange,
                std::to_string(index) + " >= " + std::to_string(leaves.size()));
  }
  MerkleProof proof;
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const auto& l : leaves) level.push_back(merkle_leaf_hash(l));
  while (level.size() > 1) {
    const std::size_t base = index - index % kArity;
    ProofStep step;
    step.position = static_cast<std::uint8_t>(index % kArity);
    std::size_t s = 0;
    for (std::size_t j = 0; j < kArity; ++j) {
      if (j == step.position) continue;
      step.siblings[s++] = base + j < level.size() ? level[base + j] : merkle_sentinel();
    }
    proof.steps.push_back(step);
    level = next_level(level);
    index /= kArity;
  }
  return proof;
}

bool merkle_verify(const Digest& root, const Digest& leaf, const MerkleProof& proof) {
  Digest running = merkle_leaf_hash(leaf);
  for (const auto& step : proof.steps) {
    if (step.position >= kArity) return false;
    std::array<Digest, kArity> children;
    std::size_t s = 0;
    for (std::size_t j = 0; j < kArity; ++j) {
      children[j] = j == step.position ? running : step.siblings[s++];
    }
    running = merkle_node_hash(children);
  }
  return running == root;
}

Digest TrieCommitment::leaf_value(Group group, Stage stage, const Digest& cert_hash) {
  return Hasher()
      .update_u8(static_cast<std::uint8_t>(group))
      .update_u8(static_cast<std::uint8_t>(stage))
      .update(cert_hash)
      .finish();
}

void TrieCommitment::insert(Group group, Stage stage, const Digest& cert_hash) {
  Key k{group, cert_hash, stage};
  auto it = std::lower_bound(leaves_.begin(), leaves_.end(), k);
  if (it != leaves_.end() && *it == k) return;
  leaves_.insert(it, k);
}

std::vector<Digest> TrieCommitment::ordered_leaves() const {
  std::vector<Digest> out;
  out.reserve(leaves_.size());
  for (const auto& k : leaves_) out.push_back(leaf_value(k.group, k.stage, k.cert_hash));
  return out;
}

Digest TrieCommitment::root() const {
  auto leaves = ordered_leaves();
  return merkle_root(leaves);
}

std::optional<MerkleProof> TrieCommitment::prove(Group group, Stage stage,
                                                 const Digest& cert_hash) const {
  Key k{group, cert_hash, stage};
  auto it = std::lower_bound(leaves_.begin(), leaves_.end(), k);
  if (it == leaves_.end() || !(*it == k)) return std::nullopt;
  auto leaves = ordered_leaves();
  return merkle_prove(leaves, static_cast<std::size_t>(it - leaves_.begin()));
}

}  // namespace parax::consensus
