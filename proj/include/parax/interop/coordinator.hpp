#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parax/consensus/chain.hpp"
#include "parax/interop/swap.hpp"
#include "parax/net/simulator.hpp"

namespace parax::interop {

/// The twelve protocol messages of one swap, in nominal send order.
enum class Slot : std::uint8_t {
  OfferA = 0,    // party A -> chain A
  OfferB,        // party A -> chain B
  LockSubmitA,   // party A -> chain A, lock transaction
  LockNoticeA,   // chain A -> chain B, lock receipt A
  MatchNotice,   // chain B -> party B
  LockSubmitB,   // party B -> chain B, lock transaction
  LockNoticeB,   // chain B -> chain A, lock receipt B
  ChecksumAB,    // chain A -> chain B
  ChecksumBA,    // chain B -> chain A
  ReleaseA,      // chain A -> party B, release notice
  ReleaseB,      // chain B -> party A, release notice
  PublishNotice, // chain A -> chain B
};

inline constexpr std::size_t kSlots = 12;
std::string_view slot_name(Slot s);

/// Per-slot override of the network's loss model: true drops, false delivers.
struct DropPlan {
  std::array<std::optional<bool>, kSlots> drop{};

  static DropPlan from_mask(std::uint16_t mask);
};

struct SwapTraceLine {
  Digest swap_id;
  Phase phase = Phase::Initiated;
  net::SimTime at = 0;
  std::string chain;
  std::string detail;
};

/// Runs the flash-contract protocol for any number of swaps between two
/// chains. Messages travel through the simulator; settlement legs are
/// ordinary transactions on each chain.
class SwapCoordinator {
 public:
  SwapCoordinator(consensus::Chain& a, consensus::Chain& b, NodeId endpoint_a, NodeId endpoint_b,
                  NodeId first_party_endpoint);

  /// Makes an account usable as offerer or acceptor on both chains.
  void register_party(const KeyPair& key);
  /// Adds an acceptor the flash phase may bind.
  void register_acceptor(const AccountId& account);

  /// initiate_swap plus the first three sends. Throws DuplicateSwap,
  /// BadSignature, InsufficientBalance.
  Digest open(net::Simulator& sim, const SignedOffer& offer, DropPlan plan = {});

  bool handles(const net::Message& m) const;
  void on_deliver(net::Simulator& sim, const net::Message& m);

  /// Pairs validated releases across the two chains. Null means the chain
  /// did not run this tick.
  std::array<consensus::CommitControls, 2> reconcile(const consensus::PreparedCycle* a,
                                                     const consensus::PreparedCycle* b) const;
  /// Polls settlement outcomes, advances phases, expires swaps.
  void after_commit(net::Simulator& sim);

  /// Every swap terminal and no settlement transaction outstanding.
  bool quiescent() const;

  std::vector<Digest> swap_ids() const;
  const SwapContract& contract(const Digest& swap_id) const;
  const std::vector<SwapTraceLine>& trace() const { return trace_; }
  const CustodyAccount& custody(Side s) const { return custody_[static_cast<std::size_t>(s)]; }
  std::uint16_t sent_mask(const Digest& swap_id) const;
  std::vector<Slot> sent_order(const Digest& swap_id) const;

  /// Corrupts the copy of the peer's lock receipt held at `at`.
  void tamper_receipt(const Digest& swap_id, Side at);
  /// The release leg on `side` is rejected by its committee.
  void reject_release(const Digest& swap_id, Side side);

 private:
  enum class Role : std::uint8_t { Lock, Release, Refund };
  struct InFlight {
    std::size_t session = 0;
    Side side = Side::A;
    Role role = Role::Lock;
    Digest tx_hash;
    SettlementOrder order;
    bool dead = false;  // rejected; kept until the pair resolves
  };
  struct Session {
    SwapContract contract;
    DropPlan plan;
    std::array<bool, 2> knows_offer{};
    std::array<std::array<std::optional<LockReceipt>, 2>, 2> receipts{};  // [holder][lock side]
    std::array<std::optional<Digest>, 2> own_checksum;
    std::array<std::optional<Digest>, 2> peer_checksum;
    std::array<bool, 2> verified{};
    std::array<bool, 2> released{};
    std::array<bool, 2> tamper{};
    std::array<bool, 2> reject_release{};
    bool releasing = false;
    std::uint16_t sent_mask = 0;
    std::vector<Slot> order;
    std::map<Slot, LockReceipt> carried_receipt;
    std::map<Slot, Digest> carried_checksum;
  };

  consensus::Chain& chain(Side s) { return s == Side::A ? a_ : b_; }
  const consensus::Chain& chain(Side s) const { return s == Side::A ? a_ : b_; }
  NodeId endpoint(Side s) const { return s == Side::A ? endpoint_a_ : endpoint_b_; }
  NodeId party_endpoint(const AccountId& a) const;

  void send(net::Simulator& sim, std::size_t idx, Slot slot, NodeId from, NodeId to);
  void record(const Session& s, net::Simulator& sim, Side side, std::string detail);
  void submit_order(net::Simulator& sim, std::size_t idx, const SettlementOrder& order, Role role);
  void submit_lock(net::Simulator& sim, std::size_t idx, Side side, const AccountId& party, Amount amount);
  void try_match(net::Simulator& sim, std::size_t idx);
  void try_verify(net::Simulator& sim, std::size_t idx, Side side);
  void start_release(net::Simulator& sim, std::size_t idx);
  void refund_all(net::Simulator& sim, std::size_t idx, std::vector<SettlementOrder> orders);
  void on_lock_final(net::Simulator& sim, const InFlight& f, const consensus::TxOutcome& out);
  const InFlight* release_leg(std::size_t idx, Side side) const;

  consensus::Chain& a_;
  consensus::Chain& b_;
  NodeId endpoint_a_;
  NodeId endpoint_b_;
  std::uint32_t next_party_endpoint_;
  std::map<AccountId, KeyPair> keys_;
  std::map<AccountId, NodeId> endpoints_;
  std::vector<AccountId> acceptors_;
  std::vector<Session> sessions_;
  std::map<Digest, std::size_t> by_id_;
  std::vector<InFlight> inflight_;
  std::array<CustodyAccount, 2> custody_;
  std::vector<SwapTraceLine> trace_;
};

/// One CycleTick for a pair of chains: prepare both, reconcile paired
/// releases, commit both, let the coordinator react. A stalled chain skips
/// the tick entirely.
void run_pair_tick(net::Simulator& sim, consensus::Chain& a, consensus::Chain& b, SwapCoordinator* coord,
                   std::array<bool, 2> stalled = {});

}  // namespace parax::interop
