#include "parax/consensus/chain.hpp"

#include <algorithm>

#include "parax/consensus/merkle.hpp"
#include "parax/ledger/error.hpp"

namespace parax::consensus {

namespace {

constexpr std::size_t kVoteWireSize = 4 + 32 + 4 + 1 + 1 + 32 + 64;

std::string verdict_text(RejectReason r) { return "rejected:" + std::string(reason_name(r)); }

}  // namespace

bool PreparedCycle::validated(const Digest& tx_hash) const {
  return std::any_of(ready.begin(), ready.end(),
                     [&](const ValidatedTx& v) { return hash_transaction(v.tx) == tx_hash; });
}

Bytes block_vote_bytes(const Digest& subject, NodeId voter) {
  ByteWriter w;
  w.str("parax-block-vote").raw(subject.bytes).u32(raw(voter));
  return std::move(w).take();
}

Chain::Chain(ChainConfig cfg, std::vector<NodeId> roster, LedgerState genesis, const net::Simulator& sim)
    : cfg_(std::move(cfg)),
      roster_(std::move(roster)),
      custody_(KeyPair::derive(cfg_.seed, "custody/" + cfg_.label)),
      friction_(cfg_.friction) {
  std::sort(roster_.begin(), roster_.end());
  roster_.erase(std::unique(roster_.begin(), roster_.end()), roster_.end());
  for (NodeId n : roster_) keys_.emplace(n, sim.profile(n).keys);
  genesis.touch(custody_.account()).is_contract = true;
  genesis_ = genesis;
  state_ = std::move(genesis);
  shards_ = shard::make_shard_map(std::max<std::uint32_t>(cfg_.shard_count, 1),
                                  std::min(cfg_.replication, roster_.size()), cfg_.seed, roster_);
  dag_ = dag::DagPool(shards_.ranges);
  friction_.pool = state_.pool;
}

Digest genesis_hash(std::string_view label, const LedgerState& genesis) {
  return Hasher().update(std::string_view("parax-genesis")).update(label).update(genesis.root()).finish();
}

Digest Chain::genesis_hash() const { return consensus::genesis_hash(cfg_.label, genesis_); }

Digest Chain::submit(const Initiated& in) {
  const auto& tx = in.tx;
  if (!verify_signature(tx)) throw Error(Errc::BadSignature, "transaction signature");
  if (in.initiator.stage != Stage::Initiator || !certificate_intact(in.initiator) ||
      in.initiator.subject != pre_hash(tx) || tx.cert_id != in.initiator.cert_hash) {
    throw Error(Errc::BadSignature, "initiator certificate");
  }
  const auto h = hash_transaction(tx);
  if (queued_.count(h) || dag_.contains(h) || outcomes_.count(h)) {
    throw Error(Errc::DuplicateTransaction, h.short_hex());
  }
  queued_.insert(h);
  ingress_.push_back({tx, in.initiator, h});
  auto& next = next_nonce_[tx.sender];
  next = std::max({next, state_.nonce(tx.sender), tx.nonce + 1});
  return h;
}

std::uint64_t Chain::next_nonce(const AccountId& sender) const {
  auto it = next_nonce_.find(sender);
  const auto committed = state_.nonce(sender);
  return it == next_nonce_.end() ? committed : std::max(it->second, committed);
}

std::optional<TxOutcome> Chain::outcome(const Digest& tx_hash) const {
  auto it = outcomes_.find(tx_hash);
  if (it == outcomes_.end()) return std::nullopt;
  return it->second;
}

void Chain::roll_back_nonce(const SignedTransaction& tx) {
  auto& next = next_nonce_[tx.sender];
  next = std::min(next, tx.nonce);
}

void Chain::forget_live(const SignedTransaction& tx, dag::VertexId v) {
  auto it = live_.find(tx.sender);
  if (it == live_.end()) return;
  it->second.erase(v);
  if (it->second.empty()) live_.erase(it);
}

std::uint64_t Chain::expected_nonce(const SignedTransaction& tx, dag::VertexId v) const {
  std::uint64_t earlier = 0;
  if (auto it = live_.find(tx.sender); it != live_.end()) {
    earlier = static_cast<std::uint64_t>(std::distance(it->second.begin(), it->second.lower_bound(v)));
  }
  return state_.nonce(tx.sender) + earlier;
}

void Chain::reject(dag::VertexId v, std::uint64_t cycle, RejectReason why, CycleReport& report) {
  dag_.mark_status(v, dag::Status::Rejected);
  const auto& tx = dag_.transaction(v);
  const auto& vx = dag_.vertex(v);
  forget_live(tx, v);
  roll_back_nonce(tx);
  initiators_.erase(v);
  outcomes_[vx.tx_hash] = {dag::Status::Rejected, vx.cycle, cycle, std::nullopt, why};
  trace_.push_back({cycle, std::nullopt, vx.tx_hash, vx.group, verdict_text(why)});
  ++report.rejected;
}

PreparedCycle Chain::prepare_cycle(net::Simulator& sim) {
  PreparedCycle prep;
  const std::uint64_t c = dag_.cycle();
  const std::uint64_t sim_cycle = sim.cycle();
  prep.cycle = c;
  prep.report.cycle = c;
  auto& report = prep.report;

  for (NodeId n : roster_) {
    if (sim.is_up(n)) prep.active.push_back(n);
  }
  if (shard::is_rebalance_boundary(c, cfg_.rebalance_every) && !roster_.empty()) {
    shards_ = shard::rebalance(cfg_.seed, c, shards_, roster_).map;
  }

  // Committees are drawn per (group, shard) bucket from what is left of
  // the active pool, so no node serves two committees in one cycle.
  std::vector<NodeId> pool = prep.active;
  std::map<BucketKey, Bucket> buckets;
  auto open = [&](const BucketKey& key) -> Bucket* {
    if (auto it = buckets.find(key); it != buckets.end()) return &it->second;
    if (pool.size() < cfg_.group_size || cfg_.group_size == 0) return nullptr;
    Bucket b;
    b.members = shard::select_validators(cfg_.seed, c, shard::committee_tag(key.first, key.second), pool,
                                         cfg_.group_size, cfg_.redraw_every);
    for (NodeId m : b.members) {
      b.capacity += sim.profile(m).capacity;
      pool.erase(std::find(pool.begin(), pool.end(), m));
    }
    return &buckets.emplace(key, std::move(b)).first->second;
  };
  auto bucket_of = [&](dag::VertexId v) {
    const auto& vx = dag_.vertex(v);
    return BucketKey{vx.group, shard::shard_for_key(vx.tx_hash, shards_)};
  };

  std::sort(deferred_.begin(), deferred_.end());
  std::vector<dag::VertexId> orphaned;
  for (dag::VertexId v : deferred_) {
    Bucket* b = open(bucket_of(v));
    if (!b) {
      orphaned.push_back(v);
      continue;
    }
    b->load += resource_units(dag_.transaction(v));
    b->work.push_back(v);
  }
  deferred_.clear();

  std::deque<Queued> waiting;
  std::set<AccountId> blocked;
  std::uint64_t admitted_units = 0;
  while (!ingress_.empty()) {
    Queued q = std::move(ingress_.front());
    ingress_.pop_front();
    if (blocked.count(q.tx.sender)) {
      waiting.push_back(std::move(q));
      continue;
    }
    const Group g = shard::classify_group(q.tx, state_.is_contract(q.tx.to));
    const auto units = resource_units(q.tx);
    Bucket* b = open({g, shard::shard_for_key(q.hash, shards_)});
    if (!b || (b->load > 0 && b->load + units > b->capacity)) {
      blocked.insert(q.tx.sender);
      waiting.push_back(std::move(q));
      continue;
    }
    queued_.erase(q.hash);
    try {
      const auto v = dag_.insert_transaction(q.tx, g, c);
      b->load += units;
      b->work.push_back(v);
      live_[q.tx.sender].insert(v);
      initiators_.emplace(v, std::move(q.initiator));
      admitted_units += units;
      ++report.admitted;
    } catch (const Error& e) {
      roll_back_nonce(q.tx);
      const auto why = e.code() == Errc::NonceGap ? RejectReason::BadNonce : RejectReason::MalformedPayload;
      outcomes_[q.hash] = {dag::Status::Rejected, c, c, std::nullopt, why};
      trace_.push_back({c, std::nullopt, q.hash, g, "dropped:" + std::string(reason_name(why))});
      ++report.rejected;
    }
  }
  ingress_ = std::move(waiting);
  std::uint64_t backlog_units = 0;
  for (const auto& q : ingress_) backlog_units += resource_units(q.tx);
  prep.demand_units = backlog_units + admitted_units;

  dag_.advance_cycle();

  for (auto& [key, bucket] : buckets) {
    prep.n_g[static_cast<std::size_t>(key.first) - 1] += static_cast<std::uint32_t>(bucket.members.size());
    std::vector<PublicKey> pks;
    for (NodeId m : bucket.members) pks.push_back(node_key(m).public_key());
    const auto set = make_validator_set(key.first, key.second, c, bucket.members, pks);
    const std::size_t k = segments_for(set.members.size());
    std::sort(bucket.work.begin(), bucket.work.end());

    for (dag::VertexId v : bucket.work) {
      const auto tx = dag_.transaction(v);
      const auto& vx = dag_.vertex(v);
      try {
        if (injected_.count(vx.tx_hash)) {
          reject(v, c, RejectReason::Injected, report);
          continue;
        }
        const auto segments = segment_transaction(tx, k);
        const ValidationContext ctx{state_, expected_fee(state_, tx, friction_.friction),
                                    expected_nonce(tx, v), k, shards_, set.members, verify_signature(tx)};
        std::vector<SegmentVote> votes;
        const net::SimTime deadline = sim.now() + sim.config().cycle_ms;
        auto relay = [&](NodeId from, SegmentVote vote) {
          const auto out = sim.send(from, cfg_.relay, "vote", kVoteWireSize, v);
          if (out.delivered && out.deliver_at <= deadline) votes.push_back(std::move(vote));
        };
        for (NodeId m : set.members) {
          const auto fault = sim.fault_of(m, sim_cycle);
          if (fault == net::FaultClass::Crash) continue;
          for (std::size_t i = 0; i < k; ++i) {
            Bytes received = segments[i];
            if (fault == net::FaultClass::TamperSegment && !received.empty()) received[0] ^= 0x01;
            auto vote = validate_segment(m, node_key(m), tx, i, received, ctx);
            if (fault == net::FaultClass::Equivocate) {
              SegmentVote other = vote;
              other.verdict = vote.verdict == Verdict::Approve ? Verdict::Reject : Verdict::Approve;
              other.reason = other.verdict == Verdict::Reject ? RejectReason::HashMismatch : RejectReason::None;
              relay(m, sign_vote(std::move(other), node_key(m)));
            }
            relay(m, std::move(vote));
          }
        }
        auto result = aggregate_votes(votes, set, tx, k, cfg_.stamp_difficulty);
        for (NodeId m : result.counted) prep.participation[m] += k;
        switch (result.outcome) {
          case Outcome::Validated:
            dag_.mark_status(v, dag::Status::Validated);
            prep.ready.push_back({v, vx.cycle, tx, vx.group, initiators_.at(v), std::move(result.certificate)});
            break;
          case Outcome::Rejected:
            reject(v, c, result.reason, report);
            break;
          case Outcome::Deferred:
            if (c - vx.cycle >= cfg_.relay_bound) {
              reject(v, c, RejectReason::RelayTimeout, report);
            } else {
              deferred_.push_back(v);
              ++report.deferred;
            }
            break;
        }
      } catch (const std::exception& e) {
        report.errors.push_back(vx.tx_hash.short_hex() + ": " + e.what());
        if (dag_.vertex(v).status == dag::Status::Assigned) reject(v, c, RejectReason::MalformedPayload, report);
      }
    }
  }
  for (dag::VertexId v : orphaned) {
    const auto& vx = dag_.vertex(v);
    if (c - vx.cycle >= cfg_.relay_bound) {
      reject(v, c, RejectReason::RelayTimeout, report);
    } else {
      deferred_.push_back(v);
      ++report.deferred;
    }
  }

  for (auto& carried : carried_) prep.ready.push_back(std::move(carried));
  carried_.clear();
  return prep;
}

CycleReport Chain::commit_cycle(net::Simulator& sim, PreparedCycle&& prep, const CommitControls& controls) {
  const std::uint64_t c = prep.cycle;
  const std::uint64_t sim_cycle = sim.cycle();
  CycleReport report = std::move(prep.report);

  // pair vetoes and holds
  std::vector<ValidatedTx> ready;
  std::map<AccountId, dag::VertexId> held_from;
  for (auto& v : prep.ready) {
    const auto h = hash_transaction(v.tx);
    if (controls.veto.count(h)) {
      reject(v.vertex, c, RejectReason::PairVeto, report);
      continue;
    }
    if (controls.hold.count(h)) {
      auto [it, fresh] = held_from.emplace(v.tx.sender, v.vertex);
      if (!fresh) it->second = std::min(it->second, v.vertex);
    }
    ready.push_back(std::move(v));
  }
  {
    std::vector<ValidatedTx> keep;
    for (auto& v : ready) {
      auto it = held_from.find(v.tx.sender);
      if (it != held_from.end() && v.vertex >= it->second) {
        carried_.push_back(std::move(v));
        ++report.held;
      } else {
        keep.push_back(std::move(v));
      }
    }
    ready = std::move(keep);
  }

  const std::size_t quorum = constructor_quorum();
  std::optional<BlockDraft> draft;
  std::optional<Certificate> cert;
  Digest signed_root;

  if (prep.active.size() >= cfg_.group_size && cfg_.group_size > 0) {
    const auto members = shard::select_validators(cfg_.seed, c, shard::kConstructorTag, prep.active,
                                                  cfg_.group_size, cfg_.redraw_every);
    std::map<AccountId, std::uint64_t> weights;
    for (const auto& [node, w] : prep.participation) weights[node_key(node).account()] += w;
    for (NodeId m : members) {
      if (sim.fault_of(m, sim_cycle) != net::FaultClass::Crash) weights[node_key(m).account()] += 1;
    }
    Amount mint = 0;
    if (cfg_.mint_every != 0 && (c + 1) % cfg_.mint_every == 0) {
      mint = tokenomics::mint_inflation(state_.supply, cfg_.mint_rate_bps);
    }
    const Digest prev = blocks_.empty() ? genesis_hash() : block_hash(blocks_.back());
    try {
      draft = construct_block(ready, state_, blocks_.size() + 1, prev,
                              {c, friction_.friction, mint, std::move(weights)});
    } catch (const std::exception& e) {
      report.errors.push_back(std::string("construct: ") + e.what());
    }

    if (draft) {
      Block tampered = draft->block;
      tampered.state_root = tamper_root(draft->block.state_root);
      const Digest honest_subject = block_subject(draft->block);
      const Digest tampered_subject = block_subject(tampered);
      std::map<Digest, std::map<NodeId, Digest>> tally;  // subject -> voter -> vote hash
      std::map<NodeId, std::set<Digest>> signed_by;
      const net::SimTime deadline = sim.now() + sim.config().cycle_ms;
      auto cast = [&](NodeId m, const Digest& subject) {
        const auto msg = block_vote_bytes(subject, m);
        const auto sig = node_key(m).sign(msg);
        const auto out = sim.send(m, cfg_.relay, "block-vote", 32 + 4 + 64, c);
        if (!out.delivered || out.deliver_at > deadline) return;
        if (!verify_detached(msg, sig, node_key(m).public_key())) return;
        tally[subject][m] = Hasher().update(msg).update(ByteView(sig)).finish();
        signed_by[m].insert(subject);
      };
      for (NodeId m : members) {
        switch (sim.fault_of(m, sim_cycle)) {
          case net::FaultClass::Crash: break;
          case net::FaultClass::Honest: cast(m, honest_subject); break;
          case net::FaultClass::TamperSegment: cast(m, tampered_subject); break;
          case net::FaultClass::Equivocate:
            cast(m, honest_subject);
            cast(m, tampered_subject);
            break;
        }
      }
      for (const auto& [subject, voters] : tally) {
        std::vector<NodeId> signers;
        std::vector<Digest> leaves;
        for (const auto& [m, vh] : voters) {
          if (signed_by[m].size() > 1) continue;
          signers.push_back(m);
          leaves.push_back(vh);
        }
        if (signers.size() < quorum) continue;
        cert = issue_certificate(Stage::Constructor, subject, signers, c, merkle_root(leaves), quorum,
                                 cfg_.stamp_difficulty);
        signed_root = subject == honest_subject ? draft->block.state_root : tampered.state_root;
        break;
      }
    }
  }

  Amount distributed = 0;
  Amount minted = 0;
  Amount transferred = 0;
  std::uint64_t units = 0;
  std::uint64_t included = 0;
  if (draft && cert) {
    Block block = std::move(draft->block);
    block.state_root = signed_root;
    block.constructor_cert = *cert;
    const std::uint64_t height = block.height;
    std::map<dag::VertexId, const ValidatedTx*> by_vertex;
    for (const auto& v : ready) by_vertex[v.vertex] = &v;
    for (dag::VertexId v : draft->included) {
      dag_.mark_status(v, dag::Status::Finalized);
      const auto& tx = dag_.transaction(v);
      const auto& vx = dag_.vertex(v);
      forget_live(tx, v);
      initiators_.erase(v);
      units += resource_units(tx);
      outcomes_[vx.tx_hash] = {dag::Status::Finalized, vx.cycle, c, height, RejectReason::None};
      trace_.push_back({c, height, vx.tx_hash, vx.group, "finalized"});
      ++report.finalized;
    }
    for (const auto& [v, why] : draft->vetoed) reject(v, c, why, report);
    for (const auto& p : block.payouts) distributed += p.amount;
    minted = block.minted;
    transferred = draft->transferred;
    included = draft->included.size();
    state_ = std::move(draft->state);
    blocks_.push_back(std::move(block));
    report.height = height;
  } else {
    for (auto& v : ready) {
      if (c - v.cycle >= cfg_.relay_bound) {
        reject(v.vertex, c, RejectReason::RelayTimeout, report);
      } else {
        carried_.push_back(std::move(v));
        ++report.deferred;
      }
    }
  }

  tokenomics::CycleLog log;
  log.cycle = c;
  log.transferred = transferred;
  log.total_balance = state_.total_balances();
  log.tx_count = included;
  log.resource_units = units;
  log.n_g = prep.n_g;
  logs_.push_back(log);

  std::vector<tokenomics::NodeOffer> offers;
  for (NodeId n : prep.active) {
    const auto& p = sim.profile(n);
    offers.push_back({p.capacity, p.availability});
  }
  const auto metrics =
      tokenomics::measure_cycle(logs_, cfg_.velocity_window, offers, prep.demand_units, sim.config().cycle_ms);
  const double charged = friction_.friction;
  const auto action = metrics.supply > 0.0 ? tokenomics::check_resource_balance(metrics)
                                           : tokenomics::CorrectionAction::NoAction;
  friction_ = tokenomics::update_friction(friction_, metrics, action);
  friction_.pool = state_.pool;
  economics_.push_back({c, metrics.supply, metrics.demand, charged, metrics.velocity, state_.pool, minted,
                        distributed});
  reports_.push_back(report);
  return report;
}

CycleReport Chain::run_cycle(net::Simulator& sim) { return commit_cycle(sim, prepare_cycle(sim)); }

}  // namespace parax::consensus
