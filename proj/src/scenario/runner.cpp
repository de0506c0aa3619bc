#include "parax/scenario/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "parax/interop/model_check.hpp"
#include "parax/ledger/error.hpp"

namespace parax::scenario {

using nlohmann::json;

namespace {

constexpr std::uint32_t kRelayBase = 0x7000'0001;
constexpr std::uint32_t kSwapEndpointA = 0x7000'0010;
constexpr std::uint32_t kSwapEndpointB = 0x7000'0011;
constexpr std::uint32_t kClientBase = 0x7200'0000;
constexpr std::uint32_t kFirstParty = 0x7100'0000;

void write_file(const std::filesystem::path& p, const void* data, std::size_t n) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + p.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_text(const std::filesystem::path& p, const std::string& s) { write_file(p, s.data(), s.size()); }

}  // namespace

ScenarioRun::ScenarioRun(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  auto net_cfg = cfg_.net;
  net_cfg.seed = cfg_.seed;
  sim_ = std::make_unique<net::Simulator>(net_cfg);
  sim_->keep_transcript(false);

  std::uint32_t next_id = 1;
  for (std::size_t ci = 0; ci < cfg_.chains.size(); ++ci) {
    const auto& spec = cfg_.chains[ci];
    std::vector<NodeId> roster;
    for (const auto& n : spec.nodes) {
      for (std::uint32_t k = 0; k < n.count; ++k) {
        roster.push_back(
            sim_->spawn_node(net::make_profile(NodeId{next_id++}, n.cls, n.capacity, n.availability, cfg_.seed, n.fault)));
      }
    }

    workloads_.push_back(std::make_unique<Workload>(spec.workload, spec.label, cfg_.seed,
                                                    NodeId{kClientBase + static_cast<std::uint32_t>(ci)}));
    consensus::LedgerState genesis;
    workloads_.back()->seed_genesis(genesis);
    for (const auto& p : cfg_.parties) {
      auto [it, fresh] = parties_.try_emplace(p.label, KeyPair::derive(cfg_.seed, "party/" + p.label));
      if (p.chain != spec.label) continue;
      genesis.touch(it->second.account()).balance += p.balance;
      genesis.supply += p.balance;
    }

    consensus::ChainConfig cc;
    cc.label = spec.label;
    cc.seed = cfg_.seed;
    cc.relay = NodeId{kRelayBase + static_cast<std::uint32_t>(ci)};
    cc.group_size = cfg_.group_size;
    cc.redraw_every = cfg_.redraw_every;
    cc.shard_count = cfg_.shard_count;
    cc.replication = cfg_.replication;
    cc.rebalance_every = cfg_.rebalance_every;
    cc.relay_bound = cfg_.relay_bound;
    cc.stamp_difficulty = cfg_.stamp_difficulty;
    cc.friction = cfg_.friction;
    cc.velocity_window = cfg_.velocity_window;
    cc.mint_rate_bps = cfg_.mint_rate_bps;
    cc.mint_every = cfg_.mint_every;
    chains_.push_back(std::make_unique<consensus::Chain>(cc, roster, std::move(genesis), *sim_));
  }

  for (const auto& f : cfg_.faults) sim_->inject_fault(NodeId{f.node}, f.fault, f.from_cycle, f.to_cycle);

  if (chains_.size() == 2) {
    coord_ = std::make_unique<interop::SwapCoordinator>(*chains_[0], *chains_[1], NodeId{kSwapEndpointA},
                                                        NodeId{kSwapEndpointB}, NodeId{kFirstParty});
    for (const auto& [label, key] : parties_) coord_->register_party(key);
    std::set<std::string> acceptors;
    for (const auto& s : cfg_.swaps) acceptors.insert(s.acceptors.begin(), s.acceptors.end());
    for (const auto& a : acceptors) coord_->register_acceptor(parties_.at(a).account());
  }
  for (std::size_t i = 0; i < cfg_.swaps.size(); ++i) swaps_.push_back({i, cfg_.swaps[i].party, std::nullopt, {}});
  sim_->set_sink(this);
}

ScenarioRun::~ScenarioRun() {
  if (sim_) sim_->set_sink(nullptr);
}

void ScenarioRun::start_cycle(std::uint64_t cycle) {
  for (std::size_t i = 0; i < chains_.size(); ++i) {
    const auto& w = cfg_.chains[i].workload;
    if (cycle + w.quiet_tail < cfg_.cycles) workloads_[i]->generate(*sim_, *chains_[i], cycle, cfg_.friction.friction);
  }
  for (std::size_t i = 0; i < cfg_.swaps.size(); ++i) {
    const auto& s = cfg_.swaps[i];
    if (s.at_cycle != cycle || !coord_) continue;
    interop::SwapOffer offer;
    offer.party_a = parties_.at(s.party).account();
    offer.chain_a = cfg_.chains[0].label;
    offer.amount_a = s.amount;
    offer.chain_b = cfg_.chains[1].label;
    offer.want_b = s.want;
    offer.timeout_cycles = s.timeout_cycles;
    offer.fee_bps = s.fee_bps;
    offer.salt = i;
    try {
      swaps_[i].id = coord_->open(*sim_, interop::sign_offer(offer, parties_.at(s.party)));
    } catch (const Error& e) {
      swaps_[i].error = e.what();
    }
  }
}

void ScenarioRun::on_event(net::Simulator& sim, const net::SimEvent& ev) {
  if (ev.kind == net::EventKind::Deliver && ev.message) {
    const auto& m = *ev.message;
    if (coord_ && coord_->handles(m)) {
      coord_->on_deliver(sim, m);
      return;
    }
    for (std::size_t i = 0; i < workloads_.size(); ++i) {
      if (workloads_[i]->handles(m)) {
        workloads_[i]->on_deliver(m, *chains_[i]);
        return;
      }
    }
    return;
  }
  if (ev.kind != net::EventKind::CycleTick) return;
  if (chains_.size() == 1) chains_[0]->run_cycle(sim);
  else interop::run_pair_tick(sim, *chains_[0], *chains_[1], coord_.get());
  for (std::size_t i = 0; i < chains_.size(); ++i) workloads_[i]->poll(*chains_[i]);
  start_cycle(ev.cycle + 1);
}

void ScenarioRun::run() {
  if (sim_->cycle() == 0 && sim_->now() == 0) start_cycle(0);
  sim_->run_until_cycle(cfg_.cycles);
}

Bytes ScenarioRun::blocks_file() const {
  std::vector<ChainRecord> recs;
  for (const auto& c : chains_) {
    recs.push_back({c->label(), c->constructor_quorum(), c->custody(), c->genesis(), c->blocks()});
  }
  return encode_blocks_file(to_json(cfg_).dump(), recs);
}

std::string ScenarioRun::economics_csv(std::size_t i) const {
  std::string out = "cycle,S,D,F,v,pool,minted,distributed\n";
  char line[256];
  for (const auto& r : chains_[i]->economics()) {
    std::snprintf(line, sizeof line, "%llu,%.3f,%.3f,%.6f,%.6f,%llu,%llu,%llu\n",
                  static_cast<unsigned long long>(r.cycle), r.supply, r.demand, r.friction, r.velocity,
                  static_cast<unsigned long long>(r.pool), static_cast<unsigned long long>(r.minted),
                  static_cast<unsigned long long>(r.distributed));
    out += line;
  }
  return out;
}

std::string ScenarioRun::trace_log() const {
  std::string out;
  for (const auto& c : chains_) {
    out += "# chain " + c->label() + "\n";
    for (const auto& t : c->trace()) {
      out += std::to_string(t.cycle) + " " + (t.height ? std::to_string(*t.height) : std::string("-")) + " " +
             t.tx_hash.hex() + " " + std::string(group_name(t.group)) + " " + t.verdict + "\n";
    }
  }
  if (coord_ && !coord_->trace().empty()) {
    out += "# swaps\n";
    for (const auto& t : coord_->trace()) {
      out += t.swap_id.hex() + " " + std::string(interop::phase_name(t.phase)) + " " + std::to_string(t.at) + " " +
             t.chain + " " + t.detail + "\n";
    }
  }
  return out;
}

json ScenarioRun::report(const AuditResult& audit) const {
  json j;
  j["name"] = cfg_.name;
  j["seed"] = cfg_.seed;
  j["cycles"] = cfg_.cycles;
  j["chains"] = json::array();
  for (std::size_t i = 0; i < chains_.size(); ++i) {
    const auto& c = *chains_[i];
    std::uint64_t finalized = 0, rejected = 0, dropped = 0;
    for (const auto& t : c.trace()) {
      if (t.verdict == "finalized") ++finalized;
      else if (t.verdict.rfind("rejected", 0) == 0) ++rejected;
      else ++dropped;
    }
    json throughput = json::array();
    for (const auto& r : c.reports()) throughput.push_back(r.finalized);

    Amount fees = 0;
    for (const auto& b : c.blocks()) {
      for (const auto& e : b.entries) fees += e.fee;
    }
    Amount minted = 0, distributed = 0;
    double ds = 0.0;
    std::size_t ds_n = 0;
    const auto& econ = c.economics();
    for (const auto& r : econ) {
      minted += r.minted;
      distributed += r.distributed;
    }
    for (std::size_t k = econ.size() > cfg_.velocity_window ? econ.size() - cfg_.velocity_window : 0; k < econ.size(); ++k) {
      if (econ[k].supply > 0.0) {
        ds += econ[k].demand / econ[k].supply;
        ++ds_n;
      }
    }
    const auto& w = workloads_[i]->stats();
    std::uint64_t invalid_finalized = 0;
    for (const auto& h : workloads_[i]->invalid_hashes()) {
      const auto o = c.outcome(h);
      if (o && o->status == dag::Status::Finalized) ++invalid_finalized;
    }
    j["chains"].push_back(
        {{"label", c.label()},
         {"nodes", c.roster().size()},
         {"blocks", c.blocks().size()},
         {"final_block_hash", c.blocks().empty() ? c.genesis_hash().hex() : consensus::block_hash(c.blocks().back()).hex()},
         {"txs", {{"finalized", finalized}, {"rejected", rejected}, {"dropped", dropped}, {"backlog", c.backlog()}}},
         {"throughput", throughput},
         {"economics",
          {{"final_friction", c.friction().friction},
           {"mean_ds_window", ds_n ? ds / static_cast<double>(ds_n) : 0.0},
           {"fees", fees},
           {"minted", minted},
           {"distributed", distributed},
           {"pool", c.state().pool},
           {"supply", c.state().supply}}},
         {"workload",
          {{"generated", w.generated},
           {"invalid", w.invalid},
           {"lost", w.lost},
           {"refused", w.refused},
           {"suppressed", w.suppressed},
           {"submitted", w.submitted},
           {"invalid_finalized", invalid_finalized}}},
         {"conserved", c.state().conserved()}});
  }

  j["swaps"] = json::array();
  for (const auto& s : swaps_) {
    json sj{{"index", s.index}, {"party", s.party}};
    if (!s.id) {
      sj["error"] = s.error;
      j["swaps"].push_back(sj);
      continue;
    }
    const auto& k = coord_->contract(*s.id);
    const std::array<interop::LegFlows, 2> flows{interop::leg_flows(*chains_[0], *s.id),
                                                 interop::leg_flows(*chains_[1], *s.id)};
    const auto terminal = interop::is_terminal(k.phase) ? interop::classify(flows, k.phase) : interop::Terminal::Stuck;
    const Amount fees = flows[0].protocol_fees + flows[1].protocol_fees + flows[0].lock_fees + flows[1].lock_fees;
    const Amount exchanged = k.offer.amount_a + k.offer.want_b;
    sj["swap_id"] = s.id->hex();
    sj["phase"] = std::string(interop::phase_name(k.phase));
    sj["terminal"] = std::string(interop::terminal_name(terminal));
    sj["amount"] = k.offer.amount_a;
    sj["want"] = k.offer.want_b;
    sj["fees"] = fees;
    sj["fee_fraction"] = exchanged ? static_cast<double>(fees) / static_cast<double>(exchanged) : 0.0;
    j["swaps"].push_back(sj);
  }
  j["audit"] = to_json(audit);
  return j;
}

RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out) {
  ScenarioRun run(cfg);
  run.run();
  std::filesystem::create_directories(out);

  const auto blocks = run.blocks_file();
  write_file(out / "blocks.bin", blocks.data(), blocks.size());
  write_text(out / "economics.csv", run.economics_csv(0));
  for (std::size_t i = 1; i < run.chain_count(); ++i) {
    write_text(out / ("economics-" + run.chain(i).label() + ".csv"), run.economics_csv(i));
  }
  write_text(out / "trace.log", run.trace_log());

  RunOutcome r;
  r.audit = audit_blocks(blocks);
  r.report = run.report(r.audit);
  r.exit_code = r.audit.pass ? 0 : 3;
  write_text(out / "report.json", r.report.dump(2) + "\n");
  return r;
}

int run_all(const ScenarioConfig& cfg, const std::filesystem::path& out, unsigned jobs) {
  struct Task {
    ScenarioConfig cfg;
    std::filesystem::path dir;
    json key;
  };
  std::vector<Task> tasks;
  const std::vector<std::uint32_t> scales = cfg.sweep.empty() ? std::vector<std::uint32_t>{0} : cfg.sweep;
  for (auto s : scales) {
    for (std::uint32_t r = 0; r < cfg.replicas; ++r) {
      Task t{s ? scaled(cfg, s) : cfg, out, json::object()};
      t.cfg.replicas = 1;
      t.cfg.seed = cfg.seed + r;
      std::string sub;
      if (s) {
        sub += "scale-" + std::to_string(s);
        t.key["scale"] = s;
      }
      if (cfg.replicas > 1) {
        sub += (sub.empty() ? "" : "/") + std::string("seed-") + std::to_string(t.cfg.seed);
        t.key["seed"] = t.cfg.seed;
      }
      if (!sub.empty()) {
        t.dir = out / sub;
        t.key["dir"] = sub;
      }
      tasks.push_back(std::move(t));
    }
  }
  if (tasks.size() == 1 && tasks[0].key.empty()) return run_scenario(cfg, out).exit_code;

  std::vector<RunOutcome> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) results[i] = run_scenario(tasks[i].cfg, tasks[i].dir);
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size()))); ++k) {
      pool.emplace_back(worker);
    }
    worker();
  }

  json summary;
  summary["name"] = cfg.name;
  summary["runs"] = json::array();
  int code = 0;
  bool pass = true;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto entry = tasks[i].key;
    json chains = json::array();
    for (const auto& c : results[i].report["chains"]) {
      chains.push_back({{"label", c["label"]},
                        {"nodes", c["nodes"]},
                        {"finalized", c["txs"]["finalized"]},
                        {"final_block_hash", c["final_block_hash"]}});
    }
    entry["chains"] = chains;
    entry["audit_pass"] = results[i].audit.pass;
    pass = pass && results[i].audit.pass;
    code = std::max(code, results[i].exit_code);
    summary["runs"].push_back(entry);
  }
  summary["audit"] = {{"pass", pass}};
  std::filesystem::create_directories(out);
  write_text(out / "report.json", summary.dump(2) + "\n");
  return code;
}

int audit_outputs(const std::filesystem::path& dir, json& summary) {
  std::ifstream in(dir / "report.json");
  if (!in) throw Error(Errc::FileNotFound, (dir / "report.json").string());
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::CorruptOutput, "report.json: " + std::string(e.what()));
  }

  if (report.contains("runs")) {
    summary = {{"runs", json::array()}};
    int code = 0;
    for (const auto& r : report["runs"]) {
      json sub;
      const int c = audit_outputs(dir / r.at("dir").get<std::string>(), sub);
      sub["dir"] = r.at("dir");
      summary["runs"].push_back(sub);
      code = std::max(code, c);
    }
    summary["pass"] = code == 0;
    return code;
  }

  const auto audit = audit_directory(dir);
  summary = to_json(audit);
  const bool agrees = report.contains("audit") && report["audit"] == summary;
  summary["agrees_with_report"] = agrees;
  return audit.pass && agrees ? 0 : 3;
}

}  // namespace parax::scenario
