#include "parax/scenario/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "parax/ledger/error.hpp"

namespace parax::scenario {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Typed access to one JSON object; remembers which keys were read so the
// rest can be reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) fail(path_.empty() ? "document" : path_, "must be an object");
  }

  ~Fields() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(join(path_, key), "unknown key");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void uint(const std::string& key, T& out, std::uint64_t lo = 0,
            std::uint64_t hi = std::numeric_limits<T>::max()) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      fail(join(path_, key), "must be a non-negative integer");
      return;
    }
    const auto x = v->get<std::uint64_t>();
    if (x < lo || x > hi) {
      fail(join(path_, key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return;
    }
    out = static_cast<T>(x);
  }

  void number(const std::string& key, double& out, double lo, double hi) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number() || !std::isfinite(v->get<double>())) {
      fail(join(path_, key), "must be a number");
      return;
    }
    const double x = v->get<double>();
    if (x < lo || x > hi) {
      fail(join(path_, key), "must be in [" + fmt(lo) + ", " + fmt(hi) + "]");
      return;
    }
    out = x;
  }

  void number(const std::string& key, std::optional<double>& out, double lo, double hi) {
    double x = 0.0;
    const bool present = find(key) != nullptr;
    const auto before = errors_.size();
    number(key, x, lo, hi);
    if (present && errors_.size() == before) out = x;
  }

  void text(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string() || v->get<std::string>().empty()) {
      fail(join(path_, key), "must be a non-empty string");
      return;
    }
    out = v->get<std::string>();
  }

  void node_class(const std::string& key, net::NodeClass& out) {
    std::string s;
    text(key, s);
    if (s.empty()) return;
    if (s == "server") out = net::NodeClass::Server;
    else if (s == "mobile") out = net::NodeClass::Mobile;
    else fail(join(path_, key), "expected \"server\" or \"mobile\", got \"" + s + "\"");
  }

  void fault(const std::string& key, net::FaultClass& out) {
    std::string s;
    text(key, s);
    if (s.empty()) return;
    if (auto f = net::fault_from_name(s)) out = *f;
    else fail(join(path_, key), "unknown fault class \"" + s + "\"");
  }

  const json* array(const std::string& key) {
    const json* v = find(key);
    if (v && !v->is_array()) {
      fail(join(path_, key), "must be an array");
      return nullptr;
    }
    return v;
  }

  void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }
  const std::string& path() const { return path_; }

 private:
  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

const json kEmpty = json::object();

const json& object_or_empty(Fields& f, const std::string& key) {
  const json* v = f.find(key);
  return v ? *v : kEmpty;
}

std::vector<NodeSpec> parse_nodes(const json& arr, const std::string& path, std::vector<std::string>& errors) {
  std::vector<NodeSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Fields f(arr[i], path + "[" + std::to_string(i) + "]", errors);
    NodeSpec n;
    f.uint("count", n.count, 1, 4096);
    f.node_class("class", n.cls);
    f.uint("capacity", n.capacity, 1);
    f.number("availability", n.availability, 0.0, 1.0);
    f.fault("fault", n.fault);
    out.push_back(n);
  }
  return out;
}

WorkloadSpec parse_workload(const json& obj, const std::string& path, WorkloadSpec w,
                            std::vector<std::string>& errors) {
  Fields f(obj, path, errors);
  f.number("rate", w.rate, 0.0, 1e6);
  f.uint("accounts", w.accounts, 1, 1u << 20);
  f.uint("initial_balance", w.initial_balance);
  f.uint("value_min", w.value_min, 1);
  f.uint("value_max", w.value_max, 1);
  f.uint("contracts", w.contracts, 1, 1u << 16);
  f.number("contract_fraction", w.contract_fraction, 0.0, 1.0);
  f.number("receipt_fraction", w.receipt_fraction, 0.0, 1.0);
  f.number("data_fraction", w.data_fraction, 0.0, 1.0);
  f.number("invalid_fraction", w.invalid_fraction, 0.0, 1.0);
  f.uint("payload_bytes", w.payload_bytes, 0, 1u << 16);
  f.number("elasticity", w.elasticity, 0.0, 16.0);
  f.uint("quiet_tail", w.quiet_tail);
  if (w.value_min > w.value_max) f.fail(path, "value_min exceeds value_max");
  if (w.contract_fraction + w.receipt_fraction + w.data_fraction > 1.0) {
    f.fail(path, "contract, receipt and data fractions sum above 1");
  }
  return w;
}

}  // namespace

std::size_t ScenarioConfig::node_count() const {
  std::size_t n = 0;
  for (const auto& c : chains) {
    for (const auto& s : c.nodes) n += s.count;
  }
  return n;
}

ScenarioConfig parse_config(const json& doc, std::vector<std::string>& errors) {
  ScenarioConfig cfg;
  Fields top(doc, "", errors);
  top.text("name", cfg.name);

  {
    Fields f(object_or_empty(top, "sim"), "sim", errors);
    f.uint("seed", cfg.seed);
    f.uint("cycles", cfg.cycles, 1, 1'000'000);
    f.uint("cycle_ms", cfg.net.cycle_ms, 1);
    f.uint("replicas", cfg.replicas, 1, 1024);
  }
  {
    Fields f(object_or_empty(top, "net"), "net", errors);
    f.uint("base_latency_ms", cfg.net.base_latency_ms);
    f.uint("jitter_ms", cfg.net.jitter_ms);
    f.number("drop_prob", cfg.net.drop_prob, 0.0, 1.0);
  }
  {
    Fields f(object_or_empty(top, "groups"), "groups", errors);
    f.uint("min_size", cfg.group_size, 1, 256);
  }
  {
    Fields f(object_or_empty(top, "selector"), "selector", errors);
    f.uint("redraw_every", cfg.redraw_every, 1);
  }
  {
    Fields f(object_or_empty(top, "shards"), "shards", errors);
    f.uint("count", cfg.shard_count, 1, 4096);
    f.uint("replication", cfg.replication, 1, 64);
    f.uint("rebalance_every", cfg.rebalance_every);
  }
  {
    Fields f(object_or_empty(top, "consensus"), "consensus", errors);
    f.uint("relay_bound", cfg.relay_bound, 1);
    f.uint("stamp_difficulty", cfg.stamp_difficulty, 0, 24);
  }
  {
    Fields f(object_or_empty(top, "tokenomics"), "tokenomics", errors);
    f.number("f_initial", cfg.friction.friction, 1e-9, 1e12);
    f.number("f_min", cfg.friction.f_min, 1e-9, 1e12);
    f.number("f_max", cfg.friction.f_max, 1e-9, 1e12);
    f.number("alpha", cfg.friction.alpha, 0.0, 16.0);
    f.uint("velocity_window", cfg.velocity_window, 1);
    f.uint("mint_rate_bps", cfg.mint_rate_bps, 0, 10'000);
    f.uint("mint_every", cfg.mint_every);
    const auto& fr = cfg.friction;
    if (fr.f_min > fr.f_max) f.fail("tokenomics", "f_min exceeds f_max");
    else if (fr.friction < fr.f_min || fr.friction > fr.f_max) f.fail("tokenomics.f_initial", "outside [f_min, f_max]");
  }

  WorkloadSpec base_workload;
  if (const json* w = top.find("workload")) base_workload = parse_workload(*w, "workload", base_workload, errors);
  std::vector<NodeSpec> base_nodes;
  if (const json* n = top.array("nodes")) base_nodes = parse_nodes(*n, "nodes", errors);

  if (const json* chains = top.array("chains")) {
    if (chains->empty() || chains->size() > 2) top.fail("chains", "one or two chains supported");
    for (std::size_t i = 0; i < chains->size(); ++i) {
      const std::string path = "chains[" + std::to_string(i) + "]";
      Fields f((*chains)[i], path, errors);
      ChainSpec c;
      c.label = std::string(1, static_cast<char>('A' + i));
      f.text("label", c.label);
      if (const json* n = f.array("nodes")) c.nodes = parse_nodes(*n, path + ".nodes", errors);
      else c.nodes = base_nodes;
      c.workload = base_workload;
      if (const json* w = f.find("workload")) c.workload = parse_workload(*w, path + ".workload", base_workload, errors);
      cfg.chains.push_back(std::move(c));
    }
    if (cfg.chains.size() == 2 && cfg.chains[0].label == cfg.chains[1].label) {
      top.fail("chains", "labels must differ");
    }
  } else {
    cfg.chains.push_back(ChainSpec{"A", base_nodes, base_workload});
  }
  for (std::size_t i = 0; i < cfg.chains.size(); ++i) {
    std::size_t n = 0;
    for (const auto& s : cfg.chains[i].nodes) n += s.count;
    if (n < cfg.group_size) {
      top.fail("chains[" + std::to_string(i) + "].nodes",
               "needs at least groups.min_size (" + std::to_string(cfg.group_size) + ") nodes, has " +
                   std::to_string(n));
    }
  }

  if (const json* faults = top.array("faults")) {
    for (std::size_t i = 0; i < faults->size(); ++i) {
      const std::string path = "faults[" + std::to_string(i) + "]";
      Fields f((*faults)[i], path, errors);
      FaultSpec s;
      if (!f.find("node")) f.fail(path + ".node", "required");
      f.uint("node", s.node, 1);
      f.fault("class", s.fault);
      f.uint("from_cycle", s.from_cycle);
      s.to_cycle = cfg.cycles;
      f.uint("to_cycle", s.to_cycle);
      if (s.node > cfg.node_count()) f.fail(path + ".node", "no node with id " + std::to_string(s.node));
      if (s.from_cycle > s.to_cycle) f.fail(path, "from_cycle after to_cycle");
      cfg.faults.push_back(s);
    }
  }

  auto chain_known = [&](const std::string& label) {
    for (const auto& c : cfg.chains) {
      if (c.label == label) return true;
    }
    return false;
  };
  std::set<std::string> party_labels;
  if (const json* parties = top.array("parties")) {
    for (std::size_t i = 0; i < parties->size(); ++i) {
      const std::string path = "parties[" + std::to_string(i) + "]";
      Fields f((*parties)[i], path, errors);
      PartySpec p;
      f.text("label", p.label);
      f.text("chain", p.chain);
      f.uint("balance", p.balance);
      if (p.label.empty()) f.fail(path + ".label", "required");
      if (!party_labels.insert(p.label).second) f.fail(path + ".label", "duplicate party \"" + p.label + "\"");
      if (!chain_known(p.chain)) f.fail(path + ".chain", "unknown chain \"" + p.chain + "\"");
      cfg.parties.push_back(p);
    }
  }

  if (const json* swaps = top.array("swaps")) {
    if (!swaps->empty() && cfg.chains.size() != 2) top.fail("swaps", "swaps need exactly two chains");
    for (std::size_t i = 0; i < swaps->size(); ++i) {
      const std::string path = "swaps[" + std::to_string(i) + "]";
      Fields f((*swaps)[i], path, errors);
      SwapSpec s;
      f.text("party", s.party);
      if (const json* acc = f.array("acceptors")) {
        for (const auto& a : *acc) {
          if (a.is_string()) s.acceptors.push_back(a.get<std::string>());
          else f.fail(path + ".acceptors", "entries must be party labels");
        }
      }
      f.uint("amount", s.amount, 1);
      f.uint("want", s.want, 1);
      f.uint("timeout_cycles", s.timeout_cycles, 1);
      f.uint("fee_bps", s.fee_bps, 0, 10'000);
      f.uint("at_cycle", s.at_cycle);
      auto chain_of = [&](const std::string& label) -> std::string {
        for (const auto& p : cfg.parties) {
          if (p.label == label) return p.chain;
        }
        return {};
      };
      if (!party_labels.count(s.party)) f.fail(path + ".party", "unknown party \"" + s.party + "\"");
      else if (cfg.chains.size() == 2 && chain_of(s.party) != cfg.chains[0].label) {
        f.fail(path + ".party", "offering party must hold its funds on chain " + cfg.chains[0].label);
      }
      for (const auto& a : s.acceptors) {
        if (!party_labels.count(a)) f.fail(path + ".acceptors", "unknown party \"" + a + "\"");
        else if (cfg.chains.size() == 2 && chain_of(a) != cfg.chains[1].label) {
          f.fail(path + ".acceptors", "acceptor \"" + a + "\" must hold its funds on chain " + cfg.chains[1].label);
        }
      }
      if (s.acceptors.empty()) f.fail(path + ".acceptors", "at least one acceptor required");
      if (s.at_cycle >= cfg.cycles) f.fail(path + ".at_cycle", "not before sim.cycles");
      cfg.swaps.push_back(s);
    }
  }

  {
    const json* sweep = top.find("sweep");
    if (sweep) {
      Fields f(*sweep, "sweep", errors);
      if (const json* scale = f.array("scale")) {
        for (const auto& v : *scale) {
          if (v.is_number_unsigned() && v.get<std::uint64_t>() >= 1 && v.get<std::uint64_t>() <= 64) {
            cfg.sweep.push_back(v.get<std::uint32_t>());
          } else {
            f.fail("sweep.scale", "entries must be integers in [1, 64]");
          }
        }
      }
    }
  }
  return cfg;
}

ScenarioConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaViolation, path.string() + ": " + e.what());
  }
  std::vector<std::string> errors;
  auto cfg = parse_config(doc, errors);
  if (!errors.empty()) {
    std::string all;
    for (const auto& e : errors) all += "\n  " + e;
    throw Error(Errc::SchemaViolation, path.string() + ":" + all);
  }
  if (cfg.name.empty()) cfg.name = path.stem().string();
  return cfg;
}

namespace {

json node_json(const NodeSpec& n) {
  json j{{"count", n.count},
         {"class", std::string(net::node_class_name(n.cls))},
         {"capacity", n.capacity},
         {"fault", std::string(net::fault_name(n.fault))}};
  if (n.availability) j["availability"] = *n.availability;
  return j;
}

json workload_json(const WorkloadSpec& w) {
  return {{"rate", w.rate},
          {"accounts", w.accounts},
          {"initial_balance", w.initial_balance},
          {"value_min", w.value_min},
          {"value_max", w.value_max},
          {"contracts", w.contracts},
          {"contract_fraction", w.contract_fraction},
          {"receipt_fraction", w.receipt_fraction},
          {"data_fraction", w.data_fraction},
          {"invalid_fraction", w.invalid_fraction},
          {"payload_bytes", w.payload_bytes},
          {"elasticity", w.elasticity},
          {"quiet_tail", w.quiet_tail}};
}

}  // namespace

json to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["sim"] = {{"seed", cfg.seed}, {"cycles", cfg.cycles}, {"cycle_ms", cfg.net.cycle_ms}, {"replicas", cfg.replicas}};
  j["net"] = {{"base_latency_ms", cfg.net.base_latency_ms},
              {"jitter_ms", cfg.net.jitter_ms},
              {"drop_prob", cfg.net.drop_prob}};
  j["groups"] = {{"min_size", cfg.group_size}};
  j["selector"] = {{"redraw_every", cfg.redraw_every}};
  j["shards"] = {{"count", cfg.shard_count}, {"replication", cfg.replication}, {"rebalance_every", cfg.rebalance_every}};
  j["consensus"] = {{"relay_bound", cfg.relay_bound}, {"stamp_difficulty", cfg.stamp_difficulty}};
  j["tokenomics"] = {{"f_initial", cfg.friction.friction}, {"f_min", cfg.friction.f_min},
                     {"f_max", cfg.friction.f_max},        {"alpha", cfg.friction.alpha},
                     {"velocity_window", cfg.velocity_window}, {"mint_rate_bps", cfg.mint_rate_bps},
                     {"mint_every", cfg.mint_every}};
  j["chains"] = json::array();
  for (const auto& c : cfg.chains) {
    json nodes = json::array();
    for (const auto& n : c.nodes) nodes.push_back(node_json(n));
    j["chains"].push_back({{"label", c.label}, {"nodes", nodes}, {"workload", workload_json(c.workload)}});
  }
  j["faults"] = json::array();
  for (const auto& f : cfg.faults) {
    j["faults"].push_back({{"node", f.node},
                           {"class", std::string(net::fault_name(f.fault))},
                           {"from_cycle", f.from_cycle},
                           {"to_cycle", f.to_cycle}});
  }
  j["parties"] = json::array();
  for (const auto& p : cfg.parties) j["parties"].push_back({{"label", p.label}, {"chain", p.chain}, {"balance", p.balance}});
  j["swaps"] = json::array();
  for (const auto& s : cfg.swaps) {
    j["swaps"].push_back({{"party", s.party},
                          {"acceptors", s.acceptors},
                          {"amount", s.amount},
                          {"want", s.want},
                          {"timeout_cycles", s.timeout_cycles},
                          {"fee_bps", s.fee_bps},
                          {"at_cycle", s.at_cycle}});
  }
  j["sweep"] = {{"scale", cfg.sweep}};
  return j;
}

ScenarioConfig scaled(const ScenarioConfig& cfg, std::uint32_t factor) {
  auto out = cfg;
  out.sweep.clear();
  out.shard_count = cfg.shard_count * factor;
  for (auto& c : out.chains) {
    for (auto& n : c.nodes) n.count *= factor;
    c.workload.rate *= factor;
    c.workload.accounts *= factor;
  }
  return out;
}

}  // namespace parax::scenario
