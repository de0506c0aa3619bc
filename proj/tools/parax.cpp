// parax: scenario runner and output auditor.
//
//   parax run --config <file> [--seed N] [--out DIR] [--jobs N]
//   parax audit <DIR>
//   parax swap --offer <file> --config <file> [--out DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 audit failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "parax/ledger/error.hpp"
#include "parax/scenario/runner.hpp"

using namespace parax;
using nlohmann::json;

namespace {

constexpr int kConfigError = 2;

// --seed wins over PARAX_SEED, which wins over the config file.
void apply_seed(scenario::ScenarioConfig& cfg, const std::optional<std::uint64_t>& flag) {
  if (flag) {
    cfg.seed = *flag;
    return;
  }
  if (const char* env = std::getenv("PARAX_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw Error(Errc::SchemaViolation, std::string("PARAX_SEED is not an integer: ") + env);
    cfg.seed = v;
  }
}

void print_summary(const json& report) {
  if (report.contains("runs")) {
    for (const auto& r : report["runs"]) {
      std::string line = r.value("dir", std::string("."));
      for (const auto& c : r["chains"]) {
        line += " " + c["label"].get<std::string>() + ":finalized=" + std::to_string(c["finalized"].get<std::uint64_t>());
      }
      line += r["audit_pass"].get<bool>() ? " audit=pass" : " audit=FAIL";
      std::printf("%s\n", line.c_str());
    }
    return;
  }
  for (const auto& c : report["chains"]) {
    std::printf("chain %s: blocks=%llu finalized=%llu rejected=%llu F=%.4f\n", c["label"].get<std::string>().c_str(),
                static_cast<unsigned long long>(c["blocks"].get<std::uint64_t>()),
                static_cast<unsigned long long>(c["txs"]["finalized"].get<std::uint64_t>()),
                static_cast<unsigned long long>(c["txs"]["rejected"].get<std::uint64_t>()),
                c["economics"]["final_friction"].get<double>());
  }
  for (const auto& s : report["swaps"]) {
    if (s.contains("error")) {
      std::printf("swap %zu: open failed: %s\n", s["index"].get<std::size_t>(), s["error"].get<std::string>().c_str());
    } else {
      std::printf("swap %s: %s (%s) fees %.3f%%\n", s["swap_id"].get<std::string>().substr(0, 16).c_str(),
                  s["phase"].get<std::string>().c_str(), s["terminal"].get<std::string>().c_str(),
                  100.0 * s["fee_fraction"].get<double>());
    }
  }
  const auto& a = report["audit"];
  if (a["pass"].get<bool>()) {
    std::printf("audit: pass\n");
  } else {
    std::printf("audit: FAIL %s\n", a["first_violation"].dump().c_str());
  }
}

int run_and_report(const scenario::ScenarioConfig& cfg, const std::string& out, unsigned jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  const int code = scenario::run_all(cfg, out, jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ifstream in(std::filesystem::path(out) / "report.json");
  print_summary(json::parse(in));
  std::fprintf(stderr, "wrote %s in %.2fs\n", out.c_str(), secs);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-One.X ledger simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", offer_path, audit_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run a scenario and write its outputs");
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Parallel worlds for sweeps and replicas")->check(CLI::Range(1u, 256u));

  auto* audit = app.add_subcommand("audit", "Replay blocks.bin and check every invariant");
  audit->add_option("dir", audit_dir, "Output directory of a run")->required();

  auto* swap = app.add_subcommand("swap", "Run a two-chain config with one swap offer");
  swap->add_option("--offer", offer_path, "Offer JSON")->required();
  swap->add_option("--config", config_path, "Two-chain scenario JSON")->required();
  swap->add_option("--seed", seed, "Override the scenario seed");
  swap->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      auto cfg = scenario::validate_config(config_path);
      apply_seed(cfg, seed);
      return run_and_report(cfg, out_dir, jobs);
    }
    if (*audit) {
      json summary;
      int code = 3;
      try {
        code = scenario::audit_outputs(audit_dir, summary);
      } catch (const Error& e) {
        summary = {{"pass", false}, {"error", e.what()}};
      }
      std::printf("%s\n", summary.dump(2).c_str());
      std::printf("audit: %s\n", code == 0 ? "pass" : "FAIL");
      return code;
    }
    if (*swap) {
      auto cfg = scenario::validate_config(config_path);
      apply_seed(cfg, seed);
      std::ifstream in(offer_path);
      if (!in) throw Error(Errc::FileNotFound, offer_path);
      json offer;
      try {
        offer = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error(Errc::SchemaViolation, offer_path + ": " + e.what());
      }
      json doc = scenario::to_json(cfg);
      doc["swaps"] = json::array({offer});
      std::vector<std::string> errors;
      auto merged = scenario::parse_config(doc, errors);
      if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += "\n  " + e;
        throw Error(Errc::SchemaViolation, offer_path + ":" + all);
      }
      merged.sweep.clear();
      merged.replicas = 1;
      return run_and_report(merged, out_dir, 1);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == Errc::FileNotFound || e.code() == Errc::SchemaViolation) return kConfigError;
    return 3;
  }
  return kConfigError;
}
