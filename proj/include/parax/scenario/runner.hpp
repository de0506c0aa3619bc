#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parax/consensus/chain.hpp"
#include "parax/interop/coordinator.hpp"
#include "parax/scenario/audit.hpp"
#include "parax/scenario/config.hpp"
#include "parax/scenario/workload.hpp"

namespace parax::scenario {

struct SwapRecord {
  std::size_t index = 0;
  std::string party;
  std::optional<Digest> id;
  std::string error;  // open failed
};

/// One configured world: simulator, one or two chains, their workloads and
/// the swap coordinator. Deterministic in (config, seed).
class ScenarioRun : public net::EventSink {
 public:
  explicit ScenarioRun(ScenarioConfig cfg);
  ~ScenarioRun() override;

  ScenarioRun(const ScenarioRun&) = delete;
  ScenarioRun& operator=(const ScenarioRun&) = delete;

  /// Runs all configured cycles.
  void run();

  const ScenarioConfig& config() const { return cfg_; }
  net::Simulator& sim() { return *sim_; }
  std::size_t chain_count() const { return chains_.size(); }
  consensus::Chain& chain(std::size_t i) { return *chains_[i]; }
  const consensus::Chain& chain(std::size_t i) const { return *chains_[i]; }
  const Workload& workload(std::size_t i) const { return *workloads_[i]; }
  const interop::SwapCoordinator* coordinator() const { return coord_.get(); }
  const std::vector<SwapRecord>& swaps() const { return swaps_; }

  Bytes blocks_file() const;
  std::string economics_csv(std::size_t chain) const;
  std::string trace_log() const;
  nlohmann::json report(const AuditResult& audit) const;

  void on_event(net::Simulator& sim, const net::SimEvent& ev) override;

 private:
  void start_cycle(std::uint64_t cycle);

  ScenarioConfig cfg_;
  std::unique_ptr<net::Simulator> sim_;
  std::vector<std::unique_ptr<consensus::Chain>> chains_;
  std::vector<std::unique_ptr<Workload>> workloads_;
  std::unique_ptr<interop::SwapCoordinator> coord_;
  std::map<std::string, KeyPair> parties_;
  std::vector<SwapRecord> swaps_;
};

struct RunOutcome {
  nlohmann::json report;
  AuditResult audit;
  int exit_code = 0;  // 0 audit pass, 3 audit failure
};

/// Runs one world and writes report.json, economics.csv (plus
/// economics-<label>.csv for a second chain), trace.log and blocks.bin into
/// `out`. The audit in the report is computed from the written blocks.bin
/// bytes, the same way `audit` does it later.
RunOutcome run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out);

/// Expands sweep points and replicas into sub-directories when present and
/// runs them on up to `jobs` threads; a single world writes into `out`
/// directly. Returns the worst exit code.
int run_all(const ScenarioConfig& cfg, const std::filesystem::path& out, unsigned jobs);

/// Re-audits a directory and checks the result against its report.json.
/// Returns the process exit code (0 pass, 3 fail) and fills `summary`.
int audit_outputs(const std::filesystem::path& dir, nlohmann::json& summary);

}  // namespace parax::scenario
