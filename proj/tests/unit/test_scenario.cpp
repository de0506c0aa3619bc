#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "parax/consensus/block.hpp"
#include "parax/ledger/error.hpp"
#include "parax/scenario/runner.hpp"

using namespace parax;
using namespace parax::scenario;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("parax-unit-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json small(std::uint64_t cycles = 20) {
  return json::parse(R"({"name":"small","sim":{"seed":4,"cycles":)" + std::to_string(cycles) +
                     R"(},"nodes":[{"count":4}],
      "workload":{"rate":3,"accounts":12,"initial_balance":1000000,"value_min":1,"value_max":1000}})");
}

json faulty_majority() {
  auto j = small(30);
  j["name"] = "faulty-majority";
  j["nodes"] = json::array({{{"count", 2}}, {{"count", 3}, {"fault", "tamper_segment"}}});
  return j;
}

std::vector<std::string> schema_errors(const json& j) {
  std::vector<std::string> errors;
  parse_config(j, errors);
  return errors;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PARAX_BINARY) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("every shipped preset validates") {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(PARAX_SCENARIOS)) {
    if (e.path().extension() != ".json" || e.path().filename() == "offer.json") continue;
    CHECK_NOTHROW(validate_config(e.path()));
    ++seen;
  }
  CHECK(seen >= 6);
}

TEST_CASE("schema violations list every bad key") {
  auto neg = small();
  neg["sim"]["cycles"] = -5;
  auto errs = schema_errors(neg);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("sim.cycles") != std::string::npos);

  auto unknown = small();
  unknown["foo"] = 1;
  unknown["net"]["bar"] = 2;
  errs = schema_errors(unknown);
  REQUIRE(errs.size() == 2);
  bool foo = false, bar = false;
  for (const auto& e : errs) {
    foo |= e.find("foo") != std::string::npos;
    bar |= e.find("net.bar") != std::string::npos;
  }
  CHECK(foo);
  CHECK(bar);

  const auto dir = scratch("schema");
  const auto path = write_json(dir, "bad.json", unknown);
  try {
    validate_config(path);
    FAIL("expected SchemaViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaViolation);
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
    CHECK(std::string(e.what()).find("net.bar") != std::string::npos);
  }
  try {
    validate_config(dir / "missing.json");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FileNotFound);
  }
}

TEST_CASE("config survives a to_json round trip") {
  std::vector<std::string> errors;
  const auto cfg = parse_config(small(), errors);
  REQUIRE(errors.empty());
  const auto again = parse_config(to_json(cfg), errors);
  REQUIRE(errors.empty());
  CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("same config and seed give byte-identical outputs") {
  std::vector<std::string> errors;
  const auto cfg = parse_config(small(), errors);
  const auto a = scratch("twice-a"), b = scratch("twice-b");
  REQUIRE(run_scenario(cfg, a).exit_code == 0);
  REQUIRE(run_scenario(cfg, b).exit_code == 0);
  for (const char* f : {"report.json", "blocks.bin", "economics.csv", "trace.log"}) CHECK(slurp(a / f) == slurp(b / f));
  auto other = cfg;
  other.seed += 1;
  const auto c = scratch("twice-c");
  run_scenario(other, c);
  CHECK(slurp(a / "blocks.bin") != slurp(c / "blocks.bin"));
}

TEST_CASE("zero workload finalizes nothing and audits clean") {
  auto j = small();
  j["workload"]["rate"] = 0;
  std::vector<std::string> errors;
  const auto out = run_scenario(parse_config(j, errors), scratch("idle"));
  CHECK(out.exit_code == 0);
  CHECK(out.report["chains"][0]["txs"]["finalized"] == 0);
  CHECK(out.audit.pass);
}

TEST_CASE("every finalized transaction carries three chained certificates") {
  std::vector<std::string> errors;
  ScenarioRun run(parse_config(small(), errors));
  run.run();
  std::size_t entries = 0;
  for (const auto& b : run.chain(0).blocks()) {
    CHECK(b.constructor_cert.stage == Stage::Constructor);
    CHECK(b.constructor_cert.subject == consensus::block_subject(b));
    CHECK(b.cert_root == consensus::compute_cert_root(b.entries));
    for (const auto& e : b.entries) {
      CHECK(e.initiator.stage == Stage::Initiator);
      CHECK(e.initiator.subject == pre_hash(e.tx));
      CHECK(e.tx.cert_id == e.initiator.cert_hash);
      CHECK(e.validator.stage == Stage::Validator);
      CHECK(e.validator.subject == validator_subject(e.initiator.cert_hash, hash_transaction(e.tx)));
      ++entries;
    }
  }
  CHECK(entries > 0);
  CHECK(entries == run.report(AuditResult{})["chains"][0]["txs"]["finalized"].get<std::size_t>());
}

TEST_CASE("a flipped byte in blocks.bin fails the audit at the block holding it") {
  std::vector<std::string> errors;
  const auto dir = scratch("flip");
  REQUIRE(run_scenario(parse_config(small(), errors), dir).exit_code == 0);
  auto bytes = slurp(dir / "blocks.bin");
  // every block's stored hash sits right before the next length prefix;
  // flipping the last byte of the final stored hash must point at the last block
  const auto clean = audit_blocks(Bytes(bytes.begin(), bytes.end()));
  REQUIRE(clean.pass);
  const auto last_height = clean.chains.at(0).blocks;
  REQUIRE(last_height > 0);
  bytes[bytes.size() - 32 - 1] ^= 0x01;
  const auto bad = audit_blocks(Bytes(bytes.begin(), bytes.end()));
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.first);
  REQUIRE(bad.first->height);
  CHECK(*bad.first->height == last_height);

  std::ofstream(dir / "blocks.bin", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  json summary;
  CHECK(audit_outputs(dir, summary) == 3);
  CHECK(summary["pass"] == false);
}

TEST_CASE("random byte flips never pass the audit") {
  std::vector<std::string> errors;
  const auto dir = scratch("flips");
  REQUIRE(run_scenario(parse_config(small(10), errors), dir).exit_code == 0);
  const auto bytes = slurp(dir / "blocks.bin");
  for (std::size_t i = 0; i < bytes.size(); i += 1 + bytes.size() / 300) {
    auto copy = bytes;
    copy[i] ^= 0x40;
    CHECK_FALSE(audit_blocks(Bytes(copy.begin(), copy.end())).pass);
  }
}

TEST_CASE("faulty-majority run fails the audit at the first tampered block") {
  std::vector<std::string> errors;
  const auto cfg = parse_config(faulty_majority(), errors);
  REQUIRE(errors.empty());
  ScenarioRun run(cfg);
  run.run();

  // first block whose committed root differs from re-applying its own contents
  std::optional<std::uint64_t> bad;
  auto state = run.chain(0).genesis();
  for (const auto& b : run.chain(0).blocks()) {
    for (const auto& e : b.entries) consensus::apply(state, e.tx, e.fee);
    state.pool += b.minted;
    state.supply += b.minted;
    for (const auto& p : b.payouts) {
      state.touch(p.to).balance += p.amount;
      state.pool -= p.amount;
    }
    if (state.root() != b.state_root) {
      bad = b.height;
      break;
    }
  }
  REQUIRE(bad);

  const auto out = run_scenario(cfg, scratch("faulty"));
  CHECK(out.exit_code == 3);
  REQUIRE(out.audit.first);
  CHECK(out.audit.first->height == bad);
  CHECK(out.report["audit"]["first_violation"]["height"] == *bad);
}

TEST_CASE("sweep and replicas write one directory per world") {
  auto j = small(6);
  j["sim"]["replicas"] = 2;
  j["sweep"] = json::parse(R"({"scale": [1, 2]})");
  std::vector<std::string> errors;
  const auto cfg = parse_config(j, errors);
  REQUIRE_MESSAGE(errors.empty(), (errors.empty() ? "" : errors.front()));
  const auto dir = scratch("sweep");
  CHECK(run_all(cfg, dir, 2) == 0);
  for (const char* s : {"scale-1", "scale-2"})
    for (const char* r : {"seed-4", "seed-5"}) CHECK(fs::exists(dir / s / r / "blocks.bin"));
  json summary;
  CHECK(audit_outputs(dir, summary) == 0);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["runs"].size() == 4);
}

}

TEST_SUITE("cli") {

TEST_CASE("exit codes: success, configuration errors, audit failure") {
  const auto dir = scratch("cli");
  const auto good = write_json(dir, "good.json", small(8));
  auto bad_json = small();
  bad_json["sim"]["cycles"] = -1;
  const auto bad = write_json(dir, "bad.json", bad_json);
  const auto faulty = write_json(dir, "faulty.json", faulty_majority());
  const auto log = dir / "log.txt";

  CHECK(run_cli("run --config " + good.string() + " --out " + (dir / "ok").string(), log) == 0);
  CHECK(run_cli("audit " + (dir / "ok").string(), log) == 0);
  CHECK(run_cli("run --config " + bad.string() + " --out " + (dir / "bad").string(), log) == 2);
  CHECK(slurp(log).find("sim.cycles") != std::string::npos);
  CHECK(run_cli("run --config " + (dir / "nope.json").string(), log) == 2);
  CHECK(run_cli("run", log) == 2);
  CHECK(run_cli("run --config " + faulty.string() + " --out " + (dir / "faulty").string(), log) == 3);
  CHECK(run_cli("audit " + (dir / "faulty").string(), log) == 3);
  CHECK(run_cli("audit " + (dir / "missing").string(), log) == 3);
}

TEST_CASE("seed precedence: flag over environment over file") {
  const auto dir = scratch("seed");
  const auto cfg = write_json(dir, "c.json", small(5));
  const auto log = dir / "log.txt";
  auto seed_of = [&](const fs::path& out) { return json::parse(slurp(out / "report.json"))["seed"].get<std::uint64_t>(); };
  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + (dir / "file").string(), log) == 0);
  CHECK(seed_of(dir / "file") == 4);
  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + (dir / "env").string(), log) == 0);
  ::setenv("PARAX_SEED", "17", 1);
  REQUIRE(run_cli("run --config " + cfg.string() + " --out " + (dir / "env").string(), log) == 0);
  CHECK(seed_of(dir / "env") == 17);
  REQUIRE(run_cli("run --config " + cfg.string() + " --seed 23 --out " + (dir / "flag").string(), log) == 0);
  CHECK(seed_of(dir / "flag") == 23);
  ::unsetenv("PARAX_SEED");
}

TEST_CASE("swap command publishes the shipped offer") {
  const auto dir = scratch("swapcli");
  const auto log = dir / "log.txt";
  const fs::path presets = PARAX_SCENARIOS;
  REQUIRE(run_cli("swap --offer " + (presets / "offer.json").string() + " --config " + (presets / "swap.json").string() +
                      " --out " + (dir / "out").string(),
                  log) == 0);
  const auto report = json::parse(slurp(dir / "out" / "report.json"));
  REQUIRE(report["swaps"].size() == 1);
  CHECK(report["swaps"][0]["phase"] == "Published");
}

}
