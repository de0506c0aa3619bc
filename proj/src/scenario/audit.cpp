#include "parax/scenario/audit.hpp"

#include <fstream>
#include <iterator>

#include "parax/consensus/chain.hpp"
#include "parax/ledger/error.hpp"

namespace parax::scenario {

Bytes encode_blocks_file(const std::string& config_json, const std::vector<ChainRecord>& chains) {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kBlocksMagic), sizeof kBlocksMagic));
  w.u32(kBlocksVersion).str(config_json).u32(static_cast<std::uint32_t>(chains.size()));
  for (const auto& c : chains) {
    w.str(c.label).u64(c.constructor_quorum).raw(c.custody.key.bytes);
    ByteWriter g;
    consensus::encode_state(g, c.genesis);
    w.bytes(g.data());
    w.u64(c.blocks.size());
    for (const auto& b : c.blocks) {
      ByteWriter bw;
      consensus::encode_block(bw, b);
      w.bytes(bw.data()).raw(consensus::block_hash(b).bytes);
    }
  }
  const auto sum = digest(w.data());
  w.raw(sum.bytes);
  return std::move(w).take();
}

namespace {

Amount custody_delta(const consensus::Block& b, const AccountId& custody, Amount before, bool& ok) {
  Amount bal = before;
  for (const auto& e : b.entries) {
    const auto p = decode_settlement(e.tx.payload);
    if (!p) {
      if (e.tx.to == custody) bal += e.tx.value;
      continue;
    }
    if (p->kind == PayloadKind::SwapLock && e.tx.to == custody) bal += e.tx.value;
    if ((p->kind == PayloadKind::SwapRelease || p->kind == PayloadKind::SwapRefund) && e.tx.sender == custody) {
      if (bal < e.tx.value + e.fee) ok = false;
      else bal -= e.tx.value + e.fee;
    }
  }
  return bal;
}

}  // namespace

AuditResult audit_blocks(ByteView file) {
  AuditResult result;
  auto fail = [&](std::string chain, std::optional<std::uint64_t> height, std::optional<std::uint64_t> cycle,
                  std::string error) {
    result.pass = false;
    result.first = Violation{std::move(chain), height, cycle, std::move(error)};
    return result;
  };

  if (file.size() < sizeof kBlocksMagic + 32) return fail("", std::nullopt, std::nullopt, "file truncated");
  const auto body = file.first(file.size() - 32);
  ByteReader r(body);
  std::string label;
  try {
    const auto magic = r.raw(sizeof kBlocksMagic);
    if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(kBlocksMagic))) {
      return fail("", std::nullopt, std::nullopt, "bad magic");
    }
    if (r.u32() != kBlocksVersion) return fail("", std::nullopt, std::nullopt, "unsupported version");
    r.str();
    const auto chain_count = r.u32();
    for (std::uint32_t ci = 0; ci < chain_count; ++ci) {
      label = r.str();
      const auto quorum = r.u64();
      AccountId custody{Digest{r.fixed<32>()}};
      const auto genesis_bytes = r.bytes();
      ByteReader gr(genesis_bytes);
      const auto genesis = consensus::decode_state(gr);
      gr.expect_done();

      ChainAudit ca;
      ca.label = label;
      ca.genesis_supply = genesis.supply;
      if (!genesis.conserved()) return fail(label, std::nullopt, std::nullopt, "genesis not conserved");

      auto state = genesis;
      Amount custody_bal = genesis.balance(custody);
      Digest prev = consensus::genesis_hash(label, genesis);
      std::uint64_t last_cycle = 0;
      const auto count = r.u64();
      for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t h = i + 1;  // genesis is height 0
        consensus::Block b;
        Digest stored;
        try {
          const auto block_bytes = r.bytes();
          stored = Digest{r.fixed<32>()};
          ByteReader br(block_bytes);
          b = consensus::decode_block(br);
          br.expect_done();
        } catch (const Error& e) {
          return fail(label, h, std::nullopt, e.what());
        }
        if (b.height != h) return fail(label, h, b.cycle, "height field " + std::to_string(b.height));
        if (b.prev_hash != prev) return fail(label, h, b.cycle, "prev_hash does not link");
        if (i > 0 && b.cycle <= last_cycle) return fail(label, h, b.cycle, "cycle not increasing");
        if (consensus::block_hash(b) != stored) return fail(label, h, b.cycle, "stored block hash mismatch");
        try {
          state = consensus::replay_block(state, b, quorum);
        } catch (const Error& e) {
          return fail(label, h, b.cycle, e.what());
        }
        ca.minted += b.minted;
        if (state.total_balances() + state.pool != ca.genesis_supply + ca.minted || state.supply != ca.genesis_supply + ca.minted) {
          return fail(label, h, b.cycle, "conservation: balances + pool != supply + minted");
        }
        bool custody_ok = true;
        custody_bal = custody_delta(b, custody, custody_bal, custody_ok);
        if (!custody_ok || custody_bal != state.balance(custody)) {
          return fail(label, h, b.cycle, "custody balance disagrees with settlement entries");
        }
        prev = stored;
        last_cycle = b.cycle;
        ++ca.blocks;
      }
      ca.final_hash = prev;
      ca.custody_balance = custody_bal;
      result.chains.push_back(ca);
      label.clear();
    }
    r.expect_done();
  } catch (const Error& e) {
    return fail(label, std::nullopt, std::nullopt, e.what());
  }
  Digest trailer;
  std::copy(file.end() - 32, file.end(), trailer.bytes.begin());
  if (digest(body) != trailer) return fail("", std::nullopt, std::nullopt, "file checksum mismatch");
  return result;
}

AuditResult audit_directory(const std::filesystem::path& dir) {
  std::ifstream in(dir / "blocks.bin", std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, (dir / "blocks.bin").string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return audit_blocks(data);
}

nlohmann::json to_json(const AuditResult& a) {
  nlohmann::json j;
  j["pass"] = a.pass;
  if (a.first) {
    const auto& v = *a.first;
    j["first_violation"] = {{"chain", v.chain},
                            {"height", v.height ? nlohmann::json(*v.height) : nlohmann::json(nullptr)},
                            {"cycle", v.cycle ? nlohmann::json(*v.cycle) : nlohmann::json(nullptr)},
                            {"error", v.error}};
  } else {
    j["first_violation"] = nullptr;
  }
  j["chains"] = nlohmann::json::array();
  for (const auto& c : a.chains) {
    j["chains"].push_back({{"label", c.label},
                           {"blocks", c.blocks},
                           {"final_block_hash", c.final_hash.hex()},
                           {"genesis_supply", c.genesis_supply},
                           {"minted", c.minted},
                           {"custody_balance", c.custody_balance}});
  }
  return j;
}

}  // namespace parax::scenario
