#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forensicross/simnet.hpp"

namespace fs = std::filesystem;
using namespace forensicross;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kTampered = 3;

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::uint64_t k_min = 2;
  std::uint64_t k_max = 10;
  std::string pattern = "single";
  std::vector<std::string> tamper;
};

std::optional<fs::path> output_dir(const Options& o) {
  if (const char* env = std::getenv("FORENSICROSS_OUT"); env != nullptr && *env != '\0') return fs::path(env);
  if (!o.out.empty()) return fs::path(o.out);
  return std::nullopt;
}

Scenario load(const Options& o) {
  auto sc = load_scenario(o.scenario);
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  return f;
}

int cmd_run(const Options& o) {
  auto sc = load(o);
  auto result = run(sc);
  const auto dir = output_dir(o).value_or(fs::path("out"));
  fs::create_directories(dir);
  open_out(dir / "events.jsonl") << result.event_log_text();
  auto metrics = open_out(dir / "metrics.csv");
  write_metrics_csv(result, sc.design, metrics);
  auto snapshot = open_out(dir / "registry.json");
  write_registry_snapshot(*result.world, snapshot);

  const auto& s = result.summary;
  std::cout << "scenario " << sc.name << " (" << to_string(sc.design) << ", seed " << sc.seed << ")\n"
            << "  events            " << result.event_log.size() << '\n'
            << "  routed            " << result.metrics.size() << '\n'
            << "  blocks mined      " << s.blocks_mined << '\n'
            << "  envelopes sent    " << s.envelopes_sent << '\n'
            << "  validated         " << s.ledger_validated << '\n'
            << "  rejected          " << s.ledger_rejected << '\n'
            << "  expired           " << s.ledger_expired << '\n'
            << "  malicious passed  " << s.malicious_validated << '\n'
            << "  contract errors   " << s.contract_errors << '\n'
            << "  provenance        " << result.provenance.size() << " delivered, " << s.provenance_denials
            << " denied\n"
            << "  output            " << dir.string() << '\n';
  return kOk;
}

void emit_table(const std::string& csv, const Options& o, const std::string& file) {
  std::string text = csv;
  if (o.format == "structured-text") {
    // header names become keys: one "key=value ..." line per row
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> keys;
    std::istringstream hs(header);
    for (std::string k; std::getline(hs, k, ',');) keys.push_back(k);
    std::ostringstream out;
    for (std::string line; std::getline(in, line);) {
      std::istringstream ls(line);
      std::size_t i = 0;
      for (std::string v; std::getline(ls, v, ','); ++i) out << (i ? " " : "") << keys.at(i) << '=' << v;
      out << '\n';
    }
    text = out.str();
  }
  if (auto dir = output_dir(o)) {
    fs::create_directories(*dir);
    open_out(*dir / file) << text;
  } else {
    std::cout << text;
  }
}

int cmd_topology(const Options& o) {
  std::ostringstream csv;
  write_topology_csv(topology_table(o.k_min, o.k_max), csv);
  emit_table(csv.str(), o, o.format == "csv" ? "topology.csv" : "topology.txt");
  return kOk;
}

int cmd_compare(const Options& o) {
  const auto pattern = o.pattern == "broadcast" ? Pattern::Broadcast : Pattern::SingleDestination;
  std::ostringstream csv;
  write_comparison_csv(compare_designs(o.k_min, o.k_max, pattern), csv);
  emit_table(csv.str(), o, o.format == "csv" ? "compare.csv" : "compare.txt");
  return kOk;
}

struct TamperSpec {
  ChainId chain;
  StageIndex stage = 0;
  std::size_t tx_index = 0;
};

TamperSpec parse_tamper(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw CLI::ValidationError("--tamper", "expected chain:stage:txindex, got " + text);
  try {
    return {text.substr(0, a), static_cast<StageIndex>(std::stoul(text.substr(a + 1, b - a - 1))),
            static_cast<std::size_t>(std::stoul(text.substr(b + 1)))};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--tamper", "expected chain:stage:txindex, got " + text);
  }
}

std::string bundle_text(const ProvenanceBundle& bundle, const std::vector<std::string>& stage_names) {
  std::ostringstream out;
  out << "case " << bundle.case_number << "\nsealed_for " << bundle.sealed_for.hex() << '\n';
  for (std::size_t i = 0; i < bundle.chains.size(); ++i) {
    const auto& c = bundle.chains[i];
    out << "chain " << c.chain_id << " root " << c.root.hex() << " bridge_root " << bundle.bridge[i].root.hex()
        << '\n';
    for (std::size_t s = 0; s < c.stages.size(); ++s) {
      out << "  stage " << s << ' ' << (s < stage_names.size() ? stage_names[s] : "") << " leaf "
          << c.stage_leaves[s].hex() << '\n';
      for (const auto& tx : c.stages[s]) {
        out << "    " << tx.tx_id << ' ' << to_string(tx.payload_kind) << ' ' << tx_digest(tx).hex() << '\n';
      }
    }
  }
  return out.str();
}

int cmd_provenance_demo(const Options& o) {
  std::vector<TamperSpec> tampers;
  for (const auto& t : o.tamper) tampers.push_back(parse_tamper(t));

  Simulation sim(load(o));
  sim.run_until_idle();
  auto& world = sim.mutable_world();
  if (!world.registry || world.registry->cases().empty()) {
    throw Error(Errc::NoCasesInScenario, sim.scenario().name + " registers no case on the bridge");
  }
  const auto& case_number = world.registry->cases().begin()->first;
  for (const auto& t : tampers) {
    auto it = world.stores.find(t.chain);
    if (it == world.stores.end()) throw Error(Errc::InvalidArgument, "--tamper names unknown chain " + t.chain);
    it->second.tamper(case_number, t.stage, t.tx_index);
  }
  std::vector<ChainSection> sections;
  for (const auto& p : world.registry->require_case(case_number).participants()) {
    sections.push_back(collect_section(world.stores.at(p), case_number, world.stage_count));
  }
  auto bundle = assemble_bundle(*world.registry, case_number, std::move(sections), PublicKey{});
  auto report = verify_and_localize(bundle);

  std::string text;
  if (o.format == "csv") {
    std::ostringstream csv;
    csv << "case,chain,stage,status\n";
    for (const auto& v : report.verdicts) {
      for (StageIndex s = 0; s < report.stage_count; ++s) {
        const bool hit = std::find(v.tampered_stages.begin(), v.tampered_stages.end(), s) != v.tampered_stages.end();
        csv << case_number << ',' << v.chain_id << ',' << s << ',' << (hit ? "tampered" : "intact") << '\n';
      }
    }
    text = csv.str();
  } else {
    text = "case " + case_number + '\n' + render_tamper_matrix(report, world.stage_names);
  }
  std::cout << text;
  if (auto dir = output_dir(o)) {
    fs::create_directories(*dir);
    open_out(*dir / (o.format == "csv" ? "tamper_report.csv" : "tamper_report.txt")) << text;
    open_out(*dir / "bundle.txt") << bundle_text(bundle, world.stage_names);
  }
  return report.all_intact() ? kOk : kTampered;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-chain forensic case collaboration: simulator and tools", "forensicross"};
  app.require_subcommand(1);
  Options o;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write events.jsonl, metrics.csv, registry.json");
  run_cmd->add_option("--scenario", o.scenario, "Scenario YAML file")->required();
  run_cmd->add_option("--out", o.out, "Output directory (default ./out)");
  run_cmd->add_option("--seed", o.seed, "Override the scenario seed");

  auto* topo_cmd = app.add_subcommand("topology", "Mutual-node and hop-count table per k");
  topo_cmd->add_option("--k-min", o.k_min, "Smallest chain count")->capture_default_str();
  topo_cmd->add_option("--k-max", o.k_max, "Largest chain count")->capture_default_str();
  topo_cmd->add_option("--format", o.format)->check(CLI::IsMember({"csv", "structured-text"}))->capture_default_str();
  topo_cmd->add_option("--out", o.out, "Write the table to this directory instead of stdout");

  auto* cmp_cmd = app.add_subcommand("compare", "Simulated mesh vs bridge durations per k");
  cmp_cmd->add_option("--k-min", o.k_min)->capture_default_str();
  cmp_cmd->add_option("--k-max", o.k_max)->capture_default_str();
  cmp_cmd->add_option("--pattern", o.pattern)->check(CLI::IsMember({"single", "broadcast"}))->capture_default_str();
  cmp_cmd->add_option("--format", o.format)->check(CLI::IsMember({"csv", "structured-text"}))->capture_default_str();
  cmp_cmd->add_option("--seed", o.seed);
  cmp_cmd->add_option("--out", o.out);

  auto* prov_cmd = app.add_subcommand("provenance-demo", "Run a scenario, tamper off-chain copies, localize");
  prov_cmd->add_option("--scenario", o.scenario, "Scenario YAML file")->required();
  prov_cmd->add_option("--tamper", o.tamper, "chain:stage:txindex, repeatable");
  prov_cmd->add_option("--format", o.format)
      ->check(CLI::IsMember({"csv", "structured-text"}))
      ->default_str("structured-text");
  prov_cmd->add_option("--seed", o.seed);
  prov_cmd->add_option("--out", o.out);

  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (prov_cmd->parsed() && prov_cmd->count("--format") == 0) o.format = "structured-text";

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (topo_cmd->parsed()) return cmd_topology(o);
    if (cmp_cmd->parsed()) return cmd_compare(o);
    if (prov_cmd->parsed()) return cmd_provenance_demo(o);
    std::cout << "forensicross " << kVersion << '\n';
    return kOk;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == Errc::InvalidArgument && (topo_cmd->parsed() || cmp_cmd->parsed())) return kUsage;
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
