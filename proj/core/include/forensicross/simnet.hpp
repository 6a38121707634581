#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forensicross/chain.hpp"
#include "forensicross/interchain.hpp"
#include "forensicross/lifecycle.hpp"
#include "forensicross/provenance.hpp"
#include "forensicross/registry.hpp"
#include "forensicross/topology.hpp"

namespace forensicross {

struct UserSpec {
  std::string name;
  ChainId chain;
};

struct LinkLatency {
  ChainId from;
  ChainId to;
  LogicalTime ticks = 1;
};

struct WorkloadAction {
  enum class Kind { Route, CreateCase, DispatchPolicy, AssignQueryNodes, ProposeStage, Access, ProvenanceRequest };
  Kind kind = Kind::Route;
  LogicalTime at = 0;
  ChainId chain;  // acting chain
  std::string user;
  std::string case_number;
  std::vector<ChainId> destinations;      // Route, CreateCase
  std::vector<std::string> query_nodes;   // AssignQueryNodes
  std::string query_node;                 // ProvenanceRequest
  Role role;                              // Access, ProposeStage (optional)
  Action action = Action::Read;           // Access
  std::string data;                       // Access payload / Route body
  std::optional<StageIndex> target_stage; // ProposeStage, defaults to local stage + 1
  std::map<ChainId, Vote> votes;          // ProposeStage; absent chains approve
};
std::string_view to_string(WorkloadAction::Kind kind) noexcept;

struct FaultSpec {
  enum class Kind { CompromiseMutualNode, TamperOffchain };
  Kind kind = Kind::CompromiseMutualNode;
  LogicalTime at = 0;
  ChainId chain;
  ChainId peer = kBridgeChainId;  // mesh edge peer for CompromiseMutualNode
  std::size_t node_index = 0;
  Corruption rule;
  std::string case_number;
  StageIndex stage = 0;
  std::size_t tx_index = 0;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Design design = Design::Bridge;
  TopologyParams topology;
  std::vector<ChainId> chains;  // organization chains; defaults to A, B, C, ...
  std::uint32_t stage_count = 5;
  std::vector<std::string> stage_names;
  LogicalTime block_time = 1;
  std::map<ChainId, LogicalTime> block_times;
  LogicalTime link_latency = 1;
  std::vector<LinkLatency> link_overrides;
  LogicalTime pending_timeout = 50;
  LogicalTime max_tick = 1'000'000;
  std::vector<UserSpec> users;
  AccessPolicy policy;
  std::vector<WorkloadAction> workload;
  std::vector<FaultSpec> faults;

  static std::vector<std::string> default_stage_names();
  /// Fills defaults (chain names, stage names) in place.
  void normalize();
};

/// Parses the YAML scenario format. Throws ParseError (with line number),
/// InvalidArgument for bad values.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Per routed transaction. Duration runs from the tick the mutual nodes
/// receive the mined source transaction to the last destination acceptance.
struct TxMetrics {
  std::string tx_id;
  PayloadKind kind = PayloadKind::InterchainEnvelope;
  ChainId source;
  std::vector<ChainId> destinations;  // acceptance points (bridge for bridge-bound messages)
  DeliveryReport report;
  std::map<ChainId, LogicalTime> accepted_at;
  bool malicious_validated = false;
  std::string status() const;  // delivered | rejected | stalled | pending
};

struct ScenarioSummary {
  std::size_t envelopes_sent = 0;
  std::size_t envelopes_delivered = 0;
  std::size_t channel_messages = 0;  // off-chain provenance transfers
  std::size_t ledger_validated = 0;
  std::size_t ledger_rejected = 0;
  std::size_t ledger_expired = 0;
  std::size_t malicious_validated = 0;
  std::size_t contract_errors = 0;
  std::size_t blocks_mined = 0;
  std::size_t access_attempts = 0;
  std::size_t provenance_denials = 0;
};

struct ProvenanceOutcome {
  std::string case_number;
  PublicKey requester;
  LogicalTime delivered_at = 0;
  ProvenanceBundle bundle;
  TamperReport report;
};

/// All protocol state of one simulated deployment.
struct World {
  Design design = Design::Bridge;
  std::uint32_t stage_count = 5;
  std::vector<std::string> stage_names;
  std::vector<ChainId> org_chains;
  std::map<ChainId, Chain> chains;  // organization chains plus the bridge (bridge design)
  std::map<ChainId, OrgContract> contracts;
  std::map<ChainId, OffchainCaseStore> stores;
  std::map<ChainId, VerificationLedger> ledgers;
  std::map<std::string, MutualNodeSet> mutual_sets;  // key: chain (bridge) or "a|b" (mesh)
  std::optional<BridgeRegistry> registry;
  std::map<std::string, KeyPair> keys;  // identity name -> key pair
  std::map<PublicKey, std::string> key_names;

  const KeyPair& key(const std::string& name) const;
  /// Mutual set connecting `chain` to `peer` (the bridge, or another chain in the mesh).
  const MutualNodeSet& mutual_set(const ChainId& chain, const ChainId& peer) const;
  std::string mutual_set_key(const ChainId& chain, const ChainId& peer) const;
  bool is_org_chain(const ChainId& chain) const;
};

struct RunResult {
  std::vector<std::string> event_log;  // JSON lines
  std::vector<TxMetrics> metrics;      // in routing order
  ScenarioSummary summary;
  std::vector<ProvenanceOutcome> provenance;
  std::shared_ptr<const World> world;

  std::string event_log_text() const;
  Digest event_log_digest() const;
  const TxMetrics* find_metrics(const std::string& tx_id) const;
};

/// Deterministic discrete-event simulator. Events at the same tick run in
/// scheduling order; time is logical ticks.
class Simulation {
 public:
  /// Throws InvalidTopology, WorkloadReferencesUnknownChain, InvalidArgument.
  explicit Simulation(Scenario scenario);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Processes events until the queue drains or max_tick passes.
  void run_until_idle();
  /// Submits `tx` (signed, untagged) to its source chain now, runs to
  /// quiescence and returns the delivery report of that transaction.
  DeliveryReport route_transaction(const Transaction& tx);

  LogicalTime now() const;
  const World& world() const;
  World& mutable_world();
  const Scenario& scenario() const;

  /// Moves the accumulated log, metrics and world out.
  RunResult finish();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs a scenario to completion.
RunResult run(const Scenario& scenario);

struct DesignComparisonRow {
  std::uint64_t k = 0;
  Design design = Design::Bridge;
  Pattern pattern = Pattern::SingleDestination;
  double mean_duration = 0;
  double mean_messages = 0;
  double mean_verification_events = 0;
  std::uint64_t mutual_nodes = 0;
  std::size_t routed = 0;
};

/// For each k, runs one case creation per source chain under both designs
/// and averages duration, envelope count and verification hops.
std::vector<DesignComparisonRow> compare_designs(std::uint64_t k_min, std::uint64_t k_max, Pattern pattern,
                                                 LogicalTime link_latency = 1, std::uint64_t seed = 1);
void write_comparison_csv(const std::vector<DesignComparisonRow>& rows, std::ostream& out);

void write_metrics_csv(const RunResult& result, Design design, std::ostream& out);
void write_registry_snapshot(const World& world, std::ostream& out);

}  // namespace forensicross
