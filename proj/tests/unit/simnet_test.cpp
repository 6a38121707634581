#include <gtest/gtest.h>

#include <sstream>

#include "forensicross/simnet.hpp"
#include "helpers.hpp"

using namespace forensicross;

namespace {

Scenario routing(Design design, std::uint64_t k, std::uint64_t n_i = 3) {
  Scenario s;
  s.design = design;
  s.topology = minimal_params(k, design);
  if (n_i != 3) {
    s.topology.n_i = n_i;
    s.topology.n = 2 * n_i + 1 + (design == Design::Mesh ? (k - 1) * n_i : 0);
    s.topology.b_i = k * n_i;
    s.topology.m = 2 * s.topology.b_i + 1;
  }
  s.normalize();
  for (const auto& c : s.chains) s.users.push_back({"u" + c, c});
  return s;
}

WorkloadAction action(WorkloadAction::Kind kind, LogicalTime at, const ChainId& chain) {
  WorkloadAction a;
  a.kind = kind;
  a.at = at;
  a.chain = chain;
  a.user = "u" + chain;
  return a;
}

WorkloadAction route(LogicalTime at, const ChainId& from, std::vector<ChainId> to) {
  auto a = action(WorkloadAction::Kind::Route, at, from);
  a.destinations = std::move(to);
  a.data = "payload";
  return a;
}

WorkloadAction create(LogicalTime at, const ChainId& from, const std::string& case_number, std::vector<ChainId> to) {
  auto a = action(WorkloadAction::Kind::CreateCase, at, from);
  a.case_number = case_number;
  a.destinations = std::move(to);
  return a;
}

WorkloadAction propose(LogicalTime at, const ChainId& from, const std::string& case_number) {
  auto a = action(WorkloadAction::Kind::ProposeStage, at, from);
  a.case_number = case_number;
  return a;
}

FaultSpec compromise(const ChainId& chain, std::size_t node, const std::string& rule) {
  FaultSpec f;
  f.kind = FaultSpec::Kind::CompromiseMutualNode;
  f.chain = chain;
  f.node_index = node;
  f.rule = Corruption::parse(rule);
  return f;
}

std::string metrics_csv(const RunResult& r, Design d) {
  std::ostringstream out;
  write_metrics_csv(r, d, out);
  return out.str();
}

}  // namespace

TEST(Run, SameScenarioTwiceIsIdentical) {
  auto s = load_scenario(fxtest::scenario_path("lifecycle_3chain.yaml"));
  auto a = run(s);
  auto b = run(s);
  EXPECT_EQ(a.event_log, b.event_log);
  EXPECT_EQ(metrics_csv(a, s.design), metrics_csv(b, s.design));
  EXPECT_EQ(a.event_log_digest(), b.event_log_digest());
}

TEST(Run, SeedChangesKeysButNotOutcome) {
  auto s = load_scenario(fxtest::scenario_path("bridge_basic.yaml"));
  auto a = run(s);
  s.seed = 99;
  auto b = run(s);
  EXPECT_NE(a.event_log_digest(), b.event_log_digest());
  EXPECT_EQ(a.summary.ledger_validated, b.summary.ledger_validated);
}

TEST(Run, BridgePathTakesTwiceTheMeshPath) {
  for (auto design : {Design::Mesh, Design::Bridge}) {
    auto s = routing(design, 3);
    s.workload.push_back(route(1, "A", {"B"}));
    auto r = run(s);
    ASSERT_EQ(r.metrics.size(), 1u);
    const auto& m = r.metrics[0];
    EXPECT_TRUE(m.report.delivered);
    EXPECT_EQ(m.report.duration(), design == Design::Bridge ? 2u : 1u);
    EXPECT_EQ(m.report.verification_events(), design == Design::Bridge ? 2u : 1u);
  }
}

TEST(Run, DurationScalesWithLatencyButExcludesBlockTime) {
  auto s = routing(Design::Bridge, 2);
  s.link_latency = 3;
  s.block_time = 5;
  s.workload.push_back(route(1, "A", {"B"}));
  auto r = run(s);
  EXPECT_EQ(r.metrics[0].report.first_receipt, 5u);
  EXPECT_EQ(r.metrics[0].report.duration(), 6u);
}

TEST(RouteTransaction, HonestSingleDestinationHasTwoVerificationEvents) {
  Simulation sim(routing(Design::Bridge, 2));
  auto tx = make_transaction(sim.world().key("user/uA"), PayloadKind::InterchainEnvelope, to_bytes("x"), "A", {"B"});
  auto report = sim.route_transaction(tx);
  ASSERT_EQ(report.hops.size(), 2u);
  EXPECT_EQ(report.hops[0].chain, kBridgeChainId);
  EXPECT_EQ(report.hops[1].chain, "B");
  EXPECT_EQ(report.verification_events(), 2u);
  EXPECT_EQ(report.message_count(), 6u);
  EXPECT_TRUE(report.delivered);
}

TEST(Faults, MinorityCannotAndMajorityCanPushAMaliciousBody) {
  for (std::size_t bad = 0; bad <= 5; ++bad) {
    auto s = routing(Design::Bridge, 2, 5);
    for (std::size_t i = 0; i < bad; ++i) s.faults.push_back(compromise("A", i, "flip_body"));
    s.workload.push_back(route(1, "A", {"B"}));
    auto r = run(s);
    const auto& m = r.metrics.at(0);
    EXPECT_EQ(m.malicious_validated, bad >= 3) << bad << " compromised";
    EXPECT_EQ(m.report.hops.at(0).status, VerificationStatus::Validated) << bad;
  }
}

TEST(Faults, DivergentGarbleIsRejected) {
  auto s = routing(Design::Bridge, 2);
  s.faults.push_back(compromise("A", 0, "garble"));
  s.faults.push_back(compromise("A", 1, "garble"));
  s.workload.push_back(route(1, "A", {"B"}));
  auto r = run(s);
  EXPECT_EQ(r.metrics[0].status(), "rejected");
  EXPECT_EQ(r.summary.ledger_rejected, 1u);
}

TEST(Faults, OffchainTamperLeavesBlocksAlone) {
  auto s = load_scenario(fxtest::scenario_path("tamper_offchain.yaml"));
  auto clean = s;
  clean.faults.clear();
  auto a = run(s);
  auto b = run(clean);
  for (const auto& [id, chain] : a.world->chains) {
    EXPECT_EQ(chain.blocks(), b.world->chains.at(id).blocks()) << id;
    EXPECT_TRUE(validate_chain(chain).ok());
  }
  ASSERT_EQ(a.provenance.size(), 1u);
  EXPECT_EQ(a.provenance[0].report.find("B")->tampered_stages, std::vector<StageIndex>{0});
  EXPECT_TRUE(a.provenance[0].report.find("A")->intact);
  EXPECT_TRUE(b.provenance[0].report.all_intact());
}

TEST(Lifecycle, CaseFansOutToEveryDestination) {
  auto s = routing(Design::Bridge, 4);
  s.workload.push_back(create(1, "A", "C-1", {"B", "C", "D"}));
  auto r = run(s);
  const auto* m = r.find_metrics("A:0");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->report.hops.size(), 4u);
  EXPECT_TRUE(m->report.delivered);
  for (auto c : {"B", "C", "D"}) EXPECT_NE(r.world->contracts.at(c).find_case("C-1"), nullptr) << c;
  const auto* local = r.world->contracts.at("A").find_case("C-1");
  ASSERT_NE(local, nullptr);
  EXPECT_EQ(local->creator, r.world->key("user/uA").public_key);
}

TEST(Lifecycle, AccessesAtStageTwoLandInThatStageRecord) {
  auto s = routing(Design::Bridge, 2);
  s.policy.roles = AccessPolicy::default_roles();
  s.policy.grant("investigator", 2, Action::Upload);
  s.workload.push_back(create(1, "A", "C-1", {"B"}));
  auto dispatch = action(WorkloadAction::Kind::DispatchPolicy, 6, "A");
  dispatch.case_number = "C-1";
  s.workload.push_back(dispatch);
  s.workload.push_back(propose(10, "A", "C-1"));
  s.workload.push_back(propose(30, "A", "C-1"));
  for (LogicalTime t = 50; t < 55; ++t) {
    auto a = action(WorkloadAction::Kind::Access, t, "B");
    a.case_number = "C-1";
    a.role = t % 2 ? "investigator" : "analyst";
    a.action = Action::Upload;
    a.data = "item" + std::to_string(t);
    s.workload.push_back(a);
  }
  auto r = run(s);
  const auto& reg = *r.world->registry;
  EXPECT_EQ(reg.require_case("C-1").current_stage, 2u);
  const auto* rec = reg.find_record("C-1", "B", 2);
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->tx_hashes.size(), 5u);
  const auto& log = r.world->contracts.at("B").access_log();
  ASSERT_EQ(log.size(), 5u);
  EXPECT_EQ(log[0].decision, AccessDecision::Denied);
  EXPECT_EQ(log[1].decision, AccessDecision::Allowed);
}

TEST(Lifecycle, ScriptedThreeChainRunEndsIntactAndConsistent) {
  auto r = run(load_scenario(fxtest::scenario_path("lifecycle_3chain.yaml")));
  const auto& w = *r.world;
  const auto& c = w.registry->require_case("CASE-001");
  EXPECT_EQ(c.current_stage, 4u);
  EXPECT_EQ(c.rounds_started, 5u);
  ASSERT_EQ(r.provenance.size(), 1u);
  EXPECT_TRUE(r.provenance[0].report.all_intact());
  EXPECT_EQ(r.provenance[0].bundle.chains.size(), 3u);
  EXPECT_EQ(w.registry->denials().size(), 1u);
  const auto digest = c.role_matrix->digest();
  for (auto chain : {"A", "B", "C"}) {
    EXPECT_EQ(w.contracts.at(chain).find_case("CASE-001")->policy->digest(), digest) << chain;
    EXPECT_EQ(w.contracts.at(chain).find_case("CASE-001")->stage, 4u) << chain;
  }
  EXPECT_EQ(r.summary.contract_errors, 0u);
  for (const auto& [id, chain] : w.chains) EXPECT_TRUE(validate_chain(chain).ok()) << id;
}

TEST(Setup, RejectsInvalidTopologyAndDanglingReferences) {
  EXPECT_EQ(fxtest::code_of([] { Simulation sim(load_scenario(fxtest::scenario_path("invalid_ni2.yaml"))); }),
            Errc::InvalidTopology);
  auto s = routing(Design::Bridge, 2);
  s.workload.push_back(route(1, "A", {"Q"}));
  EXPECT_EQ(fxtest::code_of([&] { Simulation sim(s); }), Errc::WorkloadReferencesUnknownChain);
  auto mesh = routing(Design::Mesh, 2);
  mesh.workload.push_back(propose(1, "A", "C-1"));
  EXPECT_EQ(fxtest::code_of([&] { Simulation sim(mesh); }), Errc::InvalidArgument);
  auto wrong_k = routing(Design::Bridge, 2);
  wrong_k.chains.push_back("C");
  EXPECT_EQ(fxtest::code_of([&] { Simulation sim(wrong_k); }), Errc::InvalidArgument);
}

TEST(Compare, HopModelAndMutualNodeCounts) {
  auto rows = compare_designs(2, 5, Pattern::SingleDestination);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[1].mean_duration / rows[0].mean_duration, 2.0);
  EXPECT_EQ(rows[2].mutual_nodes, 9u);
  EXPECT_EQ(rows[3].mutual_nodes, 9u);
  EXPECT_EQ(rows[6].design, Design::Mesh);
  EXPECT_EQ(rows[6].mutual_nodes, 30u);
  EXPECT_EQ(rows[7].mutual_nodes, 15u);
  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "k,design,pattern,mean_duration,mean_messages,mean_verification_events,mutual_nodes,routed");
}

TEST(Export, MetricsAndSnapshot) {
  auto s = load_scenario(fxtest::scenario_path("bridge_basic.yaml"));
  auto r = run(s);
  auto csv = metrics_csv(r, s.design);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "tx_id,kind,source,destinations,design,receipt_tick,acceptance_tick,duration,verification_events,"
            "messages,status,malicious_validated");
  EXPECT_NE(csv.find("A:0,InterchainEnvelope,A,B,bridge,2,4,2,2,6,delivered,0"), std::string::npos) << csv;
  std::ostringstream snap;
  write_registry_snapshot(*r.world, snap);
  EXPECT_NE(snap.str().find("\"BB-1\""), std::string::npos);
}
