#include <gtest/gtest.h>

#include <algorithm>

#include "forensicross/simnet.hpp"
#include "helpers.hpp"

using namespace forensicross;

namespace {

std::string error_text(const std::string& yaml) {
  try {
    parse_scenario(yaml);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << yaml;
  return {};
}

}  // namespace

TEST(Scenario, MinimalFileGetsDefaults) {
  auto s = parse_scenario("topology: {k: 3, m: 19, n: 7, n_i: 3}\n");
  EXPECT_EQ(s.design, Design::Bridge);
  EXPECT_EQ(s.chains, (std::vector<ChainId>{"A", "B", "C"}));
  EXPECT_EQ(s.topology.b_i, 9u);
  EXPECT_EQ(s.stage_count, 5u);
  EXPECT_EQ(s.stage_names, Scenario::default_stage_names());
  EXPECT_EQ(s.link_latency, 1u);
  EXPECT_EQ(s.policy.roles, AccessPolicy::default_roles());
}

TEST(Scenario, FullWorkloadParses) {
  auto s = load_scenario(fxtest::scenario_path("lifecycle_3chain.yaml"));
  EXPECT_EQ(s.name, "lifecycle_3chain");
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.users.size(), 3u);
  EXPECT_EQ(s.workload.front().kind, WorkloadAction::Kind::CreateCase);
  std::size_t accesses = 0;
  for (const auto& a : s.workload) accesses += a.kind == WorkloadAction::Kind::Access;
  EXPECT_EQ(accesses, 20u);
  auto it = std::find_if(s.workload.begin(), s.workload.end(), [](const WorkloadAction& a) { return !a.votes.empty(); });
  ASSERT_NE(it, s.workload.end());
  const auto& blocked = *it;
  ASSERT_EQ(blocked.kind, WorkloadAction::Kind::ProposeStage);
  ASSERT_TRUE(blocked.votes.contains("C"));
  EXPECT_FALSE(blocked.votes.at("C").approve);
  EXPECT_EQ(blocked.votes.at("C").reason, "chain of custody gap on phone-dump-01");
  EXPECT_EQ(check_access(s.policy, "analyst", 2, Action::Read), AccessDecision::Allowed);
}

TEST(Scenario, FaultsParse) {
  auto s = load_scenario(fxtest::scenario_path("fault_majority.yaml"));
  ASSERT_EQ(s.faults.size(), 2u);
  EXPECT_EQ(s.faults[1].node_index, 1u);
  EXPECT_EQ(s.faults[1].rule.kind, Corruption::Kind::Redirect);
  EXPECT_EQ(s.faults[1].rule.redirect_to, "C");
}

TEST(Scenario, UnknownKeyIsReportedWithLine) {
  auto msg = error_text("name: x\ntopology: {k: 2, m: 13, n: 7, n_i: 3}\nlatency: 4\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("latency"), std::string::npos) << msg;
}

TEST(Scenario, MissingTopologyIsAnError) {
  EXPECT_NE(error_text("name: x\n").find("topology"), std::string::npos);
}

TEST(Scenario, SyntaxErrorCarriesLine) {
  auto msg = error_text("name: x\ntopology: {k: 2\nusers: [\n");
  EXPECT_NE(msg.find("line "), std::string::npos) << msg;
}

TEST(Scenario, BadValuesPointAtTheirLine) {
  auto msg = error_text(
      "topology: {k: 2, m: 13, n: 7, n_i: 3}\n"
      "workload:\n"
      "  - {at: 1, action: teleport, chain: A}\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = error_text(
      "topology: {k: 2, m: 13, n: 7, n_i: 3}\n"
      "workload:\n"
      "  - {at: soon, action: route, chain: A}\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = error_text(
      "topology: {k: 2, m: 13, n: 7, n_i: 3}\n"
      "design: star\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Scenario, CaseActionsNeedACase) {
  auto msg = error_text(
      "topology: {k: 2, m: 13, n: 7, n_i: 3}\n"
      "workload:\n"
      "  - {at: 1, action: dispatch_policy, chain: A, user: u}\n");
  EXPECT_NE(msg.find("needs 'case'"), std::string::npos) << msg;
}

TEST(Scenario, MissingFile) {
  EXPECT_EQ(fxtest::code_of([] { load_scenario("/nonexistent/scenario.yaml"); }), Errc::FileNotFound);
}
