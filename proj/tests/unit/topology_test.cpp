#include <gtest/gtest.h>

#include <sstream>

#include "forensicross/topology.hpp"
#include "helpers.hpp"

using namespace forensicross;

namespace {

bool violates(const std::vector<TopologyViolation>& vs, const std::string& id) {
  for (const auto& v : vs) {
    if (v.constraint == id) return true;
  }
  return false;
}

std::uint64_t complete_graph_edges(std::uint64_t k) {
  std::uint64_t edges = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    for (std::uint64_t j = i + 1; j < k; ++j) ++edges;
  }
  return edges;
}

// Smallest bridge size hosting k disjoint sets of three that stay a strict
// minority of the bridge, each set below half the bridge.
std::uint64_t brute_force_m_min(std::uint64_t k) {
  for (std::uint64_t m = 1;; ++m) {
    const std::uint64_t b = 3 * k;
    if (b <= m && 2 * 3 < m && 2 * b < m) return m;
  }
}

}  // namespace

TEST(Validate, ReferenceBridgeDeploymentIsValid) {
  EXPECT_TRUE(validate_topology({3, 19, 11, 3, 9}, Design::Bridge).empty());
}

TEST(Validate, TwoMutualNodesAreTooFew) {
  auto vs = validate_topology({3, 19, 11, 2, 6}, Design::Bridge);
  EXPECT_TRUE(violates(vs, "bridge-mutual-bound"));
  EXPECT_TRUE(violates(vs, "chain-mutual-bound"));
}

TEST(Validate, SixOfElevenBreaksHalfAndOddness) {
  auto vs = validate_topology({3, 40, 11, 6, 18}, Design::Bridge);
  EXPECT_TRUE(violates(vs, "chain-mutual-bound"));
  EXPECT_TRUE(violates(vs, "odd-mutual-set"));
}

TEST(Validate, BridgeMutualNodesMustStayMinority) {
  EXPECT_TRUE(violates(validate_topology({3, 18, 11, 3, 9}, Design::Bridge), "bridge-minority"));
  EXPECT_TRUE(violates(validate_topology({3, 19, 11, 3, 6}, Design::Bridge), "disjoint-mutual-sets"));
}

TEST(Validate, MeshNeedsRoomForEveryPeerSet) {
  EXPECT_TRUE(validate_topology({4, 0, 9, 3, 0}, Design::Mesh).empty());
  EXPECT_TRUE(violates(validate_topology({5, 0, 11, 3, 0}, Design::Mesh), "disjoint-mutual-sets"));
}

TEST(Mesh, MutualNodeCounts) {
  EXPECT_EQ(mesh_mutual_nodes(3), 9u);
  EXPECT_EQ(mesh_mutual_nodes(1), 0u);
  EXPECT_EQ(mesh_mutual_nodes(6), 45u);
  for (std::uint64_t k = 1; k <= 12; ++k) EXPECT_EQ(mesh_mutual_nodes(k), 3 * complete_graph_edges(k)) << k;
  EXPECT_EQ(fxtest::code_of([] { mesh_mutual_nodes(0); }), Errc::InvalidArgument);
}

TEST(Bridge, Requirements) {
  EXPECT_EQ(bridge_requirements(3).m_min, 19u);
  EXPECT_EQ(bridge_requirements(3).b_min, 9u);
  EXPECT_EQ(bridge_requirements(1).m_min, 7u);
  EXPECT_EQ(bridge_requirements(1).b_min, 3u);
  EXPECT_EQ(bridge_requirements(10).m_min, 61u);
  EXPECT_EQ(bridge_requirements(10).b_min, 30u);
  for (std::uint64_t k = 1; k <= 12; ++k) EXPECT_EQ(bridge_requirements(k).m_min, brute_force_m_min(k)) << k;
}

TEST(Bridge, MinimalParamsValidate) {
  for (std::uint64_t k = 1; k <= 10; ++k) {
    EXPECT_TRUE(validate_topology(minimal_params(k, Design::Bridge), Design::Bridge).empty()) << k;
    EXPECT_TRUE(validate_topology(minimal_params(k, Design::Mesh), Design::Mesh).empty()) << k;
  }
}

TEST(Crossover, MeshCheaperBelowThreeTiedAtThree) {
  EXPECT_LT(mesh_mutual_nodes(2), bridge_mutual_nodes(2));
  EXPECT_EQ(mesh_mutual_nodes(3), bridge_mutual_nodes(3));
  EXPECT_GT(mesh_mutual_nodes(4), bridge_mutual_nodes(4));
  EXPECT_EQ(crossover_k(), 3u);
}

TEST(Hops, CountsPerPattern) {
  auto single = communication_counts(2, Pattern::SingleDestination);
  EXPECT_EQ(single.mesh_hops, 1u);
  EXPECT_EQ(single.bridge_hops, 2u);
  auto bc = communication_counts(4, Pattern::Broadcast);
  EXPECT_EQ(bc.mesh_hops, 3u);
  EXPECT_EQ(bc.bridge_hops, 4u);
  for (std::uint64_t k = 2; k <= 10; ++k) {
    auto h = communication_counts(k, Pattern::Broadcast);
    EXPECT_EQ(h.bridge_hops - h.mesh_hops, 1u);
  }
  EXPECT_EQ(fxtest::code_of([] { communication_counts(1, Pattern::Broadcast); }), Errc::InvalidArgument);
}

TEST(Table, RowsAreMonotoneAndCsvHasHeader) {
  auto rows = topology_table(2, 10);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[1].k, 3u);
  EXPECT_EQ(rows[1].mesh_mutual, 9u);
  EXPECT_EQ(rows[1].bridge_mutual, 9u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].mesh_mutual, rows[i - 1].mesh_mutual);
    EXPECT_GT(rows[i].bridge_mutual, rows[i - 1].bridge_mutual);
    EXPECT_GT(rows[i].mesh_hops_broadcast, rows[i - 1].mesh_hops_broadcast);
    EXPECT_GT(rows[i].bridge_hops_broadcast, rows[i - 1].bridge_hops_broadcast);
    EXPECT_GT(rows[i].m_min, rows[i - 1].m_min);
  }
  std::ostringstream csv;
  write_topology_csv(topology_table(3, 3), csv);
  EXPECT_EQ(csv.str(),
            "k,mesh_mutual,bridge_mutual,mesh_hops_broadcast,bridge_hops_broadcast,m_min,b_min\n3,9,9,2,3,19,9\n");
  EXPECT_EQ(fxtest::code_of([] { topology_table(5, 4); }), Errc::InvalidArgument);
}

TEST(Design, Names) {
  EXPECT_EQ(design_from_string("mesh"), Design::Mesh);
  EXPECT_EQ(to_string(Design::Bridge), "bridge");
  EXPECT_EQ(fxtest::code_of([] { design_from_string("star"); }), Errc::InvalidArgument);
}
