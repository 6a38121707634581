#include "forensicross/topology.hpp"

#include <algorithm>
#include <ostream>

#include "forensicross/error.hpp"

namespace forensicross {

std::string_view to_string(Design design) noexcept { return design == Design::Mesh ? "mesh" : "bridge"; }

Design design_from_string(std::string_view name) {
  if (name == "mesh") return Design::Mesh;
  if (name == "bridge") return Design::Bridge;
  throw Error(Errc::InvalidArgument, "design must be 'mesh' or 'bridge', got '" + std::string(name) + "'");
}

std::string_view to_string(Pattern pattern) noexcept {
  return pattern == Pattern::Broadcast ? "broadcast" : "single-destination";
}

std::vector<TopologyViolation> validate_topology(const TopologyParams& p, Design design) {
  std::vector<TopologyViolation> out;
  auto fail = [&](std::string eq, std::string detail) { out.push_back({std::move(eq), std::move(detail)}); };
  auto s = [](std::uint64_t v) { return std::to_string(v); };

  if (p.k < 1) fail("chain-count", "at least one blockchain is required");
  // 2 < n_i < n/2, compared as 2*n_i < n to stay in integers.
  if (p.n_i <= 2 || 2 * p.n_i >= p.n) fail("chain-mutual-bound", "need 2 < n_i < n/2, got n_i=" + s(p.n_i) + " n=" + s(p.n));
  if (p.n_i % 2 == 0) fail("odd-mutual-set", "n_i must be odd, got " + s(p.n_i));

  if (design == Design::Bridge) {
    if (p.n_i <= 2 || 2 * p.n_i >= p.m) fail("bridge-mutual-bound", "need 2 < n_i < m/2, got n_i=" + s(p.n_i) + " m=" + s(p.m));
    if (p.k >= 1) {
      if (p.b_i != p.k * p.n_i || p.b_i > p.m) {
        fail("disjoint-mutual-sets", "disjoint mutual sets need b_i = k*n_i = " + s(p.k * p.n_i) + " <= m, got b_i=" + s(p.b_i));
      }
      const auto per_chain = p.b_i / p.k;
      if (per_chain <= 2 || 2 * per_chain > std::min(p.n, p.m)) {
        fail("per-chain-share", "need 2 < b_i/k <= min(n/2, m/2), got b_i/k=" + s(per_chain));
      }
      if (p.b_i < 3 * p.k) fail("bridge-mutual-minimum", "need b_i >= 3k = " + s(3 * p.k) + ", got " + s(p.b_i));
    }
    if (2 * p.b_i >= p.m) fail("bridge-minority", "bridge mutual nodes must be a minority: need m > 2*b_i, got m=" + s(p.m));
  } else if (p.k >= 1 && (p.k - 1) * p.n_i > p.n) {
    fail("disjoint-mutual-sets", "each chain hosts (k-1)*n_i = " + s((p.k - 1) * p.n_i) + " disjoint mutual nodes but n=" + s(p.n));
  }
  return out;
}

std::uint64_t mesh_mutual_nodes(std::uint64_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
  return k * (k - 1) * 3 / 2;
}

BridgeRequirements bridge_requirements(std::uint64_t k) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
  return {6 * k + 1, 3 * k};
}

std::uint64_t bridge_mutual_nodes(std::uint64_t k) { return bridge_requirements(k).b_min; }

std::uint64_t crossover_k() {
  std::uint64_t k = 1;
  while (bridge_mutual_nodes(k) > mesh_mutual_nodes(k)) ++k;
  return k;
}

HopCounts communication_counts(std::uint64_t k, Pattern pattern) {
  if (k < 2) throw Error(Errc::InvalidArgument, "communication needs at least two blockchains");
  const std::uint64_t destinations = pattern == Pattern::Broadcast ? k - 1 : 1;
  return {destinations, 1 + destinations};
}

TopologyParams minimal_params(std::uint64_t k, Design design) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
  TopologyParams p;
  p.k = k;
  p.n_i = 3;
  if (design == Design::Bridge) {
    auto req = bridge_requirements(k);
    p.m = req.m_min;
    p.b_i = req.b_min;
    p.n = 7;
  } else {
    p.n = std::max<std::uint64_t>(7, (k - 1) * 3);
  }
  return p;
}

std::vector<TopologyRow> topology_table(std::uint64_t k_min, std::uint64_t k_max) {
  if (k_min < 1 || k_min > k_max) {
    throw Error(Errc::InvalidArgument, "need 1 <= k_min <= k_max, got " + std::to_string(k_min) + ".." +
                                           std::to_string(k_max));
  }
  std::vector<TopologyRow> rows;
  for (auto k = k_min; k <= k_max; ++k) {
    TopologyRow row;
    row.k = k;
    row.mesh_mutual = mesh_mutual_nodes(k);
    row.bridge_mutual = bridge_mutual_nodes(k);
    if (k >= 2) {
      auto hops = communication_counts(k, Pattern::Broadcast);
      row.mesh_hops_broadcast = hops.mesh_hops;
      row.bridge_hops_broadcast = hops.bridge_hops;
    }
    auto req = bridge_requirements(k);
    row.m_min = req.m_min;
    row.b_min = req.b_min;
    rows.push_back(row);
  }
  return rows;
}

void write_topology_csv(const std::vector<TopologyRow>& rows, std::ostream& out) {
  out << "k,mesh_mutual,bridge_mutual,mesh_hops_broadcast,bridge_hops_broadcast,m_min,b_min\n";
  for (const auto& r : rows) {
    out << r.k << ',' << r.mesh_mutual << ',' << r.bridge_mutual << ',' << r.mesh_hops_broadcast << ','
        << r.bridge_hops_broadcast << ',' << r.m_min << ',' << r.b_min << '\n';
  }
}

}  // namespace forensicross
