#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace forensicross {

enum class Design { Mesh, Bridge };
std::string_view to_string(Design design) noexcept;
Design design_from_string(std::string_view name);

/// Sizing symbols for a collaboration of k organization chains.
struct TopologyParams {
  std::uint64_t k = 0;    // organization chains
  std::uint64_t m = 0;    // bridge chain nodes
  std::uint64_t n = 0;    // nodes per organization chain
  std::uint64_t n_i = 0;  // mutual nodes per chain (per peer pair in the mesh design)
  std::uint64_t b_i = 0;  // mutual nodes on the bridge side, summed over chains

  bool operator==(const TopologyParams&) const = default;
};

struct TopologyViolation {
  std::string constraint;  // short id, e.g. "bridge-mutual-bound"
  std::string detail;
};

/// Every violated sizing constraint for the chosen design.
///   Both:   k >= 1 (chain-count), 2 < n_i < n/2 (chain-mutual-bound),
///           n_i odd (odd-mutual-set).
///   Bridge: 2 < n_i < m/2 (bridge-mutual-bound); b_i == k*n_i and
///           b_i <= m (disjoint-mutual-sets); 2 < b_i/k <= min(n/2, m/2)
///           (per-chain-share); 2*b_i < m (bridge-minority); b_i >= 3k
///           (bridge-mutual-minimum).
///   Mesh:   (k-1)*n_i <= n (disjoint-mutual-sets, one set per peer).
std::vector<TopologyViolation> validate_topology(const TopologyParams& p, Design design);

/// k(k-1)*3/2: three mutual nodes on every edge of the complete graph.
std::uint64_t mesh_mutual_nodes(std::uint64_t k);

struct BridgeRequirements {
  std::uint64_t m_min = 0;
  std::uint64_t b_min = 0;
  bool operator==(const BridgeRequirements&) const = default;
};
/// (6k + 1, 3k).
BridgeRequirements bridge_requirements(std::uint64_t k);
std::uint64_t bridge_mutual_nodes(std::uint64_t k);

/// Smallest k at which the bridge needs no more mutual nodes than the mesh.
std::uint64_t crossover_k();

enum class Pattern { SingleDestination, Broadcast };
std::string_view to_string(Pattern pattern) noexcept;

struct HopCounts {
  std::uint64_t mesh_hops = 0;
  std::uint64_t bridge_hops = 0;
  bool operator==(const HopCounts&) const = default;
};
/// Inter-chain verification hops for one cross-chain message.
HopCounts communication_counts(std::uint64_t k, Pattern pattern);

/// Smallest parameters satisfying every constraint of `design` with
/// three mutual nodes per set.
TopologyParams minimal_params(std::uint64_t k, Design design);

struct TopologyRow {
  std::uint64_t k = 0;
  std::uint64_t mesh_mutual = 0;
  std::uint64_t bridge_mutual = 0;
  std::uint64_t mesh_hops_broadcast = 0;
  std::uint64_t bridge_hops_broadcast = 0;
  std::uint64_t m_min = 0;
  std::uint64_t b_min = 0;
};

/// Throws InvalidArgument unless 1 <= k_min <= k_max. Hop columns are 0
/// for k = 1 (no peer to talk to).
std::vector<TopologyRow> topology_table(std::uint64_t k_min, std::uint64_t k_max);
void write_topology_csv(const std::vector<TopologyRow>& rows, std::ostream& out);

}  // namespace forensicross
