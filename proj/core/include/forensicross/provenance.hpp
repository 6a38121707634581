#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forensicross/chain.hpp"
#include "forensicross/lifecycle.hpp"
#include "forensicross/registry.hpp"

namespace forensicross {

/// hash(hash(tx_1 || tx_2 || ... || tx_n)) over the ordered transaction
/// digests of one stage. An empty stage yields hash(hash("")).
Digest stage_leaf(std::span<const Digest> tx_hashes);

/// Merkle root over one chain's stage leaves. Throws StageCountMismatch
/// when the leaf count differs from `stage_count`.
Digest case_chain_root(std::span<const Digest> stage_leaves, std::uint32_t stage_count);

/// Per-chain off-chain copy of every case transaction, grouped by stage in
/// mining order.
class OffchainCaseStore {
 public:
  explicit OffchainCaseStore(ChainId chain_id) : chain_id_(std::move(chain_id)) {}

  const ChainId& chain_id() const { return chain_id_; }

  void append(const std::string& case_number, StageIndex stage, Transaction tx);
  const std::vector<Transaction>& stage_transactions(const std::string& case_number, StageIndex stage) const;
  bool has_case(const std::string& case_number) const;

  /// Flips one bit of the stored transaction's body. Throws InvalidArgument
  /// when the position does not exist.
  void tamper(const std::string& case_number, StageIndex stage, std::size_t tx_index);
  Transaction& mutable_transaction(const std::string& case_number, StageIndex stage, std::size_t tx_index);

  const std::map<std::string, std::map<StageIndex, std::vector<Transaction>>>& contents() const { return cases_; }

 private:
  ChainId chain_id_;
  std::map<std::string, std::map<StageIndex, std::vector<Transaction>>> cases_;
};

/// A chain's contribution to a provenance bundle: full per-stage
/// transactions plus the leaves and root recomputed from them.
struct ChainSection {
  ChainId chain_id;
  std::vector<std::vector<Transaction>> stages;
  std::vector<Digest> stage_leaves;
  Digest root;
};

/// The bridge's reference values for one chain.
struct BridgeReference {
  ChainId chain_id;
  std::vector<Digest> stage_leaves;
  Digest root;
};

/// Payload sealed for a query node. Real encryption is out of scope; the
/// envelope records the recipient key next to the plaintext sections.
struct ProvenanceBundle {
  std::string case_number;
  std::uint32_t stage_count = 0;
  std::vector<ChainSection> chains;
  std::vector<BridgeReference> bridge;
  PublicKey sealed_for;
};

ChainSection collect_section(const OffchainCaseStore& store, const std::string& case_number,
                             std::uint32_t stage_count);
/// Appends the bridge references for every participating chain.
ProvenanceBundle assemble_bundle(const BridgeRegistry& registry, const std::string& case_number,
                                 std::vector<ChainSection> sections, const PublicKey& recipient);

/// Gate plus fan-out in one call: throws UnknownCase, or NotQueryNode after
/// logging the denial in the registry.
ProvenanceBundle extract_provenance(BridgeRegistry& registry, const std::map<ChainId, OffchainCaseStore>& stores,
                                    const std::string& case_number, const PublicKey& requester, LogicalTime now);

struct ChainVerdict {
  ChainId chain_id;
  bool intact = true;
  std::vector<StageIndex> tampered_stages;
};

struct TamperReport {
  std::string case_number;
  std::uint32_t stage_count = 0;
  std::vector<ChainVerdict> verdicts;

  bool all_intact() const;
  const ChainVerdict* find(const ChainId& chain) const;
};

/// Recomputes each chain's root from the bundled transactions and compares
/// it with the bridge root; on mismatch, compares stage by stage. Throws
/// MalformedBundle if a chain section has no bridge reference.
TamperReport verify_and_localize(const ProvenanceBundle& bundle);

/// Stage x chain matrix, one row per stage.
std::string render_tamper_matrix(const TamperReport& report, const std::vector<std::string>& stage_names = {});

}  // namespace forensicross
