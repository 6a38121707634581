#include "forensicross/provenance.hpp"

#include <algorithm>
#include <sstream>

namespace forensicross {

Digest stage_leaf(std::span<const Digest> tx_hashes) {
  Bytes concat;
  concat.reserve(tx_hashes.size() * Digest::kSize);
  for (const auto& d : tx_hashes) concat.insert(concat.end(), d.bytes.begin(), d.bytes.end());
  const Digest inner = hash(concat);
  return hash(inner.view());
}

Digest case_chain_root(std::span<const Digest> stage_leaves, std::uint32_t stage_count) {
  if (stage_leaves.size() != stage_count) {
    throw Error(Errc::StageCountMismatch, "expected " + std::to_string(stage_count) + " stage leaves, got " +
                                              std::to_string(stage_leaves.size()));
  }
  return merkle_root(stage_leaves);
}

void OffchainCaseStore::append(const std::string& case_number, StageIndex stage, Transaction tx) {
  cases_[case_number][stage].push_back(std::move(tx));
}

const std::vector<Transaction>& OffchainCaseStore::stage_transactions(const std::string& case_number,
                                                                      StageIndex stage) const {
  static const std::vector<Transaction> kEmpty;
  auto c = cases_.find(case_number);
  if (c == cases_.end()) return kEmpty;
  auto s = c->second.find(stage);
  return s == c->second.end() ? kEmpty : s->second;
}

bool OffchainCaseStore::has_case(const std::string& case_number) const { return cases_.contains(case_number); }

Transaction& OffchainCaseStore::mutable_transaction(const std::string& case_number, StageIndex stage,
                                                    std::size_t tx_index) {
  auto c = cases_.find(case_number);
  if (c != cases_.end()) {
    auto s = c->second.find(stage);
    if (s != c->second.end() && tx_index < s->second.size()) return s->second[tx_index];
  }
  throw Error(Errc::InvalidArgument, "no stored transaction at " + chain_id_ + ":" + std::to_string(stage) + ":" +
                                         std::to_string(tx_index) + " for " + case_number);
}

void OffchainCaseStore::tamper(const std::string& case_number, StageIndex stage, std::size_t tx_index) {
  auto& tx = mutable_transaction(case_number, stage, tx_index);
  if (tx.body.empty()) tx.body.push_back(0x00);
  tx.body.back() ^= 0x01;
}

ChainSection collect_section(const OffchainCaseStore& store, const std::string& case_number,
                             std::uint32_t stage_count) {
  ChainSection section;
  section.chain_id = store.chain_id();
  for (StageIndex s = 0; s < stage_count; ++s) {
    section.stages.push_back(store.stage_transactions(case_number, s));
    std::vector<Digest> hashes;
    for (const auto& tx : section.stages.back()) hashes.push_back(tx_digest(tx));
    section.stage_leaves.push_back(stage_leaf(hashes));
  }
  section.root = case_chain_root(section.stage_leaves, stage_count);
  return section;
}

ProvenanceBundle assemble_bundle(const BridgeRegistry& registry, const std::string& case_number,
                                 std::vector<ChainSection> sections, const PublicKey& recipient) {
  const auto& c = registry.require_case(case_number);
  ProvenanceBundle bundle;
  bundle.case_number = case_number;
  bundle.stage_count = registry.stage_count();
  bundle.chains = std::move(sections);
  for (const auto& chain : c.participants()) {
    bundle.bridge.push_back({chain, registry.stage_leaves(case_number, chain), registry.chain_root(case_number, chain)});
  }
  bundle.sealed_for = recipient;
  return bundle;
}

ProvenanceBundle extract_provenance(BridgeRegistry& registry, const std::map<ChainId, OffchainCaseStore>& stores,
                                    const std::string& case_number, const PublicKey& requester, LogicalTime now) {
  const auto& c = registry.require_case(case_number);
  if (!c.query_nodes.contains(requester)) {
    registry.record_denial(case_number, requester, now);
    throw Error(Errc::NotQueryNode, "requester is not a query node of " + case_number);
  }
  std::vector<ChainSection> sections;
  for (const auto& chain : c.participants()) {
    auto it = stores.find(chain);
    if (it == stores.end()) {
      sections.push_back(collect_section(OffchainCaseStore(chain), case_number, registry.stage_count()));
    } else {
      sections.push_back(collect_section(it->second, case_number, registry.stage_count()));
    }
  }
  return assemble_bundle(registry, case_number, std::move(sections), requester);
}

bool TamperReport::all_intact() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const ChainVerdict& v) { return v.intact; });
}

const ChainVerdict* TamperReport::find(const ChainId& chain) const {
  auto it = std::find_if(verdicts.begin(), verdicts.end(), [&](const ChainVerdict& v) { return v.chain_id == chain; });
  return it == verdicts.end() ? nullptr : &*it;
}

TamperReport verify_and_localize(const ProvenanceBundle& bundle) {
  TamperReport report;
  report.case_number = bundle.case_number;
  report.stage_count = bundle.stage_count;
  for (const auto& section : bundle.chains) {
    auto ref = std::find_if(bundle.bridge.begin(), bundle.bridge.end(),
                            [&](const BridgeReference& r) { return r.chain_id == section.chain_id; });
    if (ref == bundle.bridge.end()) {
      throw Error(Errc::MalformedBundle, "no bridge reference for chain " + section.chain_id);
    }
    if (section.stages.size() != bundle.stage_count || ref->stage_leaves.size() != bundle.stage_count) {
      throw Error(Errc::MalformedBundle, "stage count mismatch for chain " + section.chain_id);
    }
    // Recompute from the transactions themselves; the section's own leaves
    // are not trusted.
    std::vector<Digest> leaves;
    for (const auto& stage_txs : section.stages) {
      std::vector<Digest> hashes;
      for (const auto& tx : stage_txs) hashes.push_back(tx_digest(tx));
      leaves.push_back(stage_leaf(hashes));
    }
    ChainVerdict verdict{section.chain_id, true, {}};
    if (case_chain_root(leaves, bundle.stage_count) != ref->root) {
      verdict.intact = false;
      for (StageIndex s = 0; s < bundle.stage_count; ++s) {
        if (leaves[s] != ref->stage_leaves[s]) verdict.tampered_stages.push_back(s);
      }
    }
    report.verdicts.push_back(std::move(verdict));
  }
  return report;
}

std::string render_tamper_matrix(const TamperReport& report, const std::vector<std::string>& stage_names) {
  std::ostringstream out;
  std::size_t label_width = 5;
  for (StageIndex s = 0; s < report.stage_count; ++s) {
    std::string label = s < stage_names.size() ? stage_names[s] : "stage " + std::to_string(s);
    label_width = std::max(label_width, label.size() + 4);
  }
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  out << pad("stage", label_width);
  for (const auto& v : report.verdicts) out << ' ' << pad(v.chain_id, 9);
  out << '\n';
  for (StageIndex s = 0; s < report.stage_count; ++s) {
    std::string label = std::to_string(s) + " " + (s < stage_names.size() ? stage_names[s] : "");
    out << pad(label, label_width);
    for (const auto& v : report.verdicts) {
      bool hit = std::find(v.tampered_stages.begin(), v.tampered_stages.end(), s) != v.tampered_stages.end();
      out << ' ' << pad(hit ? "TAMPERED" : "ok", 9);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace forensicross
