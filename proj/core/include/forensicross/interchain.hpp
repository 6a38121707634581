#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forensicross/chain.hpp"

namespace forensicross {

using NodeId = std::string;

/// How a compromised mutual node rewrites what it translates. FlipBody and
/// Redirect are deterministic, so colluding nodes emit identical bodies;
/// Garble is node-specific.
struct Corruption {
  enum class Kind { FlipBody, Redirect, Garble };
  Kind kind = Kind::FlipBody;
  ChainId redirect_to;  // Redirect only

  static Corruption parse(std::string_view rule);  // "flip_body" | "redirect:<chain>" | "garble"
  std::string str() const;
  bool operator==(const Corruption&) const = default;
};

struct MutualNode {
  NodeId id;
  KeyPair keys;
  std::optional<Corruption> compromise;
};

/// Nodes that sit on both an organization chain and its peer (the bridge,
/// or in the mesh design another organization chain).
struct MutualNodeSet {
  ChainId chain_id;
  ChainId peer_chain = kBridgeChainId;
  std::vector<MutualNode> members;

  std::size_t size() const { return members.size(); }
  const MutualNode* find(const NodeId& id) const;
  MutualNode* find(const NodeId& id);
};

/// Checks size > 2, odd size, size < m/2 (when m > 0), size < n/2, and
/// pairwise disjointness of node ids across sets. Returns readable violations.
std::vector<std::string> mutual_set_violations(const std::vector<MutualNodeSet>& sets, std::uint64_t m,
                                               std::uint64_t n);

enum class EnvelopePurpose : std::uint8_t { Relay = 1, StageHash = 2 };
std::string_view to_string(EnvelopePurpose purpose) noexcept;

/// What mutual nodes translate: an origin transaction (or a record already
/// validated at a previous hop) in the standardized canonical format.
struct RelayRecord {
  EnvelopePurpose purpose = EnvelopePurpose::Relay;
  std::string origin_tx_id;
  ChainId origin_chain;
  std::vector<ChainId> destination_chains;
  Bytes canonical_body;
};

/// Canonical format: the origin transaction's full length-prefixed encoding.
Bytes canonical_body(const Transaction& origin);
Transaction decode_canonical_body(ByteView body);
RelayRecord relay_record(const Transaction& origin, EnvelopePurpose purpose = EnvelopePurpose::Relay);

struct TranslatedEnvelope {
  EnvelopePurpose purpose = EnvelopePurpose::Relay;
  std::string origin_tx_id;
  ChainId origin_chain;
  std::vector<ChainId> destination_chains;
  ChainId target_chain;  // chain whose communication contract verifies it
  Bytes canonical_body;
  NodeId translator_node;
  Signature translator_signature;
};

Bytes envelope_signing_payload(const TranslatedEnvelope& env);

/// Throws NotMutualNode when `node_id` is not a member of `set`.
TranslatedEnvelope translate(const RelayRecord& record, const NodeId& node_id, const MutualNodeSet& set,
                             const ChainId& target_chain);
inline TranslatedEnvelope translate(const Transaction& tx, const NodeId& node_id, const MutualNodeSet& set,
                                    const ChainId& target_chain) {
  return translate(relay_record(tx), node_id, set, target_chain);
}

enum class VerificationStatus { Pending, Validated, Rejected, Expired };
std::string_view to_string(VerificationStatus status) noexcept;

struct LedgerKey {
  EnvelopePurpose purpose = EnvelopePurpose::Relay;
  std::string origin_tx_id;
  ChainId target_chain;
  auto operator<=>(const LedgerKey&) const = default;
};

struct LedgerEntry {
  std::size_t expected = 0;
  std::map<NodeId, TranslatedEnvelope> submissions;
  VerificationStatus status = VerificationStatus::Pending;
  std::optional<Bytes> validated_body;
  std::size_t ignored_duplicates = 0;
  std::size_t late_submissions = 0;
};

/// Strict-majority verdict over distinct-node submissions:
/// Validated iff some body appears in more than expected/2 submissions;
/// Rejected iff no body (seen or not) can still reach that count;
/// Pending otherwise.
VerificationStatus verify_translations(const LedgerEntry& entry);
/// The body with the highest submission count (ties broken by byte order).
std::optional<std::pair<Bytes, std::size_t>> modal_body(const LedgerEntry& entry);

/// Per-contract tally of translated envelopes. Owned by the bridge or a
/// destination communication contract.
class VerificationLedger {
 public:
  struct SubmitOutcome {
    VerificationStatus status = VerificationStatus::Pending;
    bool counted = false;
    bool newly_decided = false;  // this submission moved the entry out of Pending
    std::optional<Errc> error;   // NotMutualNode, InvalidSignature, DuplicateSubmission
  };

  SubmitOutcome submit(const TranslatedEnvelope& env, const MutualNodeSet& set);
  /// Moves a Pending entry to Expired. Returns false if it was already final.
  bool expire(const LedgerKey& key);

  const LedgerEntry* find(const LedgerKey& key) const;
  const std::map<LedgerKey, LedgerEntry>& entries() const { return entries_; }

 private:
  std::map<LedgerKey, LedgerEntry> entries_;
};

/// One row per hop of a routed transaction.
struct HopRecord {
  std::string tx_id;
  std::uint32_t hop = 0;
  ChainId chain;
  LogicalTime logical_time = 0;
  std::size_t message_count = 0;
  VerificationStatus status = VerificationStatus::Pending;
};

struct DeliveryReport {
  std::string tx_id;
  std::vector<HopRecord> hops;
  bool delivered = false;        // every destination accepted
  bool stalled = false;          // some hop still pending at timeout
  bool rejected = false;
  LogicalTime first_receipt = 0;  // mutual nodes saw the mined source tx
  LogicalTime last_acceptance = 0;
  std::size_t verification_events() const;
  std::size_t message_count() const;
  LogicalTime duration() const { return last_acceptance - first_receipt; }
};

}  // namespace forensicross
