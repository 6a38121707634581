#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "forensicross/chain.hpp"
#include "forensicross/lifecycle.hpp"

namespace forensicross {

struct Vote {
  bool approve = true;
  std::string reason;

  static Vote Approve() { return {true, {}}; }
  static Vote Reject(std::string reason) { return {false, std::move(reason)}; }
  bool operator==(const Vote&) const = default;
};

/// One proposal round for moving a case to `target_stage`.
struct StageRound {
  StageIndex target_stage = 0;
  std::uint32_t round = 0;
  ChainId proposer;
  std::map<ChainId, Vote> votes;
};

struct CaseContract {
  std::string case_number;
  ChainId source_chain;
  std::vector<ChainId> destination_chains;
  PublicKey creator_public_key;
  StageIndex current_stage = 0;
  std::set<PublicKey> query_nodes;
  /// Final vote vector of the latest closed round per target stage.
  std::map<StageIndex, std::map<ChainId, Vote>> stage_votes;
  std::optional<StageRound> open_round;
  std::uint32_t rounds_started = 0;
  std::optional<AccessPolicy> role_matrix;

  std::vector<ChainId> participants() const;
  bool participates(const ChainId& chain) const;
};

struct StageHashRecord {
  std::string case_number;
  ChainId chain_id;
  StageIndex stage = 0;
  Digest stage_leaf;
  std::vector<Digest> tx_hashes;  // arrival order
};

struct StageOutcome {
  enum class Kind { Advanced, AwaitingVotes, Blocked };
  Kind kind = Kind::AwaitingVotes;
  StageIndex stage = 0;
  std::vector<std::string> reasons;  // Blocked only
  ChainId proposer;                  // recipient of the issue notice when Blocked
};
std::string_view to_string(StageOutcome::Kind kind) noexcept;

struct ProvenanceDenial {
  std::string case_number;
  PublicKey requester;
  LogicalTime logical_time = 0;
};

/// Bridge-side case registry. A single state machine mutated only by
/// majority-validated envelopes.
class BridgeRegistry {
 public:
  explicit BridgeRegistry(std::uint32_t stage_count);

  std::uint32_t stage_count() const { return stage_count_; }

  /// Throws DuplicateCase, NoDestinations. The fan-out list is the
  /// contract's destination chains.
  const CaseContract& register_case(const std::string& case_number, const ChainId& source,
                                    const std::vector<ChainId>& destinations, const PublicKey& creator);
  const CaseContract& register_case(const Transaction& validated_case_create);

  /// Throws UnknownCase, NonParticipant, FutureStage.
  const StageHashRecord& record_stage_hash(const std::string& case_number, const ChainId& chain, StageIndex stage,
                                           const Digest& tx_hash);

  /// Throws UnknownCase, NonParticipant.
  const CaseContract& assign_query_nodes(const std::string& case_number, const ChainId& chain,
                                         const std::vector<PublicKey>& keys);

  /// Throws UnknownCase, NotCaseSource, MalformedPolicy.
  const CaseContract& store_policy(const std::string& case_number, const ChainId& chain, const AccessPolicy& policy);

  /// Opens a proposal round. Throws UnknownCase, NonParticipant,
  /// StaleStage (target != current + 1), ProposalOpen.
  const StageRound& propose_stage(const std::string& case_number, const ChainId& proposer, StageIndex target);

  /// Every participant (source and destinations) votes once per round.
  /// Throws UnknownCase, NonParticipant, StaleStage, DoubleVote.
  StageOutcome process_stage_vote(const std::string& case_number, const ChainId& chain, StageIndex stage,
                                  const Vote& vote);

  bool is_query_node(const std::string& case_number, const PublicKey& key) const;
  void record_denial(const std::string& case_number, const PublicKey& requester, LogicalTime now);

  const CaseContract* find_case(const std::string& case_number) const;
  const CaseContract& require_case(const std::string& case_number) const;
  const std::map<std::string, CaseContract>& cases() const { return cases_; }

  /// Stage leaves for a chain, one per configured stage (empty stages use
  /// the empty-stage leaf), and the stored per-chain Merkle root.
  std::vector<Digest> stage_leaves(const std::string& case_number, const ChainId& chain) const;
  Digest chain_root(const std::string& case_number, const ChainId& chain) const;
  const StageHashRecord* find_record(const std::string& case_number, const ChainId& chain, StageIndex stage) const;
  const std::map<std::tuple<std::string, ChainId, StageIndex>, StageHashRecord>& stage_records() const {
    return records_;
  }
  const std::vector<ProvenanceDenial>& denials() const { return denials_; }

 private:
  CaseContract& mutable_case(const std::string& case_number);

  std::uint32_t stage_count_;
  std::map<std::string, CaseContract> cases_;
  std::map<std::tuple<std::string, ChainId, StageIndex>, StageHashRecord> records_;
  std::map<std::pair<std::string, ChainId>, Digest> roots_;
  std::vector<ProvenanceDenial> denials_;
};

}  // namespace forensicross
