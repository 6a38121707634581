#include "forensicross/registry.hpp"

#include <algorithm>

#include "forensicross/provenance.hpp"

namespace forensicross {

std::string_view to_string(StageOutcome::Kind kind) noexcept {
  switch (kind) {
    case StageOutcome::Kind::Advanced: return "Advanced";
    case StageOutcome::Kind::AwaitingVotes: return "AwaitingVotes";
    case StageOutcome::Kind::Blocked: return "Blocked";
  }
  return "?";
}

std::vector<ChainId> CaseContract::participants() const {
  std::vector<ChainId> out{source_chain};
  for (const auto& d : destination_chains) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  return out;
}

bool CaseContract::participates(const ChainId& chain) const {
  return chain == source_chain ||
         std::find(destination_chains.begin(), destination_chains.end(), chain) != destination_chains.end();
}

BridgeRegistry::BridgeRegistry(std::uint32_t stage_count) : stage_count_(stage_count) {
  if (stage_count == 0) throw Error(Errc::InvalidArgument, "stage count must be positive");
}

const CaseContract& BridgeRegistry::register_case(const std::string& case_number, const ChainId& source,
                                                  const std::vector<ChainId>& destinations,
                                                  const PublicKey& creator) {
  if (cases_.contains(case_number)) throw Error(Errc::DuplicateCase, case_number);
  if (destinations.empty()) throw Error(Errc::NoDestinations, case_number);
  CaseContract c;
  c.case_number = case_number;
  c.source_chain = source;
  c.destination_chains = destinations;
  c.creator_public_key = creator;
  auto& stored = cases_.emplace(case_number, std::move(c)).first->second;
  const std::vector<Digest> empty_leaves(stage_count_, stage_leaf({}));
  for (const auto& chain : stored.participants()) {
    roots_[{case_number, chain}] = case_chain_root(empty_leaves, stage_count_);
  }
  return stored;
}

const CaseContract& BridgeRegistry::register_case(const Transaction& validated_case_create) {
  if (validated_case_create.payload_kind != PayloadKind::CaseCreate) {
    throw Error(Errc::InvalidArgument, "register_case expects a CaseCreate transaction");
  }
  auto body = CaseCreateBody::decode(validated_case_create.body);
  return register_case(body.case_number, validated_case_create.source_chain, body.destinations,
                       validated_case_create.sender_public_key);
}

CaseContract& BridgeRegistry::mutable_case(const std::string& case_number) {
  auto it = cases_.find(case_number);
  if (it == cases_.end()) throw Error(Errc::UnknownCase, case_number);
  return it->second;
}

const CaseContract& BridgeRegistry::require_case(const std::string& case_number) const {
  auto it = cases_.find(case_number);
  if (it == cases_.end()) throw Error(Errc::UnknownCase, case_number);
  return it->second;
}

const CaseContract* BridgeRegistry::find_case(const std::string& case_number) const {
  auto it = cases_.find(case_number);
  return it == cases_.end() ? nullptr : &it->second;
}

const StageHashRecord& BridgeRegistry::record_stage_hash(const std::string& case_number, const ChainId& chain,
                                                         StageIndex stage, const Digest& tx_hash) {
  const auto& c = require_case(case_number);
  if (!c.participates(chain)) throw Error(Errc::NonParticipant, chain + " is not part of " + case_number);
  if (stage > c.current_stage || stage >= stage_count_) {
    throw Error(Errc::FutureStage, "stage " + std::to_string(stage) + " is ahead of case " + case_number);
  }
  auto& rec = records_[{case_number, chain, stage}];
  rec.case_number = case_number;
  rec.chain_id = chain;
  rec.stage = stage;
  rec.tx_hashes.push_back(tx_hash);
  rec.stage_leaf = stage_leaf(rec.tx_hashes);
  roots_[{case_number, chain}] = case_chain_root(stage_leaves(case_number, chain), stage_count_);
  return rec;
}

const CaseContract& BridgeRegistry::assign_query_nodes(const std::string& case_number, const ChainId& chain,
                                                       const std::vector<PublicKey>& keys) {
  auto& c = mutable_case(case_number);
  if (!c.participates(chain)) throw Error(Errc::NonParticipant, chain + " is not part of " + case_number);
  c.query_nodes.insert(keys.begin(), keys.end());
  return c;
}

const CaseContract& BridgeRegistry::store_policy(const std::string& case_number, const ChainId& chain,
                                                 const AccessPolicy& policy) {
  auto& c = mutable_case(case_number);
  if (chain != c.source_chain) throw Error(Errc::NotCaseSource, chain + " did not create " + case_number);
  policy.validate();
  c.role_matrix = policy;
  return c;
}

const StageRound& BridgeRegistry::propose_stage(const std::string& case_number, const ChainId& proposer,
                                                StageIndex target) {
  auto& c = mutable_case(case_number);
  if (!c.participates(proposer)) throw Error(Errc::NonParticipant, proposer + " is not part of " + case_number);
  if (target != c.current_stage + 1 || target >= stage_count_) {
    throw Error(Errc::StaleStage, "case " + case_number + " is at stage " + std::to_string(c.current_stage));
  }
  if (c.open_round) throw Error(Errc::ProposalOpen, "case " + case_number + " already has an open proposal");
  c.open_round = StageRound{target, ++c.rounds_started, proposer, {}};
  return *c.open_round;
}

StageOutcome BridgeRegistry::process_stage_vote(const std::string& case_number, const ChainId& chain,
                                                StageIndex stage, const Vote& vote) {
  auto& c = mutable_case(case_number);
  if (!c.participates(chain)) throw Error(Errc::NonParticipant, chain + " is not part of " + case_number);
  if (!c.open_round || c.open_round->target_stage != stage) {
    throw Error(Errc::StaleStage, "no open proposal for stage " + std::to_string(stage) + " of " + case_number);
  }
  auto& round = *c.open_round;
  if (!round.votes.emplace(chain, vote).second) {
    throw Error(Errc::DoubleVote, chain + " already voted on stage " + std::to_string(stage));
  }

  StageOutcome outcome;
  outcome.stage = stage;
  outcome.proposer = round.proposer;
  const auto participants = c.participants();
  if (round.votes.size() < participants.size()) return outcome;

  for (const auto& [voter, v] : round.votes) {
    if (!v.approve) outcome.reasons.push_back(voter + ": " + v.reason);
  }
  outcome.kind = outcome.reasons.empty() ? StageOutcome::Kind::Advanced : StageOutcome::Kind::Blocked;
  if (outcome.kind == StageOutcome::Kind::Advanced) c.current_stage = stage;
  c.stage_votes[stage] = std::move(round.votes);
  c.open_round.reset();
  return outcome;
}

bool BridgeRegistry::is_query_node(const std::string& case_number, const PublicKey& key) const {
  return require_case(case_number).query_nodes.contains(key);
}

void BridgeRegistry::record_denial(const std::string& case_number, const PublicKey& requester, LogicalTime now) {
  denials_.push_back({case_number, requester, now});
}

std::vector<Digest> BridgeRegistry::stage_leaves(const std::string& case_number, const ChainId& chain) const {
  std::vector<Digest> leaves(stage_count_, stage_leaf({}));
  for (StageIndex s = 0; s < stage_count_; ++s) {
    if (const auto* rec = find_record(case_number, chain, s)) leaves[s] = rec->stage_leaf;
  }
  return leaves;
}

Digest BridgeRegistry::chain_root(const std::string& case_number, const ChainId& chain) const {
  auto it = roots_.find({case_number, chain});
  if (it == roots_.end()) throw Error(Errc::NonParticipant, chain + " has no root for " + case_number);
  return it->second;
}

const StageHashRecord* BridgeRegistry::find_record(const std::string& case_number, const ChainId& chain,
                                                   StageIndex stage) const {
  auto it = records_.find({case_number, chain, stage});
  return it == records_.end() ? nullptr : &it->second;
}

}  // namespace forensicross
