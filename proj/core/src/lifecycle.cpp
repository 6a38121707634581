#include "forensicross/lifecycle.hpp"

#include <algorithm>

namespace forensicross {

std::string_view to_string(Action action) noexcept {
  switch (action) {
    case Action::Read: return "Read";
    case Action::Upload: return "Upload";
    case Action::ProposeStage: return "ProposeStage";
    case Action::Query: return "Query";
  }
  return "?";
}

Action action_from_string(std::string_view name) {
  for (auto a : {Action::Read, Action::Upload, Action::ProposeStage, Action::Query}) {
    if (to_string(a) == name) return a;
  }
  throw Error(Errc::InvalidArgument, "unknown action '" + std::string(name) + "'");
}

std::string_view to_string(AccessDecision decision) noexcept {
  return decision == AccessDecision::Allowed ? "Allowed" : "Denied";
}

std::set<Role> AccessPolicy::default_roles() { return {"investigator", "analyst", "auditor", "query-node"}; }

void AccessPolicy::validate() const {
  for (const auto& [key, actions] : grants) {
    if (!roles.contains(key.first)) {
      throw Error(Errc::MalformedPolicy, "grant references undeclared role '" + key.first + "'");
    }
  }
}

Bytes AccessPolicy::encode() const {
  ByteWriter w;
  w.list(roles, [](ByteWriter& bw, const Role& r) { bw.str(r); });
  w.list(grants, [](ByteWriter& bw, const auto& grant) {
    bw.str(grant.first.first).u32(grant.first.second);
    bw.list(grant.second, [](ByteWriter& inner, Action a) { inner.u8(static_cast<std::uint8_t>(a)); });
  });
  return std::move(w).take();
}

AccessPolicy AccessPolicy::decode(ByteView data) {
  ByteReader r(data);
  AccessPolicy p;
  for (auto n = r.count(); n > 0; --n) p.roles.insert(r.str());
  for (auto n = r.count(); n > 0; --n) {
    Role role = r.str();
    StageIndex stage = r.u32();
    auto& actions = p.grants[{role, stage}];
    for (auto a = r.count(1); a > 0; --a) {
      auto raw = r.u8();
      if (raw < 1 || raw > 4) throw Error(Errc::DecodeError, "unknown action");
      actions.insert(static_cast<Action>(raw));
    }
  }
  r.expect_done();
  return p;
}

Digest AccessPolicy::digest() const { return hash(encode()); }

AccessDecision check_access(const AccessPolicy& policy, const Role& role, StageIndex stage, Action action) {
  auto it = policy.grants.find({role, stage});
  if (it != policy.grants.end() && it->second.contains(action)) return AccessDecision::Allowed;
  return AccessDecision::Denied;
}

Bytes AccessLogEntry::encode() const {
  ByteWriter w;
  w.str(case_number)
      .bytes(actor.bytes)
      .str(role)
      .u8(static_cast<std::uint8_t>(action))
      .u32(stage)
      .u8(static_cast<std::uint8_t>(decision))
      .u64(logical_time)
      .digest(payload_digest);
  return std::move(w).take();
}

AccessLogEntry AccessLogEntry::decode(ByteView data) {
  ByteReader r(data);
  AccessLogEntry e;
  e.case_number = r.str();
  e.actor.bytes = r.bytes();
  e.role = r.str();
  auto action = r.u8();
  if (action < 1 || action > 4) throw Error(Errc::DecodeError, "unknown action");
  e.action = static_cast<Action>(action);
  e.stage = r.u32();
  auto decision = r.u8();
  if (decision < 1 || decision > 2) throw Error(Errc::DecodeError, "unknown access decision");
  e.decision = static_cast<AccessDecision>(decision);
  e.logical_time = r.u64();
  e.payload_digest = r.digest();
  r.expect_done();
  return e;
}

// ---------------------------------------------------------------------------

Bytes CaseCreateBody::encode() const {
  ByteWriter w;
  w.str(case_number).list(destinations, [](ByteWriter& bw, const ChainId& c) { bw.str(c); });
  return std::move(w).take();
}

CaseCreateBody CaseCreateBody::decode(ByteView data) {
  ByteReader r(data);
  CaseCreateBody b;
  b.case_number = r.str();
  b.destinations.resize(r.count());
  for (auto& d : b.destinations) d = r.str();
  r.expect_done();
  return b;
}

Bytes AccessControlBody::encode() const {
  ByteWriter w;
  w.str(case_number).bytes(policy.encode());
  return std::move(w).take();
}

AccessControlBody AccessControlBody::decode(ByteView data) {
  ByteReader r(data);
  AccessControlBody b;
  b.case_number = r.str();
  b.policy = AccessPolicy::decode(r.bytes());
  r.expect_done();
  return b;
}

Bytes QueryNodeAssignBody::encode() const {
  ByteWriter w;
  w.str(case_number).list(keys, [](ByteWriter& bw, const PublicKey& k) { bw.bytes(k.bytes); });
  return std::move(w).take();
}

QueryNodeAssignBody QueryNodeAssignBody::decode(ByteView data) {
  ByteReader r(data);
  QueryNodeAssignBody b;
  b.case_number = r.str();
  b.keys.resize(r.count());
  for (auto& k : b.keys) k.bytes = r.bytes();
  r.expect_done();
  return b;
}

Bytes StageProposalBody::encode() const {
  ByteWriter w;
  w.str(case_number).u32(target_stage).u64(requested_at);
  return std::move(w).take();
}

StageProposalBody StageProposalBody::decode(ByteView data) {
  ByteReader r(data);
  StageProposalBody b;
  b.case_number = r.str();
  b.target_stage = r.u32();
  b.requested_at = r.u64();
  r.expect_done();
  return b;
}

Bytes StageVoteBody::encode() const {
  ByteWriter w;
  w.str(case_number).u32(stage).u32(round).u8(approve ? 1 : 0).str(reason);
  return std::move(w).take();
}

StageVoteBody StageVoteBody::decode(ByteView data) {
  ByteReader r(data);
  StageVoteBody b;
  b.case_number = r.str();
  b.stage = r.u32();
  b.round = r.u32();
  b.approve = r.u8() != 0;
  b.reason = r.str();
  r.expect_done();
  return b;
}

Bytes ProvenanceRequestBody::encode() const {
  ByteWriter w;
  w.str(case_number).bytes(requester.bytes).u64(requested_at);
  return std::move(w).take();
}

ProvenanceRequestBody ProvenanceRequestBody::decode(ByteView data) {
  ByteReader r(data);
  ProvenanceRequestBody b;
  b.case_number = r.str();
  b.requester.bytes = r.bytes();
  b.requested_at = r.u64();
  r.expect_done();
  return b;
}

Bytes NoticeBody::encode() const {
  ByteWriter w;
  // Same leading field as every other case body.
  w.str(case_number).u8(static_cast<std::uint8_t>(kind)).u32(stage).u32(round);
  w.list(reasons, [](ByteWriter& bw, const std::string& s) { bw.str(s); });
  return std::move(w).take();
}

NoticeBody NoticeBody::decode(ByteView data) {
  ByteReader r(data);
  NoticeBody b;
  b.case_number = r.str();
  auto kind = r.u8();
  if (kind < 1 || kind > 4) throw Error(Errc::DecodeError, "unknown notice kind");
  b.kind = static_cast<Kind>(kind);
  b.stage = r.u32();
  b.round = r.u32();
  b.reasons.resize(r.count());
  for (auto& s : b.reasons) s = r.str();
  r.expect_done();
  return b;
}

std::string_view to_string(NoticeBody::Kind kind) noexcept {
  switch (kind) {
    case NoticeBody::Kind::StageProposed: return "StageProposed";
    case NoticeBody::Kind::StageAdvanced: return "StageAdvanced";
    case NoticeBody::Kind::StageBlocked: return "StageBlocked";
    case NoticeBody::Kind::ProvenanceDenied: return "ProvenanceDenied";
  }
  return "?";
}

std::string case_number_of(const Transaction& tx) {
  ByteReader r(tx.body);
  return r.str();
}

// ---------------------------------------------------------------------------

const LocalCase& OrgContract::require_case(const std::string& case_number) const {
  auto it = cases_.find(case_number);
  if (it == cases_.end()) throw Error(Errc::UnknownCase, case_number + " is not known on " + chain_id_);
  return it->second;
}

const LocalCase* OrgContract::find_case(const std::string& case_number) const {
  auto it = cases_.find(case_number);
  return it == cases_.end() ? nullptr : &it->second;
}

Transaction OrgContract::create_case_request(const KeyPair& user, const std::string& case_number,
                                             const std::vector<ChainId>& destinations) const {
  if (!is_registered(user.public_key)) throw Error(Errc::UnknownUser, "user not registered on " + chain_id_);
  if (destinations.empty()) throw Error(Errc::EmptyDestinations, "case " + case_number + " has no destinations");
  CaseCreateBody body{case_number, destinations};
  return make_transaction(user, PayloadKind::CaseCreate, body.encode(), chain_id_, destinations);
}

Transaction OrgContract::dispatch_access_policy(const KeyPair& caller, const std::string& case_number,
                                                const AccessPolicy& policy) const {
  const auto& local = require_case(case_number);
  if (local.source_chain != chain_id_) {
    throw Error(Errc::NotCaseSource, "policy for " + case_number + " must come from " + local.source_chain);
  }
  policy.validate();
  AccessControlBody body{case_number, policy};
  return make_transaction(caller, PayloadKind::AccessControl, body.encode(), chain_id_, local.destinations);
}

Transaction OrgContract::query_node_assignment(const KeyPair& caller, const std::string& case_number,
                                               const std::vector<PublicKey>& keys) const {
  require_case(case_number);
  QueryNodeAssignBody body{case_number, keys};
  return make_transaction(caller, PayloadKind::QueryNodeAssign, body.encode(), chain_id_, {kBridgeChainId});
}

Transaction OrgContract::stage_proposal(const KeyPair& caller, const std::string& case_number,
                                        StageIndex target, LogicalTime now) const {
  require_case(case_number);
  StageProposalBody body{case_number, target, now};
  return make_transaction(caller, PayloadKind::StageProposal, body.encode(), chain_id_, {kBridgeChainId});
}

Transaction OrgContract::stage_vote(const KeyPair& caller, const std::string& case_number, StageIndex stage,
                                    std::uint32_t round, bool approve, const std::string& reason) const {
  require_case(case_number);
  StageVoteBody body{case_number, stage, round, approve, reason};
  return make_transaction(caller, PayloadKind::StageVote, body.encode(), chain_id_, {kBridgeChainId});
}

Transaction OrgContract::provenance_request(const KeyPair& query_node, const std::string& case_number,
                                            LogicalTime now) const {
  require_case(case_number);
  ProvenanceRequestBody body{case_number, query_node.public_key, now};
  return make_transaction(query_node, PayloadKind::ProvenanceRequest, body.encode(), chain_id_, {kBridgeChainId});
}

OrgContract::AccessAttempt OrgContract::log_data_access(Chain& chain, const KeyPair& actor, const Role& role,
                                                        const std::string& case_number, Action action,
                                                        const Digest& payload_digest, LogicalTime now) {
  const auto& local = require_case(case_number);
  AccessAttempt attempt;
  auto& e = attempt.entry;
  e.case_number = case_number;
  e.actor = actor.public_key;
  e.role = role;
  e.action = action;
  e.stage = local.stage;
  e.decision = local.policy ? check_access(*local.policy, role, local.stage, action) : AccessDecision::Denied;
  e.logical_time = now;
  e.payload_digest = payload_digest;
  attempt.submission =
      chain.submit_transaction(make_transaction(actor, PayloadKind::DataAccessLog, e.encode(), chain_id_));
  return attempt;
}

void OrgContract::apply_mined(const Transaction& tx) {
  switch (tx.payload_kind) {
    case PayloadKind::CaseCreate: {
      auto body = CaseCreateBody::decode(tx.body);
      if (cases_.contains(body.case_number)) return;
      cases_[body.case_number] = LocalCase{body.case_number, chain_id_, body.destinations, tx.sender_public_key, 0, {}};
      break;
    }
    case PayloadKind::AccessControl: {
      auto body = AccessControlBody::decode(tx.body);
      if (auto it = cases_.find(body.case_number); it != cases_.end()) it->second.policy = body.policy;
      break;
    }
    case PayloadKind::DataAccessLog:
      access_log_.push_back(AccessLogEntry::decode(tx.body));
      break;
    default:
      break;
  }
}

void OrgContract::apply_inbound(const Transaction& origin) {
  switch (origin.payload_kind) {
    case PayloadKind::CaseCreate: {
      auto body = CaseCreateBody::decode(origin.body);
      if (cases_.contains(body.case_number)) return;
      cases_[body.case_number] =
          LocalCase{body.case_number, origin.source_chain, body.destinations, origin.sender_public_key, 0, {}};
      break;
    }
    case PayloadKind::AccessControl: {
      auto body = AccessControlBody::decode(origin.body);
      if (auto it = cases_.find(body.case_number); it != cases_.end()) it->second.policy = body.policy;
      break;
    }
    default:
      break;
  }
}

void OrgContract::apply_notice(const NoticeBody& notice) {
  notices_.push_back(notice);
  if (notice.kind != NoticeBody::Kind::StageAdvanced) return;
  if (auto it = cases_.find(notice.case_number); it != cases_.end()) {
    it->second.stage = std::max(it->second.stage, notice.stage);
  }
}

}  // namespace forensicross
