#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forensicross/chain.hpp"

namespace forensicross {

using Role = std::string;
using StageIndex = std::uint32_t;

enum class Action : std::uint8_t { Read = 1, Upload = 2, ProposeStage = 3, Query = 4 };
std::string_view to_string(Action action) noexcept;
Action action_from_string(std::string_view name);

enum class AccessDecision : std::uint8_t { Allowed = 1, Denied = 2 };
std::string_view to_string(AccessDecision decision) noexcept;

/// Staged role matrix: (role, stage) -> permitted actions. Lookups are
/// total; anything not granted is denied.
struct AccessPolicy {
  std::set<Role> roles;
  std::map<std::pair<Role, StageIndex>, std::set<Action>> grants;

  static std::set<Role> default_roles();  // investigator, analyst, auditor, query-node

  void grant(const Role& role, StageIndex stage, Action action) { grants[{role, stage}].insert(action); }
  /// Throws MalformedPolicy if a grant names an undeclared role.
  void validate() const;

  Bytes encode() const;
  static AccessPolicy decode(ByteView data);
  Digest digest() const;

  bool operator==(const AccessPolicy&) const = default;
};

AccessDecision check_access(const AccessPolicy& policy, const Role& role, StageIndex stage, Action action);

struct AccessLogEntry {
  std::string case_number;
  PublicKey actor;
  Role role;
  Action action = Action::Read;
  StageIndex stage = 0;
  AccessDecision decision = AccessDecision::Denied;
  LogicalTime logical_time = 0;
  Digest payload_digest;

  Bytes encode() const;
  static AccessLogEntry decode(ByteView data);
  bool operator==(const AccessLogEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Transaction bodies. Each body leads with the case number so any case
// transaction can be attributed without knowing its kind.

struct CaseCreateBody {
  std::string case_number;
  std::vector<ChainId> destinations;
  Bytes encode() const;
  static CaseCreateBody decode(ByteView data);
};

struct AccessControlBody {
  std::string case_number;
  AccessPolicy policy;
  Bytes encode() const;
  static AccessControlBody decode(ByteView data);
};

struct QueryNodeAssignBody {
  std::string case_number;
  std::vector<PublicKey> keys;
  Bytes encode() const;
  static QueryNodeAssignBody decode(ByteView data);
};

struct StageProposalBody {
  std::string case_number;
  StageIndex target_stage = 0;
  LogicalTime requested_at = 0;
  Bytes encode() const;
  static StageProposalBody decode(ByteView data);
};

struct StageVoteBody {
  std::string case_number;
  StageIndex stage = 0;
  std::uint32_t round = 0;
  bool approve = true;
  std::string reason;
  Bytes encode() const;
  static StageVoteBody decode(ByteView data);
};

struct ProvenanceRequestBody {
  std::string case_number;
  PublicKey requester;
  LogicalTime requested_at = 0;
  Bytes encode() const;
  static ProvenanceRequestBody decode(ByteView data);
};

/// Bridge-originated notices delivered to organization chains.
struct NoticeBody {
  enum class Kind : std::uint8_t { StageProposed = 1, StageAdvanced = 2, StageBlocked = 3, ProvenanceDenied = 4 };
  Kind kind = Kind::StageProposed;
  std::string case_number;
  StageIndex stage = 0;
  std::uint32_t round = 0;
  std::vector<std::string> reasons;
  Bytes encode() const;
  static NoticeBody decode(ByteView data);
};
std::string_view to_string(NoticeBody::Kind kind) noexcept;

/// Case number of any case transaction body (every body starts with it).
std::string case_number_of(const Transaction& tx);

// ---------------------------------------------------------------------------

struct LocalCase {
  std::string case_number;
  ChainId source_chain;
  std::vector<ChainId> destinations;
  PublicKey creator;
  StageIndex stage = 0;
  std::optional<AccessPolicy> policy;
};

/// Communication and case contracts of one organization chain.
class OrgContract {
 public:
  explicit OrgContract(ChainId chain_id) : chain_id_(std::move(chain_id)) {}

  const ChainId& chain_id() const { return chain_id_; }

  void register_user(const std::string& name, const PublicKey& key) { users_[key] = name; }
  bool is_registered(const PublicKey& key) const { return users_.contains(key); }

  /// Throws UnknownUser, EmptyDestinations.
  Transaction create_case_request(const KeyPair& user, const std::string& case_number,
                                  const std::vector<ChainId>& destinations) const;
  /// Throws UnknownCase, NotCaseSource, MalformedPolicy.
  Transaction dispatch_access_policy(const KeyPair& caller, const std::string& case_number,
                                     const AccessPolicy& policy) const;
  Transaction query_node_assignment(const KeyPair& caller, const std::string& case_number,
                                    const std::vector<PublicKey>& keys) const;
  Transaction stage_proposal(const KeyPair& caller, const std::string& case_number, StageIndex target,
                             LogicalTime now) const;
  Transaction stage_vote(const KeyPair& caller, const std::string& case_number, StageIndex stage, std::uint32_t round,
                         bool approve, const std::string& reason) const;
  Transaction provenance_request(const KeyPair& query_node, const std::string& case_number, LogicalTime now) const;

  struct AccessAttempt {
    AccessLogEntry entry;
    SubmitResult submission;
  };
  /// Decides against the locally stored policy at the local stage, then
  /// submits a DataAccessLog transaction whether allowed or denied.
  /// Throws UnknownCase.
  AccessAttempt log_data_access(Chain& chain, const KeyPair& actor, const Role& role, const std::string& case_number,
                                Action action, const Digest& payload_digest, LogicalTime now);

  /// Applies a transaction mined on this chain (case instantiation, local
  /// policy copy, access log).
  void apply_mined(const Transaction& tx);
  /// Applies a majority-validated inbound transaction relayed from another chain.
  void apply_inbound(const Transaction& origin);
  void apply_notice(const NoticeBody& notice);

  const LocalCase* find_case(const std::string& case_number) const;
  const std::map<std::string, LocalCase>& cases() const { return cases_; }
  const std::vector<AccessLogEntry>& access_log() const { return access_log_; }
  const std::vector<NoticeBody>& notices() const { return notices_; }

 private:
  const LocalCase& require_case(const std::string& case_number) const;

  ChainId chain_id_;
  std::map<PublicKey, std::string> users_;
  std::map<std::string, LocalCase> cases_;
  std::vector<AccessLogEntry> access_log_;
  std::vector<NoticeBody> notices_;
};

}  // namespace forensicross
