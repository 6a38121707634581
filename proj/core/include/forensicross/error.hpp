#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forensicross {

enum class Errc {
  // crypto / encoding
  MalformedKey,
  DecodeError,
  EmptyLeafList,
  // chain_core
  InvalidSignature,
  DuplicateTxId,
  UnknownPayloadKind,
  WrongSourceChain,
  UnauthorizedValidator,
  // interchain_comm
  NotMutualNode,
  DuplicateSubmission,
  // bridgechain_registry
  DuplicateCase,
  NoDestinations,
  UnknownCase,
  NonParticipant,
  FutureStage,
  StaleStage,
  DoubleVote,
  ProposalOpen,
  // forensics_lifecycle
  UnknownUser,
  EmptyDestinations,
  MalformedPolicy,
  NotCaseSource,
  // provenance
  StageCountMismatch,
  NotQueryNode,
  MalformedBundle,
  // topology / simnet / cli
  InvalidArgument,
  InvalidTopology,
  WorkloadReferencesUnknownChain,
  ParseError,
  FileNotFound,
  NoCasesInScenario,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying a machine-checkable error code. Every module throws
/// this type for contract violations; recoverable outcomes (rejections,
/// validation verdicts) are returned as values instead.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace forensicross
