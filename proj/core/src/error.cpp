#include "forensicross/error.hpp"

namespace forensicross {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedKey: return "MalformedKey";
    case Errc::DecodeError: return "DecodeError";
    case Errc::EmptyLeafList: return "EmptyLeafList";
    case Errc::InvalidSignature: return "InvalidSignature";
    case Errc::DuplicateTxId: return "DuplicateTxId";
    case Errc::UnknownPayloadKind: return "UnknownPayloadKind";
    case Errc::WrongSourceChain: return "WrongSourceChain";
    case Errc::UnauthorizedValidator: return "UnauthorizedValidator";
    case Errc::NotMutualNode: return "NotMutualNode";
    case Errc::DuplicateSubmission: return "DuplicateSubmission";
    case Errc::DuplicateCase: return "DuplicateCase";
    case Errc::NoDestinations: return "NoDestinations";
    case Errc::UnknownCase: return "UnknownCase";
    case Errc::NonParticipant: return "NonParticipant";
    case Errc::FutureStage: return "FutureStage";
    case Errc::StaleStage: return "StaleStage";
    case Errc::DoubleVote: return "DoubleVote";
    case Errc::ProposalOpen: return "ProposalOpen";
    case Errc::UnknownUser: return "UnknownUser";
    case Errc::EmptyDestinations: return "EmptyDestinations";
    case Errc::MalformedPolicy: return "MalformedPolicy";
    case Errc::NotCaseSource: return "NotCaseSource";
    case Errc::StageCountMismatch: return "StageCountMismatch";
    case Errc::NotQueryNode: return "NotQueryNode";
    case Errc::MalformedBundle: return "MalformedBundle";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidTopology: return "InvalidTopology";
    case Errc::WorkloadReferencesUnknownChain: return "WorkloadReferencesUnknownChain";
    case Errc::ParseError: return "ParseError";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::NoCasesInScenario: return "NoCasesInScenario";
  }
  return "Unknown";
}

}  // namespace forensicross
