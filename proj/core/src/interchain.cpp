#include "forensicross/interchain.hpp"

#include <algorithm>
#include <set>

namespace forensicross {

Corruption Corruption::parse(std::string_view rule) {
  Corruption c;
  if (rule == "flip_body") {
    c.kind = Kind::FlipBody;
  } else if (rule == "garble") {
    c.kind = Kind::Garble;
  } else if (rule.starts_with("redirect:") && rule.size() > 9) {
    c.kind = Kind::Redirect;
    c.redirect_to = std::string(rule.substr(9));
  } else {
    throw Error(Errc::InvalidArgument, "unknown corruption rule '" + std::string(rule) + "'");
  }
  return c;
}

std::string Corruption::str() const {
  switch (kind) {
    case Kind::FlipBody: return "flip_body";
    case Kind::Redirect: return "redirect:" + redirect_to;
    case Kind::Garble: return "garble";
  }
  return "?";
}

const MutualNode* MutualNodeSet::find(const NodeId& id) const {
  auto it = std::find_if(members.begin(), members.end(), [&](const MutualNode& n) { return n.id == id; });
  return it == members.end() ? nullptr : &*it;
}

MutualNode* MutualNodeSet::find(const NodeId& id) {
  auto it = std::find_if(members.begin(), members.end(), [&](const MutualNode& n) { return n.id == id; });
  return it == members.end() ? nullptr : &*it;
}

std::vector<std::string> mutual_set_violations(const std::vector<MutualNodeSet>& sets, std::uint64_t m,
                                               std::uint64_t n) {
  std::vector<std::string> out;
  std::set<NodeId> seen;
  for (const auto& s : sets) {
    const auto size = s.size();
    const std::string label = "mutual set " + s.chain_id + "<->" + s.peer_chain;
    if (size <= 2) out.push_back(label + ": size must exceed 2");
    if (size % 2 == 0) out.push_back(label + ": size must be odd");
    if (m > 0 && 2 * size >= m) out.push_back(label + ": size must be below m/2");
    if (2 * size >= n) out.push_back(label + ": size must be below n/2");
    for (const auto& member : s.members) {
      if (!seen.insert(member.id).second) out.push_back(label + ": node " + member.id + " is shared");
    }
  }
  return out;
}

std::string_view to_string(EnvelopePurpose purpose) noexcept {
  switch (purpose) {
    case EnvelopePurpose::Relay: return "relay";
    case EnvelopePurpose::StageHash: return "stage_hash";
  }
  return "?";
}

Bytes canonical_body(const Transaction& origin) {
  ByteWriter w;
  w.str("forensicross/v1");
  encode(w, origin);
  return std::move(w).take();
}

Transaction decode_canonical_body(ByteView body) {
  ByteReader r(body);
  if (r.str() != "forensicross/v1") throw Error(Errc::DecodeError, "not a canonical transaction body");
  auto tx = decode_transaction(r);
  r.expect_done();
  return tx;
}

RelayRecord relay_record(const Transaction& origin, EnvelopePurpose purpose) {
  return RelayRecord{purpose, origin.tx_id, origin.source_chain, origin.destination_chains,
                     canonical_body(origin)};
}

Bytes envelope_signing_payload(const TranslatedEnvelope& env) {
  ByteWriter w;
  w.str("envelope").u8(static_cast<std::uint8_t>(env.purpose)).str(env.origin_tx_id).str(env.origin_chain);
  w.list(env.destination_chains, [](ByteWriter& bw, const ChainId& c) { bw.str(c); });
  w.str(env.target_chain).bytes(env.canonical_body).str(env.translator_node);
  return std::move(w).take();
}

namespace {

void corrupt(RelayRecord& record, const Corruption& c, const NodeId& node) {
  // Relay bodies stay decodable after FlipBody/Redirect so that a colluding
  // majority produces a well-formed, identical malicious transaction.
  std::optional<Transaction> tx;
  try {
    tx = decode_canonical_body(record.canonical_body);
  } catch (const Error&) {
  }
  switch (c.kind) {
    case Corruption::Kind::FlipBody:
      if (tx) {
        if (tx->body.empty()) tx->body.push_back(0x01);
        else tx->body[0] ^= 0x01;
        record.canonical_body = canonical_body(*tx);
      } else if (!record.canonical_body.empty()) {
        record.canonical_body.back() ^= 0x01;
      }
      break;
    case Corruption::Kind::Redirect:
      record.destination_chains = {c.redirect_to};
      if (tx) {
        tx->destination_chains = record.destination_chains;
        record.canonical_body = canonical_body(*tx);
      }
      break;
    case Corruption::Kind::Garble:
      record.canonical_body.insert(record.canonical_body.end(), node.begin(), node.end());
      break;
  }
}

}  // namespace

TranslatedEnvelope translate(const RelayRecord& record, const NodeId& node_id, const MutualNodeSet& set,
                             const ChainId& target_chain) {
  const MutualNode* node = set.find(node_id);
  if (node == nullptr) {
    throw Error(Errc::NotMutualNode, node_id + " is not a mutual node of " + set.chain_id);
  }
  RelayRecord out = record;
  if (node->compromise) corrupt(out, *node->compromise, node->id);

  TranslatedEnvelope env;
  env.purpose = out.purpose;
  env.origin_tx_id = out.origin_tx_id;
  env.origin_chain = out.origin_chain;
  env.destination_chains = std::move(out.destination_chains);
  env.target_chain = target_chain;
  env.canonical_body = std::move(out.canonical_body);
  env.translator_node = node->id;
  env.translator_signature = sign(envelope_signing_payload(env), node->keys);
  return env;
}

std::string_view to_string(VerificationStatus status) noexcept {
  switch (status) {
    case VerificationStatus::Pending: return "Pending";
    case VerificationStatus::Validated: return "Validated";
    case VerificationStatus::Rejected: return "Rejected";
    case VerificationStatus::Expired: return "Expired";
  }
  return "?";
}

std::optional<std::pair<Bytes, std::size_t>> modal_body(const LedgerEntry& entry) {
  std::map<Bytes, std::size_t> counts;
  for (const auto& [node, env] : entry.submissions) ++counts[env.canonical_body];
  std::optional<std::pair<Bytes, std::size_t>> best;
  for (const auto& [body, count] : counts) {
    if (!best || count > best->second) best = {body, count};
  }
  return best;
}

VerificationStatus verify_translations(const LedgerEntry& entry) {
  const std::size_t submitted = entry.submissions.size();
  const std::size_t top = submitted == 0 ? 0 : modal_body(entry)->second;
  if (2 * top > entry.expected) return VerificationStatus::Validated;
  const std::size_t remaining = entry.expected > submitted ? entry.expected - submitted : 0;
  if (2 * (top + remaining) <= entry.expected) return VerificationStatus::Rejected;
  return VerificationStatus::Pending;
}

VerificationLedger::SubmitOutcome VerificationLedger::submit(const TranslatedEnvelope& env,
                                                             const MutualNodeSet& set) {
  SubmitOutcome outcome;
  const MutualNode* node = set.find(env.translator_node);
  LedgerKey key{env.purpose, env.origin_tx_id, env.target_chain};
  auto existing = entries_.find(key);
  if (existing != entries_.end()) outcome.status = existing->second.status;
  if (node == nullptr) {
    outcome.error = Errc::NotMutualNode;
    return outcome;
  }
  bool sig_ok = false;
  try {
    sig_ok = verify(envelope_signing_payload(env), env.translator_signature, node->keys.public_key);
  } catch (const Error&) {
  }
  if (!sig_ok) {
    outcome.error = Errc::InvalidSignature;
    return outcome;
  }

  auto& entry = entries_[key];
  if (entry.expected == 0) entry.expected = set.size();
  if (entry.submissions.contains(env.translator_node)) {
    ++entry.ignored_duplicates;
    outcome.error = Errc::DuplicateSubmission;
    outcome.status = entry.status;
    return outcome;
  }
  if (entry.status != VerificationStatus::Pending) {
    ++entry.late_submissions;
    outcome.status = entry.status;
    return outcome;
  }
  entry.submissions.emplace(env.translator_node, env);
  outcome.counted = true;
  entry.status = verify_translations(entry);
  if (entry.status == VerificationStatus::Validated) entry.validated_body = modal_body(entry)->first;
  outcome.status = entry.status;
  outcome.newly_decided = entry.status != VerificationStatus::Pending;
  return outcome;
}

bool VerificationLedger::expire(const LedgerKey& key) {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.status != VerificationStatus::Pending) return false;
  it->second.status = VerificationStatus::Expired;
  return true;
}

const LedgerEntry* VerificationLedger::find(const LedgerKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t DeliveryReport::verification_events() const {
  return static_cast<std::size_t>(std::count_if(hops.begin(), hops.end(), [](const HopRecord& h) {
    return h.status == VerificationStatus::Validated;
  }));
}

std::size_t DeliveryReport::message_count() const {
  std::size_t total = 0;
  for (const auto& h : hops) total += h.message_count;
  return total;
}

}  // namespace forensicross
