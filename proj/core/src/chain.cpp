#include "forensicross/chain.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace forensicross {

bool is_known_payload_kind(std::uint8_t raw) noexcept {
  return raw >= static_cast<std::uint8_t>(PayloadKind::CaseCreate) &&
         raw <= static_cast<std::uint8_t>(PayloadKind::ProvenanceRequest);
}

std::string_view to_string(PayloadKind kind) noexcept {
  switch (kind) {
    case PayloadKind::CaseCreate: return "CaseCreate";
    case PayloadKind::AccessControl: return "AccessControl";
    case PayloadKind::QueryNodeAssign: return "QueryNodeAssign";
    case PayloadKind::StageProposal: return "StageProposal";
    case PayloadKind::StageVote: return "StageVote";
    case PayloadKind::DataAccessLog: return "DataAccessLog";
    case PayloadKind::InterchainEnvelope: return "InterchainEnvelope";
    case PayloadKind::ProvenanceRequest: return "ProvenanceRequest";
  }
  return "Unknown";
}

namespace {

PayloadKind payload_kind_from_string(std::string_view name) {
  for (std::uint8_t raw = 1; is_known_payload_kind(raw); ++raw) {
    auto kind = static_cast<PayloadKind>(raw);
    if (to_string(kind) == name) return kind;
  }
  throw Error(Errc::UnknownPayloadKind, std::string(name));
}

void write_chain_list(ByteWriter& w, const std::vector<ChainId>& ids) {
  w.list(ids, [](ByteWriter& bw, const ChainId& id) { bw.str(id); });
}

std::vector<ChainId> read_chain_list(ByteReader& r) {
  std::vector<ChainId> ids(r.count());
  for (auto& id : ids) id = r.str();
  return ids;
}

}  // namespace

Bytes signing_payload(const Transaction& tx) {
  ByteWriter w;
  w.str("tx").u8(static_cast<std::uint8_t>(tx.payload_kind)).bytes(tx.body).str(tx.source_chain);
  write_chain_list(w, tx.destination_chains);
  return std::move(w).take();
}

Transaction make_transaction(const KeyPair& sender, PayloadKind kind, Bytes body, ChainId source,
                             std::vector<ChainId> destinations) {
  Transaction tx;
  tx.sender_public_key = sender.public_key;
  tx.payload_kind = kind;
  tx.body = std::move(body);
  tx.source_chain = std::move(source);
  tx.destination_chains = std::move(destinations);
  tx.signature = sign(signing_payload(tx), sender);
  return tx;
}

bool signature_valid(const Transaction& tx) {
  try {
    return verify(signing_payload(tx), tx.signature, tx.sender_public_key);
  } catch (const Error&) {
    return false;
  }
}

void encode(ByteWriter& w, const Transaction& tx) {
  w.str(tx.tx_id)
      .bytes(tx.sender_public_key.bytes)
      .u8(static_cast<std::uint8_t>(tx.payload_kind))
      .bytes(tx.body)
      .str(tx.source_chain);
  write_chain_list(w, tx.destination_chains);
  w.bytes(tx.signature.bytes);
}

Transaction decode_transaction(ByteReader& r) {
  Transaction tx;
  tx.tx_id = r.str();
  tx.sender_public_key.bytes = r.bytes();
  auto kind = r.u8();
  if (!is_known_payload_kind(kind)) throw Error(Errc::DecodeError, "unknown payload kind");
  tx.payload_kind = static_cast<PayloadKind>(kind);
  tx.body = r.bytes();
  tx.source_chain = r.str();
  tx.destination_chains = read_chain_list(r);
  tx.signature.bytes = r.bytes();
  return tx;
}

Digest tx_digest(const Transaction& tx) {
  ByteWriter w;
  encode(w, tx);
  return hash(w.data());
}

Bytes header_bytes(const Block& block) {
  ByteWriter w;
  w.str("block-header")
      .u64(block.height)
      .digest(block.prev_hash)
      .digest(block.tx_merkle_root)
      .bytes(block.validator_public_key.bytes)
      .u64(block.timestamp);
  return std::move(w).take();
}

Digest header_digest(const Block& block) { return hash(header_bytes(block)); }

Digest compute_tx_root(std::span<const Transaction> txs) {
  if (txs.empty()) return hash("EMPTY");
  std::vector<Digest> leaves;
  leaves.reserve(txs.size());
  for (const auto& tx : txs) leaves.push_back(tx_digest(tx));
  return merkle_root(leaves);
}

Bytes encode(const Block& block) {
  ByteWriter w;
  w.u64(block.height).digest(block.prev_hash).digest(block.tx_merkle_root);
  w.list(block.transactions, [](ByteWriter& bw, const Transaction& tx) { encode(bw, tx); });
  w.bytes(block.validator_public_key.bytes).bytes(block.validator_signature.bytes).u64(block.timestamp);
  return std::move(w).take();
}

Block decode_block(ByteView data) {
  ByteReader r(data);
  Block block;
  block.height = r.u64();
  block.prev_hash = r.digest();
  block.tx_merkle_root = r.digest();
  auto count = r.count();
  if (count > data.size()) throw Error(Errc::DecodeError, "transaction count exceeds input");
  block.transactions.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) block.transactions.push_back(decode_transaction(r));
  block.validator_public_key.bytes = r.bytes();
  block.validator_signature.bytes = r.bytes();
  block.timestamp = r.u64();
  r.expect_done();
  return block;
}

// ---------------------------------------------------------------------------

Chain::Chain(ChainId id, std::vector<PublicKey> authority_set)
    : id_(std::move(id)), authorities_(std::move(authority_set)) {
  if (authorities_.empty()) throw Error(Errc::InvalidArgument, "chain " + id_ + " has no authorities");
}

SubmitResult Chain::submit_transaction(Transaction tx) {
  SubmitResult result;
  if (!is_known_payload_kind(static_cast<std::uint8_t>(tx.payload_kind))) {
    result.reason = Errc::UnknownPayloadKind;
    return result;
  }
  if (tx.source_chain != id_) {
    result.reason = Errc::WrongSourceChain;
    return result;
  }
  if (!signature_valid(tx)) {
    result.reason = Errc::InvalidSignature;
    return result;
  }
  ByteWriter content;
  content.bytes(signing_payload(tx)).bytes(tx.signature.bytes);
  const auto key = hash(content.data());
  if (auto it = seen_content_.find(key); it != seen_content_.end()) {
    result.reason = Errc::DuplicateTxId;
    result.tx_id = it->second;
    return result;
  }
  tx.tx_id = id_ + ":" + std::to_string(next_counter_++);
  seen_content_.emplace(key, tx.tx_id);
  result.accepted = true;
  result.tx_id = tx.tx_id;
  pending_.push_back(std::move(tx));
  return result;
}

bool Chain::is_authority(const PublicKey& key) const {
  return std::find(authorities_.begin(), authorities_.end(), key) != authorities_.end();
}

const PublicKey& Chain::scheduled_validator(std::uint64_t height) const {
  return authorities_[height % authorities_.size()];
}

const Block& Chain::mine_block(const KeyPair& validator, LogicalTime now) {
  if (!is_authority(validator.public_key)) {
    throw Error(Errc::UnauthorizedValidator, "key is not in the authority set of " + id_);
  }
  Block block;
  block.height = blocks_.size();
  block.prev_hash = blocks_.empty() ? Digest::zero() : header_digest(blocks_.back());
  block.transactions = std::move(pending_);
  pending_.clear();
  block.tx_merkle_root = compute_tx_root(block.transactions);
  block.validator_public_key = validator.public_key;
  block.timestamp = now;
  block.validator_signature = sign(header_bytes(block), validator);
  blocks_.push_back(std::move(block));
  return blocks_.back();
}

// ---------------------------------------------------------------------------

ValidationResult validate_blocks(std::span<const PublicKey> authorities, std::span<const Block> blocks) {
  auto broken = [](std::uint64_t h, std::string why) { return ValidationResult{h, std::move(why)}; };
  Digest expected_prev = Digest::zero();
  for (std::uint64_t h = 0; h < blocks.size(); ++h) {
    const Block& b = blocks[h];
    if (b.height != h) return broken(h, "height mismatch");
    if (b.prev_hash != expected_prev) return broken(h, "prev_hash does not link");
    if (b.tx_merkle_root != compute_tx_root(b.transactions)) return broken(h, "tx_merkle_root mismatch");
    if (std::find(authorities.begin(), authorities.end(), b.validator_public_key) == authorities.end()) {
      return broken(h, "validator not in authority set");
    }
    bool sig_ok = false;
    try {
      sig_ok = verify(header_bytes(b), b.validator_signature, b.validator_public_key);
    } catch (const Error&) {
      sig_ok = false;
    }
    if (!sig_ok) return broken(h, "validator signature invalid");
    expected_prev = header_digest(b);
  }
  return {};
}

ValidationResult validate_chain(const Chain& chain) {
  return validate_blocks(chain.authority_set(), chain.blocks());
}

ValidationResult validate_encoded_blocks(std::span<const PublicKey> authorities,
                                         std::span<const Bytes> encoded) {
  std::vector<Block> blocks;
  blocks.reserve(encoded.size());
  for (std::uint64_t h = 0; h < encoded.size(); ++h) {
    try {
      blocks.push_back(decode_block(encoded[h]));
    } catch (const Error& e) {
      // Earlier blocks may still be broken; report the lowest failing height.
      auto prefix = validate_blocks(authorities, blocks);
      if (!prefix.ok()) return prefix;
      return {h, std::string("undecodable block: ") + e.what()};
    }
  }
  return validate_blocks(authorities, blocks);
}

void dump_chain(const Chain& chain, std::ostream& out) {
  for (const auto& b : chain.blocks()) {
    nlohmann::json line;
    line["chain"] = chain.id();
    line["height"] = b.height;
    line["hash"] = header_digest(b).hex();
    line["prev_hash"] = b.prev_hash.hex();
    line["tx_root"] = b.tx_merkle_root.hex();
    line["validator"] = b.validator_public_key.hex();
    line["signature"] = b.validator_signature.hex();
    line["timestamp"] = b.timestamp;
    auto txs = nlohmann::json::array();
    for (const auto& tx : b.transactions) {
      txs.push_back({{"id", tx.tx_id},
                     {"kind", to_string(tx.payload_kind)},
                     {"sender", tx.sender_public_key.hex()},
                     {"source", tx.source_chain},
                     {"destinations", tx.destination_chains},
                     {"body", to_hex(tx.body)},
                     {"signature", tx.signature.hex()}});
    }
    line["txs"] = std::move(txs);
    out << line.dump() << '\n';
  }
}

std::vector<Block> load_chain_dump(std::istream& in) {
  std::vector<Block> blocks;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      auto line = nlohmann::json::parse(text);
      Block b;
      b.height = line.at("height").get<std::uint64_t>();
      b.prev_hash = Digest::from_hex(line.at("prev_hash").get<std::string>());
      b.tx_merkle_root = Digest::from_hex(line.at("tx_root").get<std::string>());
      b.validator_public_key.bytes = from_hex(line.at("validator").get<std::string>());
      b.validator_signature.bytes = from_hex(line.at("signature").get<std::string>());
      b.timestamp = line.at("timestamp").get<LogicalTime>();
      for (const auto& t : line.at("txs")) {
        Transaction tx;
        tx.tx_id = t.at("id").get<std::string>();
        tx.payload_kind = payload_kind_from_string(t.at("kind").get<std::string>());
        tx.sender_public_key.bytes = from_hex(t.at("sender").get<std::string>());
        tx.source_chain = t.at("source").get<std::string>();
        tx.destination_chains = t.at("destinations").get<std::vector<ChainId>>();
        tx.body = from_hex(t.at("body").get<std::string>());
        tx.signature.bytes = from_hex(t.at("signature").get<std::string>());
        b.transactions.push_back(std::move(tx));
      }
      blocks.push_back(std::move(b));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return blocks;
}

}  // namespace forensicross
