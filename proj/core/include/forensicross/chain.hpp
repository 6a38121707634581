#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forensicross/crypto.hpp"

namespace forensicross {

using ChainId = std::string;
using LogicalTime = std::uint64_t;

inline const ChainId kBridgeChainId = "bridge";

enum class PayloadKind : std::uint8_t {
  CaseCreate = 1,
  AccessControl = 2,
  QueryNodeAssign = 3,
  StageProposal = 4,
  StageVote = 5,
  DataAccessLog = 6,
  InterchainEnvelope = 7,
  ProvenanceRequest = 8,
};

bool is_known_payload_kind(std::uint8_t raw) noexcept;
std::string_view to_string(PayloadKind kind) noexcept;

struct Transaction {
  std::string tx_id;  // assigned by the chain on submission
  PublicKey sender_public_key;
  PayloadKind payload_kind = PayloadKind::CaseCreate;
  Bytes body;
  ChainId source_chain;
  std::vector<ChainId> destination_chains;
  Signature signature;

  bool operator==(const Transaction&) const = default;
};

/// Bytes covered by the sender's signature: kind, body, source, destinations.
Bytes signing_payload(const Transaction& tx);
Transaction make_transaction(const KeyPair& sender, PayloadKind kind, Bytes body, ChainId source,
                             std::vector<ChainId> destinations = {});
bool signature_valid(const Transaction& tx);

void encode(ByteWriter& w, const Transaction& tx);
Transaction decode_transaction(ByteReader& r);
Digest tx_digest(const Transaction& tx);

struct Block {
  std::uint64_t height = 0;
  Digest prev_hash;
  Digest tx_merkle_root;
  std::vector<Transaction> transactions;
  PublicKey validator_public_key;
  Signature validator_signature;
  LogicalTime timestamp = 0;

  bool operator==(const Block&) const = default;
};

Bytes header_bytes(const Block& block);
Digest header_digest(const Block& block);
/// Merkle root over transaction digests; hash("EMPTY") for an empty block.
Digest compute_tx_root(std::span<const Transaction> txs);

Bytes encode(const Block& block);
/// Strict decode: throws Error(DecodeError) on malformed or trailing input.
Block decode_block(ByteView data);

struct SubmitResult {
  bool accepted = false;
  std::string tx_id;  // assigned id (or the id of the earlier duplicate)
  std::optional<Errc> reason;
};

struct ValidationResult {
  std::optional<std::uint64_t> broken_at;
  std::string reason;
  bool ok() const { return !broken_at.has_value(); }
};

/// Private proof-of-authority chain. Block production is restricted to the
/// fixed authority set; the scheduled producer rotates round-robin by height.
class Chain {
 public:
  Chain(ChainId id, std::vector<PublicKey> authority_set);

  const ChainId& id() const { return id_; }
  const std::vector<PublicKey>& authority_set() const { return authorities_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Transaction>& pending_pool() const { return pending_; }
  std::uint64_t height() const { return blocks_.size(); }

  /// Verifies the sender signature and assigns `<chain_id>:<counter>`.
  SubmitResult submit_transaction(Transaction tx);

  /// Drains the pending pool into a new block. Throws UnauthorizedValidator.
  const Block& mine_block(const KeyPair& validator, LogicalTime now);

  const PublicKey& scheduled_validator(std::uint64_t height) const;
  bool is_authority(const PublicKey& key) const;

  /// Direct block access for tamper-injection tests and dump loading.
  std::vector<Block>& mutable_blocks() { return blocks_; }

 private:
  ChainId id_;
  std::vector<PublicKey> authorities_;
  std::vector<Block> blocks_;
  std::vector<Transaction> pending_;
  std::map<Digest, std::string> seen_content_;  // content hash -> assigned id
  std::uint64_t next_counter_ = 0;
};

/// Returns the lowest height whose linkage, Merkle root, authority or
/// validator signature check fails.
ValidationResult validate_chain(const Chain& chain);
ValidationResult validate_blocks(std::span<const PublicKey> authorities, std::span<const Block> blocks);
/// Same as validate_blocks, over encoded blocks; an undecodable block is
/// reported as broken at its index.
ValidationResult validate_encoded_blocks(std::span<const PublicKey> authorities,
                                         std::span<const Bytes> encoded);

/// One JSON object per line, one line per block, digests in lowercase hex.
void dump_chain(const Chain& chain, std::ostream& out);
std::vector<Block> load_chain_dump(std::istream& in);

}  // namespace forensicross
