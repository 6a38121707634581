#include <gtest/gtest.h>

#include <sstream>

#include "forensicross/chain.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace forensicross;

namespace {

struct Fixture {
  std::vector<KeyPair> validators;
  KeyPair user = derive_keypair(9, "user");
  Chain chain;

  explicit Fixture(std::size_t n = 4) : validators(make(n)), chain("A", keys(validators)) {}

  static std::vector<KeyPair> make(std::size_t n) {
    std::vector<KeyPair> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(derive_keypair(9, "A/n" + std::to_string(i)));
    return v;
  }
  static std::vector<PublicKey> keys(const std::vector<KeyPair>& v) {
    std::vector<PublicKey> out;
    for (const auto& k : v) out.push_back(k.public_key);
    return out;
  }
  const KeyPair& scheduled() const {
    for (const auto& v : validators) {
      if (v.public_key == chain.scheduled_validator(chain.height())) return v;
    }
    throw std::logic_error("no scheduled validator");
  }
  Transaction tx(const std::string& body) const {
    return make_transaction(user, PayloadKind::InterchainEnvelope, to_bytes(body), "A", {"B"});
  }
  void grow(std::size_t blocks, std::size_t txs_per_block = 2) {
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t t = 0; t < txs_per_block; ++t) {
        chain.submit_transaction(tx("b" + std::to_string(chain.height()) + "t" + std::to_string(t)));
      }
      chain.mine_block(scheduled(), chain.height() + 1);
    }
  }
};

}  // namespace

TEST(Submit, FreshSignedTransactionIsAcceptedWithChainScopedId) {
  Fixture f;
  auto r = f.chain.submit_transaction(f.tx("one"));
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.tx_id, "A:0");
  EXPECT_EQ(f.chain.submit_transaction(f.tx("two")).tx_id, "A:1");
  EXPECT_EQ(f.chain.pending_pool().size(), 2u);
}

TEST(Submit, SecondSubmissionOfSameTransactionIsDuplicate) {
  Fixture f;
  auto tx = f.tx("same");
  ASSERT_TRUE(f.chain.submit_transaction(tx).accepted);
  auto r = f.chain.submit_transaction(tx);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, Errc::DuplicateTxId);
  EXPECT_EQ(r.tx_id, "A:0");
}

TEST(Submit, AnyFlippedBodyBitInvalidatesSignature) {
  Fixture f;
  auto tx = f.tx("evidence");
  for (std::size_t bit = 0; bit < tx.body.size() * 8; ++bit) {
    auto bad = tx;
    bad.body[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    auto r = f.chain.submit_transaction(bad);
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(r.reason, Errc::InvalidSignature) << "bit " << bit;
  }
  EXPECT_TRUE(f.chain.pending_pool().empty());
}

TEST(Submit, ForeignSourceAndUnknownKindAreRefused) {
  Fixture f;
  auto foreign = make_transaction(f.user, PayloadKind::InterchainEnvelope, to_bytes("x"), "B", {"A"});
  EXPECT_EQ(f.chain.submit_transaction(foreign).reason, Errc::WrongSourceChain);
  auto odd = f.tx("y");
  odd.payload_kind = static_cast<PayloadKind>(42);
  EXPECT_EQ(f.chain.submit_transaction(odd).reason, Errc::UnknownPayloadKind);
}

TEST(Mine, BlockCarriesPendingTransactionsAndLinksToPrevious) {
  Fixture f;
  for (auto body : {"a", "b", "c"}) f.chain.submit_transaction(f.tx(body));
  const auto& genesis = f.chain.mine_block(f.scheduled(), 1);
  EXPECT_EQ(genesis.height, 0u);
  EXPECT_EQ(genesis.prev_hash, Digest::zero());
  EXPECT_EQ(genesis.transactions.size(), 3u);
  EXPECT_TRUE(f.chain.pending_pool().empty());

  // The header digest is recomputed here from raw fields with the reference hash.
  ByteWriter w;
  w.str("block-header").u64(0).digest(genesis.prev_hash).digest(genesis.tx_merkle_root);
  w.bytes(genesis.validator_public_key.bytes).u64(genesis.timestamp);
  const auto expected_prev = fxtest::to_digest(oracle::sha256(w.data()));

  f.chain.submit_transaction(f.tx("d"));
  const auto& second = f.chain.mine_block(f.scheduled(), 2);
  EXPECT_EQ(second.prev_hash, expected_prev);
}

TEST(Mine, EmptyBlockUsesEmptyRootMarker) {
  Fixture f;
  const auto& b = f.chain.mine_block(f.scheduled(), 1);
  EXPECT_TRUE(b.transactions.empty());
  EXPECT_EQ(b.tx_merkle_root, fxtest::to_digest(oracle::sha256(std::string("EMPTY"))));
}

TEST(Mine, NonAuthorityIsRejected) {
  Fixture f;
  f.chain.submit_transaction(f.tx("a"));
  EXPECT_EQ(fxtest::code_of([&] { f.chain.mine_block(derive_keypair(9, "outsider"), 1); }),
            Errc::UnauthorizedValidator);
  EXPECT_EQ(f.chain.height(), 0u);
}

TEST(Mine, ScheduleRotatesRoundRobin) {
  Fixture f(3);
  for (std::uint64_t h = 0; h < 7; ++h) {
    EXPECT_EQ(f.chain.scheduled_validator(h), f.validators[h % 3].public_key);
  }
}

TEST(Validate, UntamperedChainIsOk) {
  Fixture f;
  f.grow(10);
  EXPECT_TRUE(validate_chain(f.chain).ok());
}

TEST(Validate, MutatedTransactionInBlockFourIsReportedThere) {
  Fixture f;
  f.grow(10);
  f.chain.mutable_blocks()[4].transactions[1].body[0] ^= 0x01;
  auto r = validate_chain(f.chain);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.broken_at, 4u);
}

TEST(Validate, ValidSignatureOverWrongHeaderIsReported) {
  Fixture f;
  f.grow(10);
  auto& blocks = f.chain.mutable_blocks();
  auto wrong = blocks[7];
  wrong.timestamp += 1;
  const auto& other = f.validators[(7 + 1) % f.validators.size()];
  blocks[7].validator_public_key = other.public_key;
  blocks[7].validator_signature = sign(header_bytes(wrong), other);
  auto r = validate_chain(f.chain);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.broken_at, 7u);
}

TEST(Validate, ReorderedOrDroppedBlocksBreakLinkage) {
  Fixture f;
  f.grow(6);
  auto blocks = f.chain.blocks();
  blocks.erase(blocks.begin() + 3);
  auto r = validate_blocks(f.chain.authority_set(), blocks);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.broken_at, 3u);
}

TEST(Encoding, BlocksRoundTrip) {
  Fixture f;
  f.grow(3, 3);
  for (const auto& b : f.chain.blocks()) EXPECT_EQ(decode_block(encode(b)), b);
  auto bytes = encode(f.chain.blocks()[0]);
  bytes.push_back(0);
  EXPECT_EQ(fxtest::code_of([&] { decode_block(bytes); }), Errc::DecodeError);
}

TEST(Encoding, UndecodableBlockIsReportedAtItsHeight) {
  Fixture f;
  f.grow(5);
  std::vector<Bytes> enc;
  for (const auto& b : f.chain.blocks()) enc.push_back(encode(b));
  EXPECT_TRUE(validate_encoded_blocks(f.chain.authority_set(), enc).ok());
  enc[2].resize(enc[2].size() - 1);
  auto r = validate_encoded_blocks(f.chain.authority_set(), enc);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.broken_at, 2u);
}

TEST(Dump, RoundTripsThroughJsonLines) {
  Fixture f;
  f.grow(4);
  std::stringstream s;
  dump_chain(f.chain, s);
  auto loaded = load_chain_dump(s);
  EXPECT_EQ(loaded, f.chain.blocks());
  std::istringstream bad("{\"height\": 0}\nnot json\n");
  EXPECT_EQ(fxtest::code_of([&] { load_chain_dump(bad); }), Errc::ParseError);
}

TEST(Chain, NeedsAuthorities) {
  EXPECT_EQ(fxtest::code_of([] { Chain("A", {}); }), Errc::InvalidArgument);
}
