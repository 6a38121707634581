#include <gtest/gtest.h>

#include "forensicross/provenance.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace forensicross;
using fxtest::to_digest;

namespace {

oracle::Hash raw(const Digest& d) {
  oracle::Hash h;
  std::copy(d.bytes.begin(), d.bytes.end(), h.begin());
  return h;
}

// Two chains, five stages, three transactions per stage, with the bridge
// registry fed the same hashes the stores hold.
struct CaseWorld {
  BridgeRegistry registry{5};
  std::map<ChainId, OffchainCaseStore> stores;
  PublicKey query = derive_keypair(51, "query").public_key;

  CaseWorld() {
    registry.register_case("C-1", "A", {"B"}, derive_keypair(51, "creator").public_key);
    registry.assign_query_nodes("C-1", "A", {query});
    for (auto c : {"A", "B"}) stores.emplace(c, OffchainCaseStore(c));
    auto user = derive_keypair(51, "user");
    for (StageIndex s = 0; s < 5; ++s) {
      if (s > 0) {
        registry.propose_stage("C-1", "A", s);
        registry.process_stage_vote("C-1", "A", s, Vote::Approve());
        registry.process_stage_vote("C-1", "B", s, Vote::Approve());
      }
      for (const ChainId c : {"A", "B"}) {
        for (int i = 0; i < 3; ++i) {
          ByteWriter w;
          w.str("C-1").str(c + std::to_string(s) + "-" + std::to_string(i));
          auto tx = make_transaction(user, PayloadKind::DataAccessLog, std::move(w).take(), c);
          tx.tx_id = c + ":" + std::to_string(s * 3 + i);
          stores.at(c).append("C-1", s, tx);
          registry.record_stage_hash("C-1", c, s, tx_digest(tx));
        }
      }
    }
  }

  TamperReport verify() { return verify_and_localize(extract_provenance(registry, stores, "C-1", query, 99)); }
};

}  // namespace

TEST(StageLeaf, EmptySingleAndTriple) {
  EXPECT_EQ(stage_leaf({}), hash(hash(std::string_view("")).view()));
  auto d1 = hash(std::string_view("1"));
  EXPECT_EQ(stage_leaf(std::vector<Digest>{d1}), hash(hash(d1.view()).view()));
  std::vector<Digest> three{d1, hash(std::string_view("2")), hash(std::string_view("3"))};
  EXPECT_EQ(stage_leaf(three), to_digest(oracle::stage_leaf({raw(three[0]), raw(three[1]), raw(three[2])})));
}

TEST(ChainRoot, ShapesMatchReferenceTree) {
  std::vector<Digest> l;
  for (int i = 0; i < 5; ++i) l.push_back(hash(std::string_view(std::to_string(i))));
  EXPECT_EQ(case_chain_root(std::span(l).first(1), 1), l[0]);

  auto pair = [](const Digest& a, const Digest& b) {
    return to_digest(oracle::sha256(oracle::cat(raw(a), raw(b))));
  };
  EXPECT_EQ(case_chain_root(std::span(l).first(4), 4), pair(pair(l[0], l[1]), pair(l[2], l[3])));

  std::vector<oracle::Hash> r5;
  for (const auto& d : l) r5.push_back(raw(d));
  EXPECT_EQ(case_chain_root(l, 5), to_digest(oracle::merkle(r5)));
  EXPECT_EQ(fxtest::code_of([&] { case_chain_root(l, 4); }), Errc::StageCountMismatch);
}

TEST(Extract, QueryNodeReceivesEveryParticipant) {
  CaseWorld w;
  auto bundle = extract_provenance(w.registry, w.stores, "C-1", w.query, 1);
  ASSERT_EQ(bundle.chains.size(), 2u);
  ASSERT_EQ(bundle.bridge.size(), 2u);
  EXPECT_EQ(bundle.chains[0].chain_id, "A");
  EXPECT_EQ(bundle.chains[1].chain_id, "B");
  EXPECT_EQ(bundle.chains[0].stages.size(), 5u);
  EXPECT_EQ(bundle.sealed_for, w.query);
}

TEST(Extract, OthersAreDeniedAndLogged) {
  CaseWorld w;
  auto intruder = derive_keypair(51, "intruder").public_key;
  EXPECT_EQ(fxtest::code_of([&] { extract_provenance(w.registry, w.stores, "C-1", intruder, 5); }),
            Errc::NotQueryNode);
  ASSERT_EQ(w.registry.denials().size(), 1u);
  EXPECT_EQ(w.registry.denials()[0].requester, intruder);
}

TEST(Localize, UntamperedBundleIsIntact) {
  CaseWorld w;
  auto report = w.verify();
  EXPECT_TRUE(report.all_intact());
  EXPECT_EQ(report.verdicts.size(), 2u);
}

TEST(Localize, SingleMutationIsPinnedToItsStage) {
  CaseWorld w;
  w.stores.at("B").tamper("C-1", 2, 1);
  auto report = w.verify();
  EXPECT_TRUE(report.find("A")->intact);
  EXPECT_FALSE(report.find("B")->intact);
  EXPECT_EQ(report.find("B")->tampered_stages, std::vector<StageIndex>{2});
}

TEST(Localize, TwoStagesOnOneChain) {
  CaseWorld w;
  w.stores.at("A").tamper("C-1", 1, 0);
  w.stores.at("A").tamper("C-1", 4, 2);
  auto report = w.verify();
  EXPECT_EQ(report.find("A")->tampered_stages, (std::vector<StageIndex>{1, 4}));
  EXPECT_TRUE(report.find("B")->intact);
}

TEST(Localize, DroppedTransactionIsDetected) {
  CaseWorld w;
  auto bundle = extract_provenance(w.registry, w.stores, "C-1", w.query, 1);
  bundle.chains[0].stages[3].pop_back();
  auto report = verify_and_localize(bundle);
  EXPECT_EQ(report.find("A")->tampered_stages, std::vector<StageIndex>{3});
}

TEST(Localize, MissingBridgeReferenceIsMalformed) {
  CaseWorld w;
  auto bundle = extract_provenance(w.registry, w.stores, "C-1", w.query, 1);
  bundle.bridge.pop_back();
  EXPECT_EQ(fxtest::code_of([&] { verify_and_localize(bundle); }), Errc::MalformedBundle);
}

TEST(Store, TamperOutOfRangeIsAnError) {
  OffchainCaseStore s("A");
  EXPECT_FALSE(s.has_case("C-1"));
  EXPECT_EQ(fxtest::code_of([&] { s.tamper("C-1", 0, 0); }), Errc::InvalidArgument);
}

TEST(Matrix, MarksTamperedCells) {
  CaseWorld w;
  w.stores.at("B").tamper("C-1", 2, 0);
  auto text = render_tamper_matrix(w.verify(), {"identification", "preservation", "collection", "analysis",
                                                "reporting"});
  EXPECT_NE(text.find("2 collection"), std::string::npos);
  EXPECT_EQ(text.find("TAMPERED"), text.rfind("TAMPERED"));
}
