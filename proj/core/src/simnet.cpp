#include "forensicross/simnet.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace forensicross {

using json = nlohmann::json;

const KeyPair& World::key(const std::string& name) const {
  auto it = keys.find(name);
  if (it == keys.end()) throw Error(Errc::InvalidArgument, "no identity named '" + name + "'");
  return it->second;
}

std::string World::mutual_set_key(const ChainId& chain, const ChainId& peer) const {
  if (design == Design::Bridge) return chain == kBridgeChainId ? peer : chain;
  return chain < peer ? chain + "|" + peer : peer + "|" + chain;
}

const MutualNodeSet& World::mutual_set(const ChainId& chain, const ChainId& peer) const {
  auto it = mutual_sets.find(mutual_set_key(chain, peer));
  if (it == mutual_sets.end()) throw Error(Errc::InvalidArgument, "no mutual set between " + chain + " and " + peer);
  return it->second;
}

bool World::is_org_chain(const ChainId& chain) const {
  return std::find(org_chains.begin(), org_chains.end(), chain) != org_chains.end();
}

std::string TxMetrics::status() const {
  if (report.rejected) return "rejected";
  if (report.stalled) return "stalled";
  if (report.delivered) return "delivered";
  return "pending";
}

std::string RunResult::event_log_text() const {
  std::string out;
  for (const auto& line : event_log) {
    out += line;
    out += '\n';
  }
  return out;
}

Digest RunResult::event_log_digest() const { return hash(std::string_view(event_log_text())); }

const TxMetrics* RunResult::find_metrics(const std::string& tx_id) const {
  for (const auto& m : metrics) {
    if (m.tx_id == tx_id) return &m;
  }
  return nullptr;
}

namespace {

bool is_case_kind(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::CaseCreate:
    case PayloadKind::AccessControl:
    case PayloadKind::QueryNodeAssign:
    case PayloadKind::StageProposal:
    case PayloadKind::StageVote:
    case PayloadKind::DataAccessLog:
    case PayloadKind::ProvenanceRequest:
      return true;
    default:
      return false;
  }
}

struct StageHashBody {
  std::string case_number;
  ChainId chain;
  StageIndex stage = 0;
  Digest tx_hash;

  Bytes encode() const {
    ByteWriter w;
    w.str(case_number).str(chain).u32(stage).digest(tx_hash);
    return std::move(w).take();
  }
  static StageHashBody decode(ByteView data) {
    ByteReader r(data);
    StageHashBody b;
    b.case_number = r.str();
    b.chain = r.str();
    b.stage = r.u32();
    b.tx_hash = r.digest();
    r.expect_done();
    return b;
  }
};

std::string join_violations(const std::vector<TopologyViolation>& vs) {
  std::string out;
  for (const auto& v : vs) {
    if (!out.empty()) out += "; ";
    out += v.constraint + ": " + v.detail;
  }
  return out;
}

}  // namespace

class Simulation::Impl {
 public:
  explicit Impl(Scenario scenario) : sc(std::move(scenario)), world(std::make_shared<World>()) {
    sc.normalize();
    validate();
    build_world();
    for (const auto& f : sc.faults) schedule(f.at, [this, f] { apply_fault(f); });
    for (const auto& a : sc.workload) schedule(a.at, [this, a] { perform(a); });
  }

  Scenario sc;
  std::shared_ptr<World> world;
  LogicalTime now = 0;

  struct Event {
    LogicalTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return std::tie(a.at, a.seq) > std::tie(b.at, b.seq); }
  };
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::uint64_t next_seq = 0;

  std::vector<std::string> log;
  std::vector<TxMetrics> metrics;
  std::map<std::string, std::size_t> metrics_index;
  ScenarioSummary summary;
  std::vector<ProvenanceOutcome> provenance;

  struct HopInfo {
    std::string route_id;  // empty for stage-hash forwarding
    std::uint32_t hop = 0;
    std::size_t messages = 0;
    Bytes honest_body;
    std::string set_key;
  };
  std::map<LedgerKey, HopInfo> hops;
  std::set<ChainId> mine_scheduled;
  std::map<std::pair<std::string, StageIndex>, std::map<ChainId, Vote>> vote_scripts;

  struct PendingBundle {
    std::string case_number;
    PublicKey requester;
    ChainId requester_chain;
    std::size_t expected = 0;
    std::map<ChainId, ChainSection> sections;
  };
  std::map<std::uint64_t, PendingBundle> bundles;
  std::uint64_t next_bundle = 0;

  // --- setup ---------------------------------------------------------------

  void validate() {
    const auto& t = sc.topology;
    if (auto vs = validate_topology(t, sc.design); !vs.empty()) throw Error(Errc::InvalidTopology, join_violations(vs));
    if (sc.chains.size() != t.k) {
      throw Error(Errc::InvalidArgument, "scenario lists " + std::to_string(sc.chains.size()) + " chains but k=" +
                                             std::to_string(t.k));
    }
    std::set<ChainId> names(sc.chains.begin(), sc.chains.end());
    if (names.size() != sc.chains.size()) throw Error(Errc::InvalidArgument, "duplicate chain names");
    if (names.contains(kBridgeChainId)) throw Error(Errc::InvalidArgument, "'bridge' is reserved");
    for (const auto& c : sc.chains) {
      if (c.find('|') != std::string::npos) throw Error(Errc::InvalidArgument, "chain names may not contain '|'");
    }
    if (sc.stage_count == 0) throw Error(Errc::InvalidArgument, "stage_count must be positive");
    if (sc.stage_names.size() != sc.stage_count) {
      throw Error(Errc::InvalidArgument, "stage_names must list stage_count names");
    }
    if (sc.block_time == 0) throw Error(Errc::InvalidArgument, "block_time must be positive");
    for (const auto& [c, bt] : sc.block_times) {
      if (bt == 0) throw Error(Errc::InvalidArgument, "block time of " + c + " must be positive");
      if (!names.contains(c) && c != kBridgeChainId) {
        throw Error(Errc::WorkloadReferencesUnknownChain, "block_times names unknown chain " + c);
      }
    }
    auto known_any = [&](const ChainId& c) { return names.contains(c) || c == kBridgeChainId; };
    for (const auto& l : sc.link_overrides) {
      if (!known_any(l.from) || !known_any(l.to)) {
        throw Error(Errc::WorkloadReferencesUnknownChain, "link override " + l.from + "->" + l.to);
      }
    }
    std::map<std::string, ChainId> users;
    for (const auto& u : sc.users) {
      if (!names.contains(u.chain)) throw Error(Errc::WorkloadReferencesUnknownChain, "user " + u.name + " on " + u.chain);
      if (!users.emplace(u.name, u.chain).second) throw Error(Errc::InvalidArgument, "duplicate user " + u.name);
    }
    for (const auto& a : sc.workload) {
      const std::string what = std::string(to_string(a.kind)) + " at t=" + std::to_string(a.at);
      if (!names.contains(a.chain)) throw Error(Errc::WorkloadReferencesUnknownChain, what + " acts on " + a.chain);
      for (const auto& d : a.destinations) {
        if (!names.contains(d)) throw Error(Errc::WorkloadReferencesUnknownChain, what + " targets " + d);
        if (d == a.chain) throw Error(Errc::InvalidArgument, what + " lists its own chain as a destination");
      }
      for (const auto& [c, v] : a.votes) {
        if (!names.contains(c)) throw Error(Errc::WorkloadReferencesUnknownChain, what + " scripts a vote for " + c);
      }
      if (a.kind != WorkloadAction::Kind::ProvenanceRequest) {
        auto it = users.find(a.user);
        if (it == users.end()) throw Error(Errc::InvalidArgument, what + " names unknown user '" + a.user + "'");
        if (it->second != a.chain) throw Error(Errc::InvalidArgument, what + ": user " + a.user + " is on " + it->second);
      } else if (a.query_node.empty()) {
        throw Error(Errc::InvalidArgument, what + " needs a query_node");
      }
      if ((a.kind == WorkloadAction::Kind::Route || a.kind == WorkloadAction::Kind::CreateCase) &&
          a.destinations.empty()) {
        throw Error(Errc::InvalidArgument, what + " needs destinations");
      }
      if (a.kind == WorkloadAction::Kind::Access && a.role.empty()) throw Error(Errc::InvalidArgument, what + " needs a role");
      if (sc.design == Design::Mesh && a.kind != WorkloadAction::Kind::Route &&
          a.kind != WorkloadAction::Kind::CreateCase) {
        throw Error(Errc::InvalidArgument, what + ": the case lifecycle needs the bridge design");
      }
    }
    for (const auto& f : sc.faults) {
      if (!names.contains(f.chain)) throw Error(Errc::WorkloadReferencesUnknownChain, "fault on " + f.chain);
      if (f.kind == FaultSpec::Kind::CompromiseMutualNode) {
        if (sc.design == Design::Bridge && f.peer != kBridgeChainId) {
          throw Error(Errc::InvalidArgument, "bridge design mutual sets peer with the bridge");
        }
        if (sc.design == Design::Mesh && (!names.contains(f.peer) || f.peer == f.chain)) {
          throw Error(Errc::WorkloadReferencesUnknownChain, "fault peer " + f.peer);
        }
        if (f.node_index >= t.n_i) throw Error(Errc::InvalidArgument, "fault node index out of range");
      }
    }
  }

  KeyPair& identity(const std::string& name) {
    auto [it, inserted] = world->keys.try_emplace(name);
    if (inserted) {
      it->second = derive_keypair(sc.seed, name);
      world->key_names[it->second.public_key] = name;
    }
    return it->second;
  }

  void build_world() {
    auto& w = *world;
    const auto& t = sc.topology;
    w.design = sc.design;
    w.stage_count = sc.stage_count;
    w.stage_names = sc.stage_names;
    w.org_chains = sc.chains;

    std::map<ChainId, std::vector<PublicKey>> authorities;
    auto make_set = [&](const std::string& key, const ChainId& chain, const ChainId& peer, const std::string& prefix) {
      MutualNodeSet set{chain, peer, {}};
      for (std::uint64_t j = 0; j < t.n_i; ++j) {
        auto id = prefix + "/m" + std::to_string(j);
        set.members.push_back({id, identity(id), std::nullopt});
        authorities[chain].push_back(set.members.back().keys.public_key);
        authorities[peer].push_back(set.members.back().keys.public_key);
      }
      w.mutual_sets.emplace(key, std::move(set));
    };

    if (sc.design == Design::Bridge) {
      for (const auto& c : sc.chains) make_set(c, c, kBridgeChainId, c);
      for (std::uint64_t j = 0; j < t.m - t.b_i; ++j) {
        authorities[kBridgeChainId].push_back(identity("bridge/n" + std::to_string(j)).public_key);
      }
    } else {
      for (std::size_t i = 0; i < sc.chains.size(); ++i) {
        for (std::size_t j = i + 1; j < sc.chains.size(); ++j) {
          const auto& a = sc.chains[i];
          const auto& b = sc.chains[j];
          make_set(w.mutual_set_key(a, b), a, b, a + "-" + b);
        }
      }
    }
    for (const auto& c : sc.chains) {
      const auto hosted = sc.design == Design::Bridge ? t.n_i : (t.k - 1) * t.n_i;
      for (std::uint64_t j = 0; j < t.n - hosted; ++j) {
        authorities[c].push_back(identity(c + "/n" + std::to_string(j)).public_key);
      }
      w.chains.emplace(c, Chain(c, authorities[c]));
      w.contracts.emplace(c, OrgContract(c));
      w.stores.emplace(c, OffchainCaseStore(c));
      w.ledgers.emplace(c, VerificationLedger{});
      identity("contract/" + c);
    }
    if (sc.design == Design::Bridge) {
      w.chains.emplace(kBridgeChainId, Chain(kBridgeChainId, authorities[kBridgeChainId]));
      w.ledgers.emplace(kBridgeChainId, VerificationLedger{});
      w.registry.emplace(sc.stage_count);
      identity("contract/" + kBridgeChainId);
    }
    for (const auto& u : sc.users) {
      w.contracts.at(u.chain).register_user(u.name, identity("user/" + u.name).public_key);
    }
    for (const auto& a : sc.workload) {
      for (const auto& q : a.query_nodes) identity("query/" + q);
      if (!a.query_node.empty()) identity("query/" + a.query_node);
    }
  }

  // --- event loop ------------------------------------------------------------

  void schedule(LogicalTime at, std::function<void()> fn) { queue.push({at, next_seq++, std::move(fn)}); }

  void run_until_idle() {
    while (!queue.empty() && queue.top().at <= sc.max_tick) {
      Event ev = queue.top();
      queue.pop();
      now = std::max(now, ev.at);
      ev.fn();
    }
  }

  void emit(const std::string& ev, json fields = json::object()) {
    fields["t"] = now;
    fields["ev"] = ev;
    log.push_back(fields.dump());
  }

  void contract_error(const std::string& where, const Error& e) {
    ++summary.contract_errors;
    emit("contract_error", {{"at", where}, {"code", std::string(to_string(e.code()))}, {"detail", e.what()}});
  }

  LogicalTime latency(const ChainId& from, const ChainId& to) const {
    for (const auto& l : sc.link_overrides) {
      if (l.from == from && l.to == to) return l.ticks;
    }
    return sc.link_latency;
  }

  LogicalTime block_time(const ChainId& chain) const {
    auto it = sc.block_times.find(chain);
    return it == sc.block_times.end() ? sc.block_time : it->second;
  }

  // --- chains ----------------------------------------------------------------

  SubmitResult submit(const ChainId& chain_id, Transaction tx) {
    auto& chain = world->chains.at(chain_id);
    auto res = chain.submit_transaction(std::move(tx));
    if (res.accepted) {
      schedule_mine(chain_id);
    } else {
      emit("tx_refused", {{"chain", chain_id}, {"reason", res.reason ? std::string(to_string(*res.reason)) : ""}});
    }
    return res;
  }

  void schedule_mine(const ChainId& chain_id) {
    if (!mine_scheduled.insert(chain_id).second) return;
    const auto bt = block_time(chain_id);
    schedule((now / bt + 1) * bt, [this, chain_id] { mine(chain_id); });
  }

  void mine(const ChainId& chain_id) {
    mine_scheduled.erase(chain_id);
    auto& chain = world->chains.at(chain_id);
    if (chain.pending_pool().empty()) return;
    const auto& validator = world->key(world->key_names.at(chain.scheduled_validator(chain.height())));
    const Block& block = chain.mine_block(validator, now);
    ++summary.blocks_mined;
    emit("block", {{"chain", chain_id},
                   {"height", block.height},
                   {"hash", header_digest(block).hex()},
                   {"txs", block.transactions.size()}});
    const auto txs = block.transactions;
    if (world->is_org_chain(chain_id)) {
      for (const auto& tx : txs) on_mined(chain_id, tx);
    }
  }

  void on_mined(const ChainId& chain_id, const Transaction& tx) {
    auto& contract = world->contracts.at(chain_id);
    try {
      contract.apply_mined(tx);
    } catch (const Error& e) {
      contract_error(chain_id, e);
    }
    if (!tx.destination_chains.empty()) start_route(chain_id, tx);
    if (!is_case_kind(tx.payload_kind)) return;
    std::string case_number;
    try {
      case_number = case_number_of(tx);
    } catch (const Error& e) {
      contract_error(chain_id, e);
      return;
    }
    const auto* local = contract.find_case(case_number);
    if (local == nullptr) return;
    world->stores.at(chain_id).append(case_number, local->stage, tx);
    if (sc.design == Design::Bridge) {
      StageHashBody body{case_number, chain_id, local->stage, tx_digest(tx)};
      RelayRecord rec{EnvelopePurpose::StageHash, tx.tx_id, chain_id, {kBridgeChainId}, body.encode()};
      send_hop(rec, rec.canonical_body, world->mutual_set_key(chain_id, kBridgeChainId), chain_id, kBridgeChainId, 1,
               "");
    }
  }

  // --- routing ---------------------------------------------------------------

  TxMetrics& open_metrics(const Transaction& tx, std::vector<ChainId> acceptors) {
    TxMetrics m;
    m.tx_id = tx.tx_id;
    m.kind = tx.payload_kind;
    m.source = tx.source_chain;
    m.destinations = std::move(acceptors);
    m.report.tx_id = tx.tx_id;
    m.report.first_receipt = now;
    metrics_index[tx.tx_id] = metrics.size();
    metrics.push_back(std::move(m));
    return metrics.back();
  }

  TxMetrics* find_metrics(const std::string& id) {
    auto it = metrics_index.find(id);
    return it == metrics_index.end() ? nullptr : &metrics[it->second];
  }

  void start_route(const ChainId& chain_id, const Transaction& tx) {
    open_metrics(tx, tx.destination_chains);
    auto rec = relay_record(tx);
    emit("route", {{"tx", tx.tx_id},
                   {"kind", std::string(to_string(tx.payload_kind))},
                   {"source", chain_id},
                   {"destinations", tx.destination_chains}});
    if (sc.design == Design::Bridge) {
      send_hop(rec, rec.canonical_body, world->mutual_set_key(chain_id, kBridgeChainId), chain_id, kBridgeChainId, 1,
               tx.tx_id);
    } else {
      for (const auto& d : tx.destination_chains) {
        if (!world->is_org_chain(d)) {
          contract_error(chain_id, Error(Errc::WorkloadReferencesUnknownChain, "destination " + d));
          continue;
        }
        send_hop(rec, rec.canonical_body, world->mutual_set_key(chain_id, d), chain_id, d, 1, tx.tx_id);
      }
    }
  }

  void send_hop(const RelayRecord& rec, const Bytes& honest, const std::string& set_key, const ChainId& from,
                const ChainId& target, std::uint32_t hop, const std::string& route_id) {
    const auto& set = world->mutual_sets.at(set_key);
    LedgerKey key{rec.purpose, rec.origin_tx_id, target};
    hops[key] = HopInfo{route_id, hop, set.size(), honest, set_key};
    const auto arrive = now + latency(from, target);
    for (const auto& member : set.members) {
      auto env = translate(rec, member.id, set, target);
      ++summary.envelopes_sent;
      schedule(arrive, [this, env = std::move(env), set_key] { deliver(env, set_key); });
    }
  }

  void deliver(const TranslatedEnvelope& env, const std::string& set_key) {
    ++summary.envelopes_delivered;
    auto& ledger = world->ledgers.at(env.target_chain);
    LedgerKey key{env.purpose, env.origin_tx_id, env.target_chain};
    const bool fresh = ledger.find(key) == nullptr;
    auto out = ledger.submit(env, world->mutual_sets.at(set_key));
    if (out.error) {
      emit("envelope_ignored", {{"node", env.translator_node},
                                {"target", env.target_chain},
                                {"origin", env.origin_tx_id},
                                {"reason", std::string(to_string(*out.error))}});
    }
    if (fresh && ledger.find(key) != nullptr) {
      schedule(now + sc.pending_timeout, [this, key] {
        if (world->ledgers.at(key.target_chain).expire(key)) decided(key, VerificationStatus::Expired);
      });
    }
    if (out.newly_decided) decided(key, out.status);
  }

  void decided(const LedgerKey& key, VerificationStatus status) {
    const auto& entry = *world->ledgers.at(key.target_chain).find(key);
    const auto& info = hops.at(key);
    const bool malicious =
        status == VerificationStatus::Validated && entry.validated_body && *entry.validated_body != info.honest_body;
    switch (status) {
      case VerificationStatus::Validated: ++summary.ledger_validated; break;
      case VerificationStatus::Rejected: ++summary.ledger_rejected; break;
      case VerificationStatus::Expired: ++summary.ledger_expired; break;
      case VerificationStatus::Pending: break;
    }
    if (malicious) ++summary.malicious_validated;
    emit("verified", {{"purpose", std::string(to_string(key.purpose))},
                      {"origin", key.origin_tx_id},
                      {"target", key.target_chain},
                      {"hop", info.hop},
                      {"status", std::string(to_string(status))},
                      {"submissions", entry.submissions.size()},
                      {"malicious", malicious}});
    if (auto* m = find_metrics(info.route_id)) {
      m->report.hops.push_back({info.route_id, info.hop, key.target_chain, now, info.messages, status});
      if (status == VerificationStatus::Rejected) m->report.rejected = true;
      if (status == VerificationStatus::Expired) m->report.stalled = true;
      if (malicious) m->malicious_validated = true;
    }
    if (status != VerificationStatus::Validated) return;
    if (key.target_chain == kBridgeChainId) {
      bridge_accept(key, *entry.validated_body);
    } else {
      org_accept(key, *entry.validated_body);
    }
  }

  void mark_accepted(const std::string& route_id, const ChainId& chain) {
    auto* m = find_metrics(route_id);
    if (m == nullptr) return;
    m->accepted_at.emplace(chain, now);
    m->report.last_acceptance = std::max(m->report.last_acceptance, now);
    m->report.delivered = std::all_of(m->destinations.begin(), m->destinations.end(),
                                      [&](const ChainId& d) { return m->accepted_at.contains(d); });
  }

  Transaction record_envelope(const ChainId& chain_id, const LedgerKey& key, const Bytes& body) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(key.purpose)).str(key.origin_tx_id).bytes(body);
    auto tx = make_transaction(world->key("contract/" + chain_id), PayloadKind::InterchainEnvelope,
                               std::move(w).take(), chain_id);
    submit(chain_id, tx);
    return tx;
  }

  // --- bridge side -------------------------------------------------------------

  void bridge_accept(const LedgerKey& key, const Bytes& body) {
    record_envelope(kBridgeChainId, key, body);
    auto& registry = *world->registry;
    const auto& info = hops.at(key);
    if (key.purpose == EnvelopePurpose::StageHash) {
      try {
        auto sh = StageHashBody::decode(body);
        registry.record_stage_hash(sh.case_number, sh.chain, sh.stage, sh.tx_hash);
        emit("stage_hash", {{"case", sh.case_number}, {"chain", sh.chain}, {"stage", sh.stage}});
      } catch (const Error& e) {
        contract_error("bridge", e);
      }
      return;
    }
    mark_accepted(info.route_id, kBridgeChainId);
    const Bytes honest = info.honest_body;
    const std::string route_id = info.route_id;
    try {
      auto origin = decode_canonical_body(body);
      if (origin.source_chain != key.origin_tx_id.substr(0, key.origin_tx_id.find(':'))) {
        throw Error(Errc::WrongSourceChain, "origin " + origin.source_chain + " does not match " + key.origin_tx_id);
      }
      const auto& src = origin.source_chain;
      switch (origin.payload_kind) {
        case PayloadKind::CaseCreate: {
          const auto& c = registry.register_case(origin);
          emit("case_registered", {{"case", c.case_number}, {"source", src}, {"fanout", c.destination_chains}});
          forward(origin, body, honest, c.destination_chains, route_id);
          break;
        }
        case PayloadKind::AccessControl: {
          auto b = AccessControlBody::decode(origin.body);
          registry.store_policy(b.case_number, src, b.policy);
          emit("policy_stored", {{"case", b.case_number}, {"digest", b.policy.digest().hex()}});
          forward(origin, body, honest, origin.destination_chains, route_id);
          break;
        }
        case PayloadKind::QueryNodeAssign: {
          auto b = QueryNodeAssignBody::decode(origin.body);
          registry.assign_query_nodes(b.case_number, src, b.keys);
          emit("query_nodes_assigned", {{"case", b.case_number}, {"count", b.keys.size()}});
          break;
        }
        case PayloadKind::StageProposal: {
          auto b = StageProposalBody::decode(origin.body);
          const auto& round = registry.propose_stage(b.case_number, src, b.target_stage);
          const auto round_no = round.round;
          emit("stage_proposed", {{"case", b.case_number}, {"proposer", src}, {"target", b.target_stage},
                                  {"round", round_no}});
          // The proposing organization approves its own proposal.
          auto outcome = registry.process_stage_vote(b.case_number, src, b.target_stage, Vote::Approve());
          if (outcome.kind != StageOutcome::Kind::AwaitingVotes) {
            conclude(b.case_number, b.target_stage, round_no, outcome);
            break;
          }
          std::vector<ChainId> others;
          for (const auto& p : registry.require_case(b.case_number).participants()) {
            if (p != src) others.push_back(p);
          }
          notify(others, {NoticeBody::Kind::StageProposed, b.case_number, b.target_stage, round_no, {}});
          break;
        }
        case PayloadKind::StageVote: {
          auto b = StageVoteBody::decode(origin.body);
          const auto& c = registry.require_case(b.case_number);
          if (!c.open_round || c.open_round->round != b.round) {
            throw Error(Errc::StaleStage, "vote for round " + std::to_string(b.round) + " of " + b.case_number);
          }
          auto outcome = registry.process_stage_vote(b.case_number, src, b.stage,
                                                     b.approve ? Vote::Approve() : Vote::Reject(b.reason));
          emit("stage_vote", {{"case", b.case_number}, {"chain", src}, {"stage", b.stage}, {"approve", b.approve}});
          if (outcome.kind != StageOutcome::Kind::AwaitingVotes) conclude(b.case_number, b.stage, b.round, outcome);
          break;
        }
        case PayloadKind::ProvenanceRequest:
          provenance_request(origin);
          break;
        default:
          forward(origin, body, honest, origin.destination_chains, route_id);
          break;
      }
    } catch (const Error& e) {
      contract_error("bridge", e);
    }
  }

  void conclude(const std::string& case_number, StageIndex stage, std::uint32_t round, const StageOutcome& outcome) {
    const auto& c = world->registry->require_case(case_number);
    if (outcome.kind == StageOutcome::Kind::Advanced) {
      emit("stage_advanced", {{"case", case_number}, {"stage", stage}});
      notify(c.participants(), {NoticeBody::Kind::StageAdvanced, case_number, stage, round, {}});
    } else {
      emit("stage_blocked", {{"case", case_number}, {"stage", stage}, {"reasons", outcome.reasons}});
      notify({outcome.proposer}, {NoticeBody::Kind::StageBlocked, case_number, stage, round, outcome.reasons});
    }
  }

  void notify(const std::vector<ChainId>& recipients, const NoticeBody& notice) {
    if (recipients.empty()) return;
    auto tx = make_transaction(world->key("contract/" + kBridgeChainId), PayloadKind::InterchainEnvelope,
                               notice.encode(), kBridgeChainId, recipients);
    auto res = submit(kBridgeChainId, tx);
    if (!res.accepted) return;
    tx.tx_id = res.tx_id;
    open_metrics(tx, recipients);
    emit("notice", {{"tx", tx.tx_id},
                    {"kind", std::string(to_string(notice.kind))},
                    {"case", notice.case_number},
                    {"stage", notice.stage},
                    {"to", recipients}});
    auto rec = relay_record(tx);
    for (const auto& d : recipients) {
      send_hop(rec, rec.canonical_body, world->mutual_set_key(d, kBridgeChainId), kBridgeChainId, d, 1, tx.tx_id);
    }
  }

  void forward(const Transaction& origin, const Bytes& body, const Bytes& honest, const std::vector<ChainId>& dests,
               const std::string& route_id) {
    RelayRecord rec{EnvelopePurpose::Relay, origin.tx_id, origin.source_chain, origin.destination_chains, body};
    for (const auto& d : dests) {
      if (!world->is_org_chain(d) || d == origin.source_chain) {
        contract_error("bridge", Error(Errc::WorkloadReferencesUnknownChain, "cannot forward to " + d));
        continue;
      }
      send_hop(rec, honest, world->mutual_set_key(d, kBridgeChainId), kBridgeChainId, d, 2, route_id);
    }
  }

  void provenance_request(const Transaction& origin) {
    auto& registry = *world->registry;
    auto b = ProvenanceRequestBody::decode(origin.body);
    const auto& requester = origin.sender_public_key;
    registry.require_case(b.case_number);
    if (!registry.is_query_node(b.case_number, requester)) {
      registry.record_denial(b.case_number, requester, now);
      ++summary.provenance_denials;
      emit("provenance_denied", {{"case", b.case_number}, {"requester", requester.hex()}});
      notify({origin.source_chain}, {NoticeBody::Kind::ProvenanceDenied, b.case_number,
                                     registry.require_case(b.case_number).current_stage,
                                     static_cast<std::uint32_t>(registry.denials().size()),
                                     {"not a query node"}});
      return;
    }
    const auto participants = registry.require_case(b.case_number).participants();
    const auto id = next_bundle++;
    bundles[id] = PendingBundle{b.case_number, requester, origin.source_chain, participants.size(), {}};
    emit("provenance_fanout", {{"case", b.case_number}, {"chains", participants}});
    for (const auto& p : participants) {
      ++summary.channel_messages;
      schedule(now + latency(kBridgeChainId, p), [this, id, p] {
        auto section = collect_section(world->stores.at(p), bundles.at(id).case_number, sc.stage_count);
        ++summary.channel_messages;
        schedule(now + latency(p, kBridgeChainId),
                 [this, id, p, section = std::move(section)] { section_arrived(id, p, section); });
      });
    }
  }

  void section_arrived(std::uint64_t id, const ChainId& chain, const ChainSection& section) {
    auto& pending = bundles.at(id);
    pending.sections[chain] = section;
    if (pending.sections.size() < pending.expected) return;
    std::vector<ChainSection> sections;
    for (const auto& p : world->registry->require_case(pending.case_number).participants()) {
      sections.push_back(pending.sections.at(p));
    }
    auto bundle = assemble_bundle(*world->registry, pending.case_number, std::move(sections), pending.requester);
    ++summary.channel_messages;
    schedule(now + latency(kBridgeChainId, pending.requester_chain), [this, id, bundle = std::move(bundle)] {
      const auto& pending = bundles.at(id);
      ProvenanceOutcome out;
      out.case_number = pending.case_number;
      out.requester = pending.requester;
      out.delivered_at = now;
      out.bundle = bundle;
      out.report = verify_and_localize(bundle);
      json verdicts = json::object();
      for (const auto& v : out.report.verdicts) {
        verdicts[v.chain_id] = v.intact ? json("intact") : json(v.tampered_stages);
      }
      emit("provenance_delivered", {{"case", out.case_number}, {"verdicts", verdicts}});
      provenance.push_back(std::move(out));
      bundles.erase(id);
    });
  }

  // --- destination side ----------------------------------------------------

  void org_accept(const LedgerKey& key, const Bytes& body) {
    const auto& chain_id = key.target_chain;
    record_envelope(chain_id, key, body);
    mark_accepted(hops.at(key).route_id, chain_id);
    auto& contract = world->contracts.at(chain_id);
    try {
      auto origin = decode_canonical_body(body);
      if (origin.source_chain == kBridgeChainId) {
        auto notice = NoticeBody::decode(origin.body);
        contract.apply_notice(notice);
        emit("notice_applied", {{"chain", chain_id},
                                {"kind", std::string(to_string(notice.kind))},
                                {"case", notice.case_number},
                                {"stage", notice.stage}});
        if (notice.kind == NoticeBody::Kind::StageProposed) cast_vote(chain_id, notice);
      } else {
        contract.apply_inbound(origin);
      }
    } catch (const Error& e) {
      contract_error(chain_id, e);
    }
  }

  void cast_vote(const ChainId& chain_id, const NoticeBody& notice) {
    Vote vote = Vote::Approve();
    if (auto it = vote_scripts.find({notice.case_number, notice.stage}); it != vote_scripts.end()) {
      if (auto v = it->second.find(chain_id); v != it->second.end()) vote = v->second;
    }
    auto tx = world->contracts.at(chain_id).stage_vote(world->key("contract/" + chain_id), notice.case_number,
                                                         notice.stage, notice.round, vote.approve, vote.reason);
    submit(chain_id, std::move(tx));
  }

  // --- workload and faults ---------------------------------------------------

  void perform(const WorkloadAction& a) {
    auto& contract = world->contracts.at(a.chain);
    emit("action", {{"action", std::string(to_string(a.kind))}, {"chain", a.chain}, {"case", a.case_number}});
    try {
      using K = WorkloadAction::Kind;
      switch (a.kind) {
        case K::Route: {
          ByteWriter w;
          w.str(a.data).u64(now);
          submit(a.chain, make_transaction(world->key("user/" + a.user), PayloadKind::InterchainEnvelope,
                                           std::move(w).take(), a.chain, a.destinations));
          break;
        }
        case K::CreateCase:
          submit(a.chain, contract.create_case_request(world->key("user/" + a.user), a.case_number, a.destinations));
          break;
        case K::DispatchPolicy:
          submit(a.chain, contract.dispatch_access_policy(world->key("user/" + a.user), a.case_number, sc.policy));
          break;
        case K::AssignQueryNodes: {
          std::vector<PublicKey> keys;
          for (const auto& q : a.query_nodes) keys.push_back(world->key("query/" + q).public_key);
          submit(a.chain, contract.query_node_assignment(world->key("user/" + a.user), a.case_number, keys));
          break;
        }
        case K::ProposeStage: {
          const auto* local = contract.find_case(a.case_number);
          if (local == nullptr) throw Error(Errc::UnknownCase, a.case_number + " is not known on " + a.chain);
          const auto target = a.target_stage.value_or(local->stage + 1);
          if (!a.role.empty() &&
              (!local->policy ||
               check_access(*local->policy, a.role, local->stage, Action::ProposeStage) == AccessDecision::Denied)) {
            emit("proposal_denied", {{"chain", a.chain}, {"case", a.case_number}, {"role", a.role}});
            break;
          }
          vote_scripts[{a.case_number, target}] = a.votes;
          submit(a.chain, contract.stage_proposal(world->key("user/" + a.user), a.case_number, target, now));
          break;
        }
        case K::Access: {
          ++summary.access_attempts;
          auto attempt = contract.log_data_access(world->chains.at(a.chain), world->key("user/" + a.user), a.role,
                                                  a.case_number, a.action, hash(std::string_view(a.data)), now);
          if (attempt.submission.accepted) schedule_mine(a.chain);
          emit("access", {{"chain", a.chain},
                          {"case", a.case_number},
                          {"role", a.role},
                          {"op", std::string(to_string(a.action))},
                          {"stage", attempt.entry.stage},
                          {"decision", std::string(to_string(attempt.entry.decision))}});
          break;
        }
        case K::ProvenanceRequest:
          submit(a.chain, contract.provenance_request(world->key("query/" + a.query_node), a.case_number, now));
          break;
      }
    } catch (const Error& e) {
      emit("action_failed", {{"action", std::string(to_string(a.kind))},
                             {"chain", a.chain},
                             {"code", std::string(to_string(e.code()))},
                             {"detail", e.what()}});
    }
  }

  void apply_fault(const FaultSpec& f) {
    if (f.kind == FaultSpec::Kind::CompromiseMutualNode) {
      auto& set = world->mutual_sets.at(world->mutual_set_key(f.chain, f.peer));
      auto& node = set.members.at(f.node_index);
      node.compromise = f.rule;
      emit("fault", {{"kind", "compromise_mutual_node"}, {"node", node.id}, {"rule", f.rule.str()}});
      return;
    }
    try {
      world->stores.at(f.chain).tamper(f.case_number, f.stage, f.tx_index);
      emit("fault", {{"kind", "tamper_offchain"},
                     {"chain", f.chain},
                     {"case", f.case_number},
                     {"stage", f.stage},
                     {"tx_index", f.tx_index}});
    } catch (const Error& e) {
      emit("fault_skipped", {{"chain", f.chain}, {"detail", e.what()}});
    }
  }
};

Simulation::Simulation(Scenario scenario) : impl_(std::make_unique<Impl>(std::move(scenario))) {}
Simulation::~Simulation() = default;

void Simulation::run_until_idle() { impl_->run_until_idle(); }

DeliveryReport Simulation::route_transaction(const Transaction& tx) {
  auto res = impl_->submit(tx.source_chain, tx);
  if (!res.accepted) throw Error(res.reason.value_or(Errc::InvalidArgument), "transaction refused by " + tx.source_chain);
  impl_->run_until_idle();
  auto* m = impl_->find_metrics(res.tx_id);
  if (m == nullptr) throw Error(Errc::InvalidArgument, res.tx_id + " was not routed");
  return m->report;
}

LogicalTime Simulation::now() const { return impl_->now; }
const World& Simulation::world() const { return *impl_->world; }
World& Simulation::mutable_world() { return *impl_->world; }
const Scenario& Simulation::scenario() const { return impl_->sc; }

RunResult Simulation::finish() {
  RunResult r;
  r.event_log = std::move(impl_->log);
  r.metrics = std::move(impl_->metrics);
  r.summary = impl_->summary;
  r.provenance = std::move(impl_->provenance);
  r.world = impl_->world;
  impl_->log.clear();
  impl_->metrics.clear();
  impl_->metrics_index.clear();
  impl_->provenance.clear();
  return r;
}

RunResult run(const Scenario& scenario) {
  Simulation sim(scenario);
  sim.run_until_idle();
  return sim.finish();
}

// ---------------------------------------------------------------------------

std::vector<DesignComparisonRow> compare_designs(std::uint64_t k_min, std::uint64_t k_max, Pattern pattern,
                                                 LogicalTime link_latency, std::uint64_t seed) {
  if (k_min < 2 || k_min > k_max) {
    throw Error(Errc::InvalidArgument, "need 2 <= k_min <= k_max for a comparison");
  }
  std::vector<DesignComparisonRow> rows;
  for (auto k = k_min; k <= k_max; ++k) {
    for (auto design : {Design::Mesh, Design::Bridge}) {
      Scenario sc;
      sc.name = "compare";
      sc.seed = seed;
      sc.design = design;
      sc.topology = minimal_params(k, design);
      sc.link_latency = link_latency;
      sc.normalize();
      for (std::size_t i = 0; i < sc.chains.size(); ++i) {
        sc.users.push_back({"u" + sc.chains[i], sc.chains[i]});
        WorkloadAction a;
        a.kind = WorkloadAction::Kind::CreateCase;
        a.at = 1;
        a.chain = sc.chains[i];
        a.user = "u" + sc.chains[i];
        a.case_number = "CMP-" + std::to_string(k) + "-" + sc.chains[i];
        if (pattern == Pattern::SingleDestination) {
          a.destinations = {sc.chains[(i + 1) % sc.chains.size()]};
        } else {
          for (const auto& c : sc.chains) {
            if (c != a.chain) a.destinations.push_back(c);
          }
        }
        sc.workload.push_back(std::move(a));
      }
      auto result = run(sc);
      DesignComparisonRow row;
      row.k = k;
      row.design = design;
      row.pattern = pattern;
      row.mutual_nodes = design == Design::Mesh ? mesh_mutual_nodes(k) : bridge_mutual_nodes(k);
      for (const auto& m : result.metrics) {
        if (m.kind != PayloadKind::CaseCreate || !m.report.delivered) continue;
        ++row.routed;
        row.mean_duration += static_cast<double>(m.report.duration());
        row.mean_messages += static_cast<double>(m.report.message_count());
        row.mean_verification_events += static_cast<double>(m.report.verification_events());
      }
      if (row.routed > 0) {
        const auto n = static_cast<double>(row.routed);
        row.mean_duration /= n;
        row.mean_messages /= n;
        row.mean_verification_events /= n;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_comparison_csv(const std::vector<DesignComparisonRow>& rows, std::ostream& out) {
  out << "k,design,pattern,mean_duration,mean_messages,mean_verification_events,mutual_nodes,routed\n";
  for (const auto& r : rows) {
    out << r.k << ',' << to_string(r.design) << ',' << to_string(r.pattern) << ',' << r.mean_duration << ','
        << r.mean_messages << ',' << r.mean_verification_events << ',' << r.mutual_nodes << ',' << r.routed << '\n';
  }
}

void write_metrics_csv(const RunResult& result, Design design, std::ostream& out) {
  out << "tx_id,kind,source,destinations,design,receipt_tick,acceptance_tick,duration,verification_events,messages,"
         "status,malicious_validated\n";
  for (const auto& m : result.metrics) {
    std::string dests;
    for (const auto& d : m.destinations) dests += (dests.empty() ? "" : ";") + d;
    const auto& r = m.report;
    out << m.tx_id << ',' << to_string(m.kind) << ',' << m.source << ',' << dests << ',' << to_string(design) << ','
        << r.first_receipt << ',';
    if (r.delivered) out << r.last_acceptance << ',' << r.duration();
    else out << ',';
    out << ',' << r.verification_events() << ',' << r.message_count() << ',' << m.status() << ','
        << (m.malicious_validated ? 1 : 0) << '\n';
  }
}

void write_registry_snapshot(const World& world, std::ostream& out) {
  json snap = json::object();
  snap["design"] = std::string(to_string(world.design));
  snap["stage_count"] = world.stage_count;
  json chains = json::object();
  for (const auto& [id, chain] : world.chains) {
    chains[id] = {{"height", chain.height()},
                  {"head", chain.blocks().empty() ? Digest::zero().hex() : header_digest(chain.blocks().back()).hex()}};
  }
  snap["chains"] = chains;
  json policies = json::object();
  for (const auto& [id, contract] : world.contracts) {
    json per_case = json::object();
    for (const auto& [num, c] : contract.cases()) {
      per_case[num] = {{"stage", c.stage}, {"policy", c.policy ? c.policy->digest().hex() : ""}};
    }
    policies[id] = per_case;
  }
  snap["organizations"] = policies;
  if (world.registry) {
    const auto& reg = *world.registry;
    json cases = json::object();
    for (const auto& [num, c] : reg.cases()) {
      json roots = json::object();
      for (const auto& p : c.participants()) {
        json leaves = json::array();
        for (const auto& l : reg.stage_leaves(num, p)) leaves.push_back(l.hex());
        roots[p] = {{"root", reg.chain_root(num, p).hex()}, {"stage_leaves", leaves}};
      }
      json qn = json::array();
      for (const auto& k : c.query_nodes) qn.push_back(k.hex());
      cases[num] = {{"source", c.source_chain},
                    {"destinations", c.destination_chains},
                    {"stage", c.current_stage},
                    {"rounds", c.rounds_started},
                    {"policy", c.role_matrix ? c.role_matrix->digest().hex() : ""},
                    {"query_nodes", qn},
                    {"chains", roots}};
    }
    snap["cases"] = cases;
    json denials = json::array();
    for (const auto& d : reg.denials()) {
      denials.push_back({{"case", d.case_number}, {"requester", d.requester.hex()}, {"t", d.logical_time}});
    }
    snap["denials"] = denials;
  }
  out << snap.dump(2) << '\n';
}

}  // namespace forensicross
