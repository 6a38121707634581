#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "forensicross/simnet.hpp"

namespace forensicross {

std::string_view to_string(WorkloadAction::Kind kind) noexcept {
  switch (kind) {
    case WorkloadAction::Kind::Route: return "route";
    case WorkloadAction::Kind::CreateCase: return "create_case";
    case WorkloadAction::Kind::DispatchPolicy: return "dispatch_policy";
    case WorkloadAction::Kind::AssignQueryNodes: return "assign_query_nodes";
    case WorkloadAction::Kind::ProposeStage: return "propose_stage";
    case WorkloadAction::Kind::Access: return "access";
    case WorkloadAction::Kind::ProvenanceRequest: return "provenance_request";
  }
  return "?";
}

std::vector<std::string> Scenario::default_stage_names() {
  return {"identification", "preservation", "collection", "analysis", "reporting"};
}

void Scenario::normalize() {
  if (chains.empty()) {
    for (std::uint64_t i = 0; i < topology.k; ++i) {
      chains.push_back(i < 26 ? std::string(1, static_cast<char>('A' + i)) : "chain" + std::to_string(i));
    }
  }
  if (stage_names.empty()) {
    auto defaults = default_stage_names();
    for (std::uint32_t s = 0; s < stage_count; ++s) {
      stage_names.push_back(s < defaults.size() && stage_count == defaults.size() ? defaults[s]
                                                                                  : "stage" + std::to_string(s));
    }
  }
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  throw Error(Errc::ParseError, "line " + std::to_string(mark.line + 1) + ": " + what);
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!map.IsMap()) fail_at(map, where + " must be a mapping");
  for (const auto& kv : map) {
    auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) fail_at(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const YAML::Node& map, const char* key, const std::string& where) {
  auto node = map[key];
  if (!node) fail_at(map, "missing required key '" + std::string(key) + "' in " + where);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
T get_or(const YAML::Node& map, const char* key, T fallback, const std::string& where) {
  if (!map[key]) return fallback;
  return get<T>(map, key, where);
}

Vote parse_vote(const YAML::Node& node) {
  auto text = node.as<std::string>();
  if (text == "approve") return Vote::Approve();
  if (text == "reject") return Vote::Reject("rejected");
  if (text.starts_with("reject:")) {
    auto reason = text.substr(7);
    while (!reason.empty() && reason.front() == ' ') reason.erase(reason.begin());
    return Vote::Reject(reason.empty() ? "rejected" : reason);
  }
  fail_at(node, "vote must be 'approve', 'reject' or 'reject: <reason>'");
}

WorkloadAction::Kind parse_action_kind(const YAML::Node& node) {
  auto name = node.as<std::string>();
  for (auto k : {WorkloadAction::Kind::Route, WorkloadAction::Kind::CreateCase, WorkloadAction::Kind::DispatchPolicy,
                 WorkloadAction::Kind::AssignQueryNodes, WorkloadAction::Kind::ProposeStage,
                 WorkloadAction::Kind::Access, WorkloadAction::Kind::ProvenanceRequest}) {
    if (to_string(k) == name) return k;
  }
  fail_at(node, "unknown workload action '" + name + "'");
}

AccessPolicy parse_policy(const YAML::Node& node) {
  check_keys(node, {"roles", "grants"}, "policy");
  AccessPolicy p;
  for (const auto& r : node["roles"]) p.roles.insert(r.as<std::string>());
  if (!node["roles"]) p.roles = AccessPolicy::default_roles();
  for (const auto& g : node["grants"]) {
    check_keys(g, {"role", "stages", "actions"}, "policy grant");
    auto role = get<std::string>(g, "role", "policy grant");
    auto stages = get<std::vector<StageIndex>>(g, "stages", "policy grant");
    for (const auto& a : g["actions"]) {
      Action action;
      try {
        action = action_from_string(a.as<std::string>());
      } catch (const Error& e) {
        fail_at(a, e.what());
      }
      for (auto s : stages) p.grant(role, s, action);
    }
  }
  return p;
}

Scenario parse_root(const YAML::Node& root) {
  const std::string where = "scenario";
  check_keys(root,
             {"name", "seed", "design", "topology", "chains", "stage_count", "stage_names", "block_time",
              "block_times", "link_latency", "link_overrides", "pending_timeout", "max_tick", "users", "policy",
              "workload", "faults"},
             where);
  Scenario s;
  s.name = get_or<std::string>(root, "name", s.name, where);
  s.seed = get_or<std::uint64_t>(root, "seed", s.seed, where);
  if (root["design"]) {
    try {
      s.design = design_from_string(root["design"].as<std::string>());
    } catch (const Error& e) {
      fail_at(root["design"], e.what());
    }
  }
  auto topo = root["topology"];
  if (!topo) fail_at(root, "missing required key 'topology'");
  check_keys(topo, {"k", "m", "n", "n_i", "b_i"}, "topology");
  s.topology.k = get<std::uint64_t>(topo, "k", "topology");
  s.topology.m = get_or<std::uint64_t>(topo, "m", 0, "topology");
  s.topology.n = get<std::uint64_t>(topo, "n", "topology");
  s.topology.n_i = get<std::uint64_t>(topo, "n_i", "topology");
  s.topology.b_i = get_or<std::uint64_t>(topo, "b_i", s.topology.k * s.topology.n_i, "topology");
  s.chains = get_or<std::vector<ChainId>>(root, "chains", {}, where);
  s.stage_count = get_or<std::uint32_t>(root, "stage_count", s.stage_count, where);
  s.stage_names = get_or<std::vector<std::string>>(root, "stage_names", {}, where);
  s.block_time = get_or<LogicalTime>(root, "block_time", s.block_time, where);
  s.block_times = get_or<std::map<ChainId, LogicalTime>>(root, "block_times", {}, where);
  s.link_latency = get_or<LogicalTime>(root, "link_latency", s.link_latency, where);
  for (const auto& l : root["link_overrides"]) {
    check_keys(l, {"from", "to", "ticks"}, "link override");
    s.link_overrides.push_back({get<std::string>(l, "from", "link override"), get<std::string>(l, "to", "link override"),
                                get<LogicalTime>(l, "ticks", "link override")});
  }
  s.pending_timeout = get_or<LogicalTime>(root, "pending_timeout", s.pending_timeout, where);
  s.max_tick = get_or<LogicalTime>(root, "max_tick", s.max_tick, where);
  for (const auto& u : root["users"]) {
    check_keys(u, {"name", "chain"}, "user");
    s.users.push_back({get<std::string>(u, "name", "user"), get<std::string>(u, "chain", "user")});
  }
  if (root["policy"]) s.policy = parse_policy(root["policy"]);
  else s.policy.roles = AccessPolicy::default_roles();

  for (const auto& a : root["workload"]) {
    const std::string aw = "workload action";
    check_keys(a,
               {"at", "action", "chain", "user", "case", "destinations", "query_nodes", "query_node", "role", "op",
                "data", "target", "votes"},
               aw);
    WorkloadAction w;
    if (!a["action"]) fail_at(a, "missing required key 'action' in workload action");
    w.kind = parse_action_kind(a["action"]);
    w.at = get<LogicalTime>(a, "at", aw);
    w.chain = get<std::string>(a, "chain", aw);
    w.user = get_or<std::string>(a, "user", "", aw);
    w.case_number = get_or<std::string>(a, "case", "", aw);
    w.destinations = get_or<std::vector<ChainId>>(a, "destinations", {}, aw);
    w.query_nodes = get_or<std::vector<std::string>>(a, "query_nodes", {}, aw);
    w.query_node = get_or<std::string>(a, "query_node", "", aw);
    w.role = get_or<std::string>(a, "role", "", aw);
    if (a["op"]) {
      try {
        w.action = action_from_string(a["op"].as<std::string>());
      } catch (const Error& e) {
        fail_at(a["op"], e.what());
      }
    }
    w.data = get_or<std::string>(a, "data", "", aw);
    if (a["target"]) w.target_stage = get<StageIndex>(a, "target", aw);
    for (const auto& v : a["votes"]) w.votes[v.first.as<std::string>()] = parse_vote(v.second);

    const bool needs_case = w.kind != WorkloadAction::Kind::Route;
    if (needs_case && w.case_number.empty()) fail_at(a, "workload action '" + std::string(to_string(w.kind)) + "' needs 'case'");
    s.workload.push_back(std::move(w));
  }

  for (const auto& f : root["faults"]) {
    const std::string fw = "fault";
    check_keys(f, {"at", "kind", "chain", "peer", "node", "rule", "case", "stage", "tx_index"}, fw);
    FaultSpec spec;
    spec.at = get<LogicalTime>(f, "at", fw);
    auto kind = get<std::string>(f, "kind", fw);
    spec.chain = get<std::string>(f, "chain", fw);
    if (kind == "compromise_mutual_node") {
      spec.kind = FaultSpec::Kind::CompromiseMutualNode;
      spec.peer = get_or<std::string>(f, "peer", kBridgeChainId, fw);
      spec.node_index = get<std::size_t>(f, "node", fw);
      try {
        spec.rule = Corruption::parse(get_or<std::string>(f, "rule", "flip_body", fw));
      } catch (const Error& e) {
        fail_at(f["rule"], e.what());
      }
    } else if (kind == "tamper_offchain") {
      spec.kind = FaultSpec::Kind::TamperOffchain;
      spec.case_number = get<std::string>(f, "case", fw);
      spec.stage = get<StageIndex>(f, "stage", fw);
      spec.tx_index = get<std::size_t>(f, "tx_index", fw);
    } else {
      fail_at(f["kind"], "unknown fault kind '" + kind + "'");
    }
    s.faults.push_back(std::move(spec));
  }
  s.normalize();
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  try {
    return parse_root(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::ParseError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace forensicross
