#pragma once
//
// File formats.
//
//   Team structure   {"robots":[robot...], "relations":[relation...], "root":node}
//   robot            {"id", "capability":{moving,acting,sensing,communicating,organizing,learning},
//                     "resources":{name:qty}, "interface":[tag...]}   (+ "goals":[...] in scenarios)
//   relation         {"kind":"vertical-control"|"horizontal-cooperation", "from", "to"}
//   node             {"kind":"leaf", "robot", "goals", "constraints", "rules", "benefit"}
//                    {"kind":"team", "id_ros", "leader", "level", "position", "goals",
//                     "capability", "constraints", "rules", "benefit", "children":[node...]}
//   pair model       {"alphabet":[...], "prior", "likelihood_coop":[...], "likelihood_noncoop":[...]}
//   problem          {"n", "alphabet", "mode", "beliefs":[{"from","to","values":[m]}],
//                     "payoffs":[{"from","to","coop":[m],"noncoop":[m]}], "cap"?, "ga"?}
//   result           {"method", "mode", "seed", "evaluations", "genome", "profile":[[symbol...]...],
//                     "member_payoffs", "team_payoff"}
//   scenario         {"robots", "alphabet", "mode", "epochs", "seed", "prior_update", "optimizer",
//                     "pairs":[{"from","to","prior","likelihood_coop","likelihood_noncoop","initial_state"}],
//                     "payoffs":[{"from","to","coop","noncoop"}]}
//   trajectory       JSON lines, one epoch record per line
//   metrics          CSV, header kMetricsHeader, one row per epoch
//
// Doubles are written in shortest round-trip form (JSON) or with 17
// significant digits (CSV), so every format reads back to identical values.
//

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "teamcoop/coop_bayes.hpp"
#include "teamcoop/error.hpp"
#include "teamcoop/org_model.hpp"
#include "teamcoop/payoff_opt.hpp"
#include "teamcoop/sim_engine.hpp"

namespace teamcoop::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string where(const std::string& path) { return path.empty() ? "/" : path; }

inline const Json& field(const Json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw Error(Errc::Parse, where(path) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::Parse, where(path) + ": missing field '" + std::string(key) + "'");
  return *it;
}

template <class T>
T as(const Json& j, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!j.is_number()) throw Error(Errc::Parse, path + ": expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw Error(Errc::Parse, path + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
          throw Error(Errc::Parse, path + ": expected a nonnegative integer");
        }
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw Error(Errc::Parse, path + ": expected a string");
    }
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, path + ": " + e.what());
  }
}

template <class T>
T get(const Json& j, std::string_view key, const std::string& path) {
  return as<T>(field(j, key, path), path + "/" + std::string(key));
}

template <class T>
T get_or(const Json& j, std::string_view key, const std::string& path, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key, path);
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw Error(Errc::Parse, path + ": expected an array");
  return j;
}

template <class T>
std::vector<T> vec(const Json& j, const std::string& path) {
  std::vector<T> out;
  std::size_t k = 0;
  for (const auto& e : array(j, path)) out.push_back(as<T>(e, path + "/" + std::to_string(k++)));
  return out;
}

template <class T>
std::vector<T> get_vec(const Json& j, std::string_view key, const std::string& path) {
  return vec<T>(field(j, key, path), path + "/" + std::string(key));
}

inline std::set<std::string> get_set(const Json& j, std::string_view key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return {};
  auto v = get_vec<std::string>(j, key, path);
  return {v.begin(), v.end()};
}

inline Json set_json(const std::set<std::string>& s) { return Json(std::vector<std::string>(s.begin(), s.end())); }

}  // namespace detail

/// Parses text, reporting the byte offset of a syntax error.
inline Json parse(std::string_view text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Parse, source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json load(const std::string& path) { return parse(read_text(path), path); }

// ---- org model -----------------------------------------------------------

inline Json to_json(const CapabilityProfile& c) {
  Json j = Json::object();
  const auto v = c.values();
  for (std::size_t d = 0; d < v.size(); ++d) j[std::string(CapabilityProfile::kNames[d])] = v[d];
  return j;
}

inline CapabilityProfile capability_from_json(const Json& j, const std::string& path) {
  std::array<double, CapabilityProfile::kDimensions> v{};
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = detail::get<double>(j, CapabilityProfile::kNames[d], path);
  return CapabilityProfile::from_values(v);
}

inline Json to_json(const CooperativeRobot& r) {
  Json res = Json::object();
  for (const auto& [k, q] : r.resources) res[k] = q;
  return Json{{"id", r.id}, {"capability", to_json(r.capability)}, {"resources", res},
              {"interface", detail::set_json(r.interface)}};
}

/// Reads the fields as written; invariants are left to validation.
inline CooperativeRobot robot_from_json(const Json& j, const std::string& path) {
  CooperativeRobot r;
  r.id = detail::get<std::string>(j, "id", path);
  r.capability = capability_from_json(detail::field(j, "capability", path), path + "/capability");
  if (j.contains("resources")) {
    const auto& res = j.at("resources");
    if (!res.is_object()) throw Error(Errc::Parse, path + "/resources: expected an object");
    for (const auto& [k, v] : res.items()) r.resources[k] = detail::as<double>(v, path + "/resources/" + k);
  }
  r.interface = detail::get_set(j, "interface", path);
  return r;
}

constexpr std::string_view to_string(RelationKind k) noexcept {
  return k == RelationKind::VerticalControl ? "vertical-control" : "horizontal-cooperation";
}

inline Json to_json(const Relation& r) {
  return Json{{"kind", to_string(r.kind)}, {"from", r.from}, {"to", r.to}};
}

inline Relation relation_from_json(const Json& j, const std::string& path) {
  const auto kind = detail::get<std::string>(j, "kind", path);
  Relation r;
  if (kind == "vertical-control") {
    r.kind = RelationKind::VerticalControl;
  } else if (kind == "horizontal-cooperation") {
    r.kind = RelationKind::HorizontalCooperation;
  } else {
    throw Error(Errc::Parse, path + "/kind: unknown relation kind '" + kind + "'");
  }
  r.from = detail::get<std::string>(j, "from", path);
  r.to = detail::get<std::string>(j, "to", path);
  return r;
}

inline Json to_json(const OrgNode& node) {
  auto refs = [](const RelationRefs& r) { return Json(std::vector<std::size_t>(r.begin(), r.end())); };
  if (node.is_leaf()) {
    const auto& l = node.leaf();
    return Json{{"kind", "leaf"},
                {"robot", l.robot_id},
                {"goals", detail::set_json(l.goals)},
                {"constraints", refs(l.constraints)},
                {"rules", detail::set_json(l.rules)},
                {"benefit", l.benefit}};
  }
  const auto& t = node.team();
  Json children = Json::array();
  for (const auto& c : t.children) children.push_back(to_json(c));
  return Json{{"kind", "team"},
              {"id_ros", t.id_ros},
              {"leader", t.leader_robot_id},
              {"level", t.level},
              {"position", t.position},
              {"goals", detail::set_json(t.goals)},
              {"capability", to_json(t.capability_aggregate)},
              {"constraints", refs(t.constraints)},
              {"rules", detail::set_json(t.rules)},
              {"benefit", t.benefit},
              {"children", children}};
}

inline OrgNode node_from_json(const Json& j, const std::string& path = "root") {
  auto refs = [&](const char* key) {
    RelationRefs out;
    if (j.contains(key)) {
      for (auto v : detail::get_vec<std::size_t>(j, key, path)) out.insert(v);
    }
    return out;
  };
  const auto kind = detail::get<std::string>(j, "kind", path);
  if (kind == "leaf") {
    return Leaf{detail::get<std::string>(j, "robot", path), detail::get_set(j, "goals", path), refs("constraints"),
                detail::get_set(j, "rules", path), detail::get_or<double>(j, "benefit", path, 0.0)};
  }
  if (kind != "team") throw Error(Errc::Parse, path + "/kind: expected 'leaf' or 'team', got '" + kind + "'");
  Team t;
  t.id_ros = detail::get<std::string>(j, "id_ros", path);
  t.leader_robot_id = detail::get<std::string>(j, "leader", path);
  t.level = detail::get<std::size_t>(j, "level", path);
  t.position = detail::get_or<std::size_t>(j, "position", path, 0);
  t.goals = detail::get_set(j, "goals", path);
  t.capability_aggregate = capability_from_json(detail::field(j, "capability", path), path + "/capability");
  t.constraints = refs("constraints");
  t.rules = detail::get_set(j, "rules", path);
  t.benefit = detail::get_or<double>(j, "benefit", path, 0.0);
  std::size_t k = 0;
  for (const auto& c : detail::array(detail::field(j, "children", path), path + "/children")) {
    t.children.push_back(node_from_json(c, path + "/children/" + std::to_string(k++)));
  }
  return t;
}

inline Json to_json(const TeamStructure& s) {
  Json robots = Json::array();
  for (const auto& [_, r] : s.registry) robots.push_back(to_json(r));
  Json relations = Json::array();
  for (const auto& r : s.relations) relations.push_back(to_json(r));
  return Json{{"robots", robots}, {"relations", relations}, {"root", to_json(s.root)}};
}

/// Robots enter the registry unchecked apart from id uniqueness, so that
/// validate() can report every other violation.
inline TeamStructure structure_from_json(const Json& j) {
  Registry reg;
  std::size_t k = 0;
  for (const auto& r : detail::array(detail::field(j, "robots", ""), "/robots")) {
    try {
      reg.add(robot_from_json(r, "/robots/" + std::to_string(k++)));
    } catch (const Error& e) {
      if (e.code() == Errc::DuplicateId) throw Error(Errc::Parse, e.detail());
      throw;
    }
  }
  std::vector<Relation> relations;
  if (j.contains("relations")) {
    k = 0;
    for (const auto& r : detail::array(j.at("relations"), "/relations")) {
      relations.push_back(relation_from_json(r, "/relations/" + std::to_string(k++)));
    }
  }
  return {std::move(reg), std::move(relations), node_from_json(detail::field(j, "root", ""), "/root")};
}

// ---- cooperation chain ---------------------------------------------------

inline Json to_json(const PairModel& m) {
  return Json{{"alphabet", m.alphabet.symbols()},
              {"prior", m.prior_coop},
              {"likelihood_coop", m.likelihood_coop},
              {"likelihood_noncoop", m.likelihood_noncoop}};
}

inline PairModel pair_model_from_json(const Json& j, const std::string& path = "",
                                      const ActionAlphabet* shared_alphabet = nullptr) {
  PairModel m;
  if (shared_alphabet) {
    m.alphabet = *shared_alphabet;
  } else {
    try {
      m.alphabet = ActionAlphabet(detail::get_vec<std::string>(j, "alphabet", path));
    } catch (const Error& e) {
      if (e.code() == Errc::Parse) throw;
      throw Error(Errc::Parse, path + "/alphabet: " + e.detail());
    }
  }
  m.prior_coop = detail::get<double>(j, "prior", path);
  m.likelihood_coop = detail::get_vec<double>(j, "likelihood_coop", path);
  m.likelihood_noncoop = detail::get_vec<double>(j, "likelihood_noncoop", path);
  return m;
}

inline Json to_json(const TransitionMatrix& m) {
  return Json{{"p11", m.p11}, {"p10", m.p10}, {"p01", m.p01}, {"p00", m.p00}};
}

inline TransitionMatrix transition_from_json(const Json& j, const std::string& path) {
  return {detail::get<double>(j, "p11", path), detail::get<double>(j, "p10", path), detail::get<double>(j, "p01", path),
          detail::get<double>(j, "p00", path)};
}

// ---- optimization problems -----------------------------------------------

struct OptimizationProblem {
  PayoffModel model;
  ActionMode mode = ActionMode::Directed;
  GaParams ga;
  std::uint64_t cap = kDefaultBruteForceCap;
};

/// A parsed problem plus anything missing or out of range in it.
struct ProblemFile {
  OptimizationProblem problem;
  std::vector<std::string> problems;
};

inline GaParams ga_params_from_json(const Json& j, const std::string& path) {
  GaParams p;
  p.population = detail::get_or<std::size_t>(j, "population", path, p.population);
  p.generations = detail::get_or<std::size_t>(j, "generations", path, p.generations);
  p.tournament = detail::get_or<std::size_t>(j, "tournament", path, p.tournament);
  p.crossover_rate = detail::get_or<double>(j, "crossover_rate", path, p.crossover_rate);
  if (j.contains("mutation_rate")) p.mutation_rate = detail::get<double>(j, "mutation_rate", path);
  p.elitism = detail::get_or<std::size_t>(j, "elitism", path, p.elitism);
  return p;
}

inline Json to_json(const GaParams& p) {
  Json j{{"population", p.population}, {"generations", p.generations}, {"tournament", p.tournament},
         {"crossover_rate", p.crossover_rate}};
  if (p.mutation_rate) j["mutation_rate"] = *p.mutation_rate;
  j["elitism"] = p.elitism;
  return j;
}

inline ActionAlphabet alphabet_from_json(const Json& j, const std::string& path) {
  try {
    return ActionAlphabet(detail::vec<std::string>(j, path));
  } catch (const Error& e) {
    if (e.code() == Errc::Parse) throw;
    throw Error(Errc::Parse, path + ": " + e.detail());
  }
}

inline ProblemFile problem_from_json(const Json& j) {
  ProblemFile f;
  const auto n = detail::get<std::size_t>(j, "n", "");
  auto alphabet = alphabet_from_json(detail::field(j, "alphabet", ""), "/alphabet");
  const std::size_t m = alphabet.size();
  auto& p = f.problem;
  p.model = PayoffModel(n, std::move(alphabet));
  try {
    p.mode = parse_action_mode(detail::get_or<std::string>(j, "mode", "", "directed"));
  } catch (const Error& e) {
    throw Error(Errc::Parse, "/mode: " + e.detail());
  }
  p.cap = detail::get_or<std::uint64_t>(j, "cap", "", kDefaultBruteForceCap);
  if (j.contains("ga")) p.ga = ga_params_from_json(j.at("ga"), "/ga");
  for (const auto& e : p.ga.problems()) f.problems.push_back("ga: " + e);

  auto coordinate = [&](const Json& e, const std::string& path) -> std::optional<std::pair<std::size_t, std::size_t>> {
    const auto i = detail::get<std::size_t>(e, "from", path);
    const auto jj = detail::get<std::size_t>(e, "to", path);
    if (i >= n || jj >= n || i == jj) {
      f.problems.push_back(path + ": no coordinate (" + std::to_string(i) + "," + std::to_string(jj) + ")");
      return std::nullopt;
    }
    return std::pair{i, jj};
  };
  auto sized = [&](const std::vector<double>& v, const std::string& path) {
    if (v.size() == m) return true;
    f.problems.push_back(path + ": has " + std::to_string(v.size()) + " entries, alphabet has " + std::to_string(m));
    return false;
  };

  std::set<std::pair<std::size_t, std::size_t>> seen_beliefs;
  std::size_t k = 0;
  for (const auto& e : detail::array(detail::field(j, "beliefs", ""), "/beliefs")) {
    const std::string path = "/beliefs/" + std::to_string(k++);
    auto c = coordinate(e, path);
    auto values = detail::get_vec<double>(e, "values", path);
    if (!c || !sized(values, path + "/values")) continue;
    if (!seen_beliefs.insert(*c).second) f.problems.push_back(path + ": duplicate belief entry");
    for (std::size_t a = 0; a < m; ++a) p.model.belief(c->first, c->second, a) = values[a];
  }
  std::set<std::pair<std::size_t, std::size_t>> seen_payoffs;
  k = 0;
  for (const auto& e : detail::array(detail::field(j, "payoffs", ""), "/payoffs")) {
    const std::string path = "/payoffs/" + std::to_string(k++);
    auto c = coordinate(e, path);
    auto coop = detail::get_vec<double>(e, "coop", path);
    auto noncoop = detail::get_vec<double>(e, "noncoop", path);
    if (!c || !sized(coop, path + "/coop") || !sized(noncoop, path + "/noncoop")) continue;
    if (!seen_payoffs.insert(*c).second) f.problems.push_back(path + ": duplicate payoff entry");
    for (std::size_t a = 0; a < m; ++a) {
      p.model.payoff(c->first, c->second, CoopState::Cooperating, a) = coop[a];
      p.model.payoff(c->first, c->second, CoopState::NotCooperating, a) = noncoop[a];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t jj = 0; jj < n; ++jj) {
      if (i == jj) continue;
      const std::string c = "(" + std::to_string(i) + "," + std::to_string(jj) + ")";
      if (!seen_beliefs.contains({i, jj})) f.problems.push_back("missing beliefs for coordinate " + c);
      if (!seen_payoffs.contains({i, jj})) f.problems.push_back("missing payoffs for coordinate " + c);
    }
  }
  for (const auto& e : p.model.problems()) f.problems.push_back(e);
  return f;
}

inline Json to_json(const OptimizationProblem& p) {
  const auto& model = p.model;
  Json beliefs = Json::array();
  Json payoffs = Json::array();
  for (std::size_t i = 0; i < model.n(); ++i) {
    for (std::size_t j = 0; j < model.n(); ++j) {
      if (i == j) continue;
      std::vector<double> b, u1, u0;
      for (std::size_t a = 0; a < model.m(); ++a) {
        b.push_back(model.belief(i, j, a));
        u1.push_back(model.payoff(i, j, CoopState::Cooperating, a));
        u0.push_back(model.payoff(i, j, CoopState::NotCooperating, a));
      }
      beliefs.push_back(Json{{"from", i}, {"to", j}, {"values", b}});
      payoffs.push_back(Json{{"from", i}, {"to", j}, {"coop", u1}, {"noncoop", u0}});
    }
  }
  return Json{{"n", model.n()},         {"alphabet", model.alphabet().symbols()},
              {"mode", to_string(p.mode)}, {"cap", p.cap},
              {"ga", to_json(p.ga)},     {"beliefs", beliefs},
              {"payoffs", payoffs}};
}

inline Json profile_to_json(const JointProfile& profile, const ActionAlphabet& alphabet) {
  Json out = Json::array();
  for (const auto& v : profile.vectors) {
    Json row = Json::array();
    for (auto a : v.actions) row.push_back(alphabet[a]);
    out.push_back(row);
  }
  return out;
}

inline JointProfile profile_from_json(const Json& j, ActionMode mode, const ActionAlphabet& alphabet,
                                      const std::string& path) {
  JointProfile p{mode, {}};
  std::size_t i = 0;
  for (const auto& row : detail::array(j, path)) {
    ActionVector v{i, {}};
    for (const auto& s : detail::vec<std::string>(row, path + "/" + std::to_string(i))) {
      try {
        v.actions.push_back(alphabet.index_of(s));
      } catch (const Error& e) {
        throw Error(Errc::Parse, path + "/" + std::to_string(i) + ": " + e.detail());
      }
    }
    p.vectors.push_back(std::move(v));
    ++i;
  }
  return p;
}

inline Json to_json(const OptimizationResult& r, const ActionAlphabet& alphabet) {
  return Json{{"method", to_string(r.method)},
              {"mode", to_string(r.profile.mode)},
              {"seed", r.seed},
              {"evaluations", r.evaluations},
              {"genome", to_genome(r.profile)},
              {"profile", profile_to_json(r.profile, alphabet)},
              {"member_payoffs", r.member_payoffs},
              {"team_payoff", r.team_payoff}};
}

inline OptimizationResult result_from_json(const Json& j, const ActionAlphabet& alphabet) {
  OptimizationResult r;
  const auto method = detail::get<std::string>(j, "method", "");
  if (method != "brute" && method != "ga") throw Error(Errc::Parse, "/method: unknown method '" + method + "'");
  r.method = method == "brute" ? Method::Brute : Method::Ga;
  ActionMode mode;
  try {
    mode = parse_action_mode(detail::get<std::string>(j, "mode", ""));
  } catch (const Error& e) {
    throw Error(Errc::Parse, "/mode: " + e.detail());
  }
  r.seed = detail::get<std::uint64_t>(j, "seed", "");
  r.evaluations = detail::get<std::uint64_t>(j, "evaluations", "");
  r.profile = profile_from_json(detail::field(j, "profile", ""), mode, alphabet, "/profile");
  r.member_payoffs = detail::get_vec<double>(j, "member_payoffs", "");
  r.team_payoff = detail::get<double>(j, "team_payoff", "");
  return r;
}

// ---- scenarios -----------------------------------------------------------

inline PriorUpdate parse_prior_update(std::string_view text) {
  if (text == "fixed") return PriorUpdate::Fixed;
  if (text == "posterior-feedback") return PriorUpdate::PosteriorFeedback;
  throw Error(Errc::Parse, "unknown prior update policy '" + std::string(text) + "'");
}

/// Structural errors throw Errc::Parse; semantic problems (a missing pair,
/// a likelihood table that does not sum to 1) surface via Scenario::problems().
inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  std::map<std::string, std::size_t> index;
  std::size_t k = 0;
  for (const auto& r : detail::array(detail::field(j, "robots", ""), "/robots")) {
    const std::string path = "/robots/" + std::to_string(k++);
    s.robots.push_back(robot_from_json(r, path));
    index.emplace(s.robots.back().id, s.robots.size() - 1);
    if (r.contains("goals")) s.goals[s.robots.back().id] = detail::get_set(r, "goals", path);
  }
  s.alphabet = alphabet_from_json(detail::field(j, "alphabet", ""), "/alphabet");
  try {
    s.mode = parse_action_mode(detail::get_or<std::string>(j, "mode", "", "directed"));
  } catch (const Error& e) {
    throw Error(Errc::Parse, "/mode: " + e.detail());
  }
  s.epochs = detail::get<std::size_t>(j, "epochs", "");
  s.seed = detail::get_or<std::uint64_t>(j, "seed", "", 0);
  try {
    s.prior_update = parse_prior_update(detail::get_or<std::string>(j, "prior_update", "", "fixed"));
  } catch (const Error& e) {
    throw Error(Errc::Parse, "/prior_update: " + e.detail());
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    const auto method = detail::get_or<std::string>(o, "method", "/optimizer", "brute");
    if (method == "brute") {
      s.optimizer.method = Method::Brute;
    } else if (method == "ga") {
      s.optimizer.method = Method::Ga;
    } else {
      throw Error(Errc::Parse, "/optimizer/method: unknown method '" + method + "'");
    }
    s.optimizer.cap = detail::get_or<std::uint64_t>(o, "cap", "/optimizer", kDefaultBruteForceCap);
    s.optimizer.ga = ga_params_from_json(o, "/optimizer");
  }

  auto key = [&](const Json& e, const std::string& path) {
    const auto from = detail::get<std::string>(e, "from", path);
    const auto to = detail::get<std::string>(e, "to", path);
    auto f = index.find(from);
    auto t = index.find(to);
    if (f == index.end()) throw Error(Errc::Parse, path + "/from: unknown robot '" + from + "'");
    if (t == index.end()) throw Error(Errc::Parse, path + "/to: unknown robot '" + to + "'");
    return PairKey{f->second, t->second};
  };

  k = 0;
  for (const auto& e : detail::array(detail::field(j, "pairs", ""), "/pairs")) {
    const std::string path = "/pairs/" + std::to_string(k++);
    PairKey pk = key(e, path);
    if (s.mode == ActionMode::Symmetric && pk.to < pk.from) std::swap(pk.from, pk.to);
    ScenarioPair sp;
    sp.model = pair_model_from_json(e, path, &s.alphabet);
    const auto initial = detail::get_or<int>(e, "initial_state", path, 0);
    if (initial != 0 && initial != 1) throw Error(Errc::Parse, path + "/initial_state: expected 0 or 1");
    sp.initial = coop_state(initial == 1);
    if (!s.pairs.emplace(pk, std::move(sp)).second) throw Error(Errc::Parse, path + ": duplicate pair " + s.pair_name(pk));
  }
  k = 0;
  for (const auto& e : detail::array(detail::field(j, "payoffs", ""), "/payoffs")) {
    const std::string path = "/payoffs/" + std::to_string(k++);
    const PairKey pk = key(e, path);
    PairPayoff t{detail::get_vec<double>(e, "coop", path), detail::get_vec<double>(e, "noncoop", path)};
    if (!s.payoffs.emplace(pk, std::move(t)).second) throw Error(Errc::Parse, path + ": duplicate payoff table");
  }
  return s;
}

inline Json to_json(const Scenario& s) {
  Json robots = Json::array();
  for (const auto& r : s.robots) {
    Json jr = to_json(r);
    jr["goals"] = detail::set_json(s.goals_of(r.id));
    robots.push_back(jr);
  }
  Json optimizer = to_json(s.optimizer.ga);
  optimizer["method"] = to_string(s.optimizer.method);
  optimizer["cap"] = s.optimizer.cap;
  Json pairs = Json::array();
  for (const auto& [k, p] : s.pairs) {
    pairs.push_back(Json{{"from", s.robots.at(k.from).id},
                         {"to", s.robots.at(k.to).id},
                         {"prior", p.model.prior_coop},
                         {"likelihood_coop", p.model.likelihood_coop},
                         {"likelihood_noncoop", p.model.likelihood_noncoop},
                         {"initial_state", to_int(p.initial)}});
  }
  Json payoffs = Json::array();
  for (const auto& [k, t] : s.payoffs) {
    payoffs.push_back(
        Json{{"from", s.robots.at(k.from).id}, {"to", s.robots.at(k.to).id}, {"coop", t.coop}, {"noncoop", t.noncoop}});
  }
  return Json{{"robots", robots},
              {"alphabet", s.alphabet.symbols()},
              {"mode", to_string(s.mode)},
              {"epochs", s.epochs},
              {"seed", s.seed},
              {"prior_update", to_string(s.prior_update)},
              {"optimizer", optimizer},
              {"pairs", pairs},
              {"payoffs", payoffs}};
}

// ---- trajectories --------------------------------------------------------

inline Json to_json(const EpochRecord& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back(Json{{"from", r.robot_ids.at(p.key.from)},
                         {"to", r.robot_ids.at(p.key.to)},
                         {"prior", p.prior},
                         {"action", r.alphabet[p.action]},
                         {"posterior", p.posterior},
                         {"p11", p.transition.p11},
                         {"p10", p.transition.p10},
                         {"p01", p.transition.p01},
                         {"p00", p.transition.p00},
                         {"state", to_int(p.state)}});
  }
  Json teams = Json::array();
  for (const auto& t : r.teams) teams.push_back(to_json(t));
  return Json{{"epoch", r.epoch},
              {"robots", r.robot_ids},
              {"alphabet", r.alphabet.symbols()},
              {"mode", to_string(r.profile.mode)},
              {"profile", profile_to_json(r.profile, r.alphabet)},
              {"pairs", pairs},
              {"aggregate", to_json(r.aggregate)},
              {"member_payoffs", r.member_payoffs},
              {"team_payoff", r.team_payoff},
              {"realized_payoffs", r.realized_payoffs},
              {"teams", teams},
              {"team_eu", r.team_eu}};
}

inline EpochRecord epoch_from_json(const Json& j, const std::string& path = "") {
  EpochRecord r;
  r.epoch = detail::get<std::size_t>(j, "epoch", path);
  r.robot_ids = detail::get_vec<std::string>(j, "robots", path);
  r.alphabet = alphabet_from_json(detail::field(j, "alphabet", path), path + "/alphabet");
  ActionMode mode;
  try {
    mode = parse_action_mode(detail::get<std::string>(j, "mode", path));
  } catch (const Error& e) {
    throw Error(Errc::Parse, path + "/mode: " + e.detail());
  }
  r.profile = profile_from_json(detail::field(j, "profile", path), mode, r.alphabet, path + "/profile");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < r.robot_ids.size(); ++i) index.emplace(r.robot_ids[i], i);
  std::size_t k = 0;
  for (const auto& e : detail::array(detail::field(j, "pairs", path), path + "/pairs")) {
    const std::string pp = path + "/pairs/" + std::to_string(k++);
    PairRecord p;
    const auto from = detail::get<std::string>(e, "from", pp);
    const auto to = detail::get<std::string>(e, "to", pp);
    if (!index.contains(from) || !index.contains(to)) throw Error(Errc::Parse, pp + ": unknown robot");
    p.key = {index.at(from), index.at(to)};
    p.prior = detail::get<double>(e, "prior", pp);
    try {
      p.action = r.alphabet.index_of(detail::get<std::string>(e, "action", pp));
    } catch (const Error& err) {
      throw Error(Errc::Parse, pp + "/action: " + err.detail());
    }
    p.posterior = detail::get<double>(e, "posterior", pp);
    p.transition = transition_from_json(e, pp);
    const auto state = detail::get<int>(e, "state", pp);
    if (state != 0 && state != 1) throw Error(Errc::Parse, pp + "/state: expected 0 or 1");
    p.state = coop_state(state == 1);
    r.pairs.push_back(p);
  }
  r.aggregate = transition_from_json(detail::field(j, "aggregate", path), path + "/aggregate");
  r.member_payoffs = detail::get_vec<double>(j, "member_payoffs", path);
  r.team_payoff = detail::get<double>(j, "team_payoff", path);
  r.realized_payoffs = detail::get_vec<double>(j, "realized_payoffs", path);
  k = 0;
  for (const auto& t : detail::array(detail::field(j, "teams", path), path + "/teams")) {
    r.teams.push_back(node_from_json(t, path + "/teams/" + std::to_string(k++)));
  }
  r.team_eu = detail::get_vec<double>(j, "team_eu", path);
  return r;
}

inline std::string trajectory_to_jsonl(std::span<const EpochRecord> trajectory) {
  std::string out;
  for (const auto& r : trajectory) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline Trajectory trajectory_from_jsonl(std::string_view text, const std::string& source = "trajectory") {
  Trajectory t;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    t.push_back(epoch_from_json(parse(line, where), where));
  }
  return t;
}

// ---- metrics -------------------------------------------------------------

inline constexpr std::string_view kMetricsHeader =
    "epoch,cooperation_density,team_count,mean_team_size,team_payoff,eu,cumulative_eu";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string metrics_to_csv(const MetricsSummary& s) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& e : s.epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.cooperation_density) + ',' + std::to_string(e.team_count) +
           ',' + format_double(e.mean_team_size) + ',' + format_double(e.team_payoff) + ',' + format_double(e.eu) + ',' +
           format_double(e.cumulative_eu) + '\n';
  }
  return out;
}

inline std::vector<EpochMetrics> metrics_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw Error(Errc::Parse, "metrics CSV: unexpected header");
  std::vector<EpochMetrics> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) throw Error(Errc::Parse, "metrics CSV line " + std::to_string(line_no) + ": expected 7 cells");
    try {
      out.push_back({std::stoull(cells[0]), std::stod(cells[1]), std::stoull(cells[2]), std::stod(cells[3]),
                     std::stod(cells[4]), std::stod(cells[5]), std::stod(cells[6])});
    } catch (const std::exception&) {
      throw Error(Errc::Parse, "metrics CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

}  // namespace teamcoop::io
