#pragma once
//
// Epoch loop for the evolution of cooperation inside a robot society.
//
// Each epoch:
//   1. beliefs P_ij(c1|a) come from the current pair models, and the
//      configured optimizer picks a joint action profile;
//   2. the posterior for each pair's chosen action is recorded;
//   3. each pair's transition matrix is built and its state stepped with a
//      draw keyed by (master seed, pair ids, epoch);
//   4. teams re-form as connected components of the cooperation graph;
//   5. every member's realized payoff u_ij(c, a_ij), with c the stepped
//      state, is accrued as team benefit;
//   6. under posterior feedback, the next prior of each pair is this epoch's
//      posterior.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "teamcoop/coop_bayes.hpp"
#include "teamcoop/error.hpp"
#include "teamcoop/org_model.hpp"
#include "teamcoop/payoff_opt.hpp"
#include "teamcoop/random.hpp"

namespace teamcoop {

enum class PriorUpdate { Fixed, PosteriorFeedback };

constexpr std::string_view to_string(PriorUpdate p) noexcept {
  return p == PriorUpdate::Fixed ? "fixed" : "posterior-feedback";
}

struct OptimizerConfig {
  Method method = Method::Brute;
  GaParams ga;
  std::uint64_t cap = kDefaultBruteForceCap;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Robot indices of a pair. Symmetric-mode keys have from < to.
struct PairKey {
  std::size_t from = 0;
  std::size_t to = 0;

  auto operator<=>(const PairKey&) const = default;
};

/// Pairs tracked in a team of n: ordered pairs in directed mode, pairs
/// i < j in symmetric mode, both in lexicographic order.
inline std::vector<PairKey> pair_keys(std::size_t n, ActionMode mode) {
  std::vector<PairKey> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = mode == ActionMode::Directed ? 0 : i + 1; j < n; ++j) {
      if (i != j) out.push_back({i, j});
    }
  }
  return out;
}

/// Key of the pair that governs coordinate (i, j).
constexpr PairKey coordinate_key(std::size_t i, std::size_t j, ActionMode mode) noexcept {
  if (mode == ActionMode::Symmetric && j < i) return {j, i};
  return {i, j};
}

struct ScenarioPair {
  PairModel model;
  CoopState initial = CoopState::NotCooperating;

  bool operator==(const ScenarioPair&) const = default;
};

struct PairPayoff {
  std::vector<double> coop;
  std::vector<double> noncoop;

  bool operator==(const PairPayoff&) const = default;
};

inline std::string default_goal(const std::string& robot_id) { return "task:" + robot_id; }

struct Scenario {
  std::vector<CooperativeRobot> robots;
  /// Goals owned by each robot; robots without an entry own default_goal(id).
  std::map<std::string, GoalSet> goals;
  ActionAlphabet alphabet;
  ActionMode mode = ActionMode::Directed;
  std::map<PairKey, ScenarioPair> pairs;
  /// Always keyed by ordered pairs, whatever the mode.
  std::map<PairKey, PairPayoff> payoffs;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  PriorUpdate prior_update = PriorUpdate::Fixed;
  OptimizerConfig optimizer;

  std::string pair_name(PairKey k) const {
    auto name = [&](std::size_t i) { return i < robots.size() ? robots[i].id : "#" + std::to_string(i); };
    return name(k.from) + (mode == ActionMode::Directed ? "->" : "<->") + name(k.to);
  }

  GoalSet goals_of(const std::string& robot_id) const {
    auto it = goals.find(robot_id);
    return it == goals.end() ? GoalSet{default_goal(robot_id)} : it->second;
  }

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (robots.empty()) out.push_back("scenario has no robots");
    if (epochs < 1) out.push_back("epochs must be at least 1");
    if (alphabet.size() == 0) out.push_back("alphabet is empty");
    std::map<std::string, std::size_t> index;
    for (const auto& r : robots) {
      if (r.id.empty()) out.push_back("robot with empty id");
      if (!index.emplace(r.id, index.size()).second) out.push_back("duplicate robot id '" + r.id + "'");
      if (!r.capability.valid()) out.push_back("robot '" + r.id + "': capability score outside [0,1]");
      for (const auto& [name, qty] : r.resources) {
        if (!(qty >= 0.0)) out.push_back("robot '" + r.id + "': resource '" + name + "' is negative");
      }
    }
    for (const auto& [id, _] : goals) {
      if (!index.contains(id)) out.push_back("goals given for unknown robot '" + id + "'");
    }
    std::map<std::string, std::string> owner;
    for (const auto& r : robots) {
      const auto g = goals_of(r.id);
      if (g.empty()) out.push_back("robot '" + r.id + "' has no goals");
      for (const auto& label : g) {
        auto [it, fresh] = owner.emplace(label, r.id);
        if (!fresh) out.push_back("goal '" + label + "' owned by both '" + it->second + "' and '" + r.id + "'");
      }
    }

    const auto expected = pair_keys(robots.size(), mode);
    for (const auto& k : expected) {
      auto it = pairs.find(k);
      if (it == pairs.end()) {
        out.push_back("missing pair model for " + pair_name(k));
        continue;
      }
      if (it->second.model.alphabet != alphabet) out.push_back("pair " + pair_name(k) + ": alphabet differs from scenario");
      for (const auto& p : it->second.model.problems()) out.push_back("pair " + pair_name(k) + ": " + p);
    }
    for (const auto& [k, _] : pairs) {
      if (!std::ranges::binary_search(expected, k)) out.push_back("unexpected pair model for " + pair_name(k));
    }
    for (const auto& k : pair_keys(robots.size(), ActionMode::Directed)) {
      auto it = payoffs.find(k);
      const std::string name = robots[k.from].id + "->" + robots[k.to].id;
      if (it == payoffs.end()) {
        out.push_back("missing payoff table for " + name);
        continue;
      }
      for (const auto* t : {&it->second.coop, &it->second.noncoop}) {
        if (t->size() != alphabet.size()) {
          out.push_back("payoff table for " + name + " has " + std::to_string(t->size()) + " entries, alphabet has " +
                        std::to_string(alphabet.size()));
        } else if (!std::ranges::all_of(*t, [](double u) { return std::isfinite(u); })) {
          out.push_back("payoff table for " + name + " has a non-finite entry");
        }
      }
    }
    for (const auto& [k, _] : payoffs) {
      if (k.from >= robots.size() || k.to >= robots.size() || k.from == k.to) {
        out.push_back("payoff table for an unknown pair");
      }
    }
    if (optimizer.method == Method::Ga) {
      for (const auto& p : optimizer.ga.problems()) out.push_back("optimizer: " + p);
    }
    return out;
  }

  void check() const {
    auto p = problems();
    if (!p.empty()) throw Error(Errc::InvalidScenario, p.front());
  }

  /// Payoff model with this scenario's u tables and neutral beliefs.
  PayoffModel payoff_model() const {
    PayoffModel pm(robots.size(), alphabet);
    for (const auto& [k, t] : payoffs) {
      for (std::size_t a = 0; a < alphabet.size(); ++a) {
        pm.payoff(k.from, k.to, CoopState::Cooperating, a) = t.coop[a];
        pm.payoff(k.from, k.to, CoopState::NotCooperating, a) = t.noncoop[a];
      }
    }
    return pm;
  }
};

/// Per-pair cooperation states over a fixed pair set.
struct CoopGraph {
  ActionMode mode = ActionMode::Directed;
  std::vector<PairKey> pairs;
  std::vector<CoopState> states;

  static CoopGraph empty(std::size_t n, ActionMode mode) {
    CoopGraph g{mode, pair_keys(n, mode), {}};
    g.states.assign(g.pairs.size(), CoopState::NotCooperating);
    return g;
  }

  /// State of the pair governing (i, j); untracked pairs read as 0.
  CoopState state(std::size_t i, std::size_t j) const {
    const PairKey k = coordinate_key(i, j, mode);
    auto it = std::ranges::lower_bound(pairs, k);
    if (it == pairs.end() || *it != k) return CoopState::NotCooperating;
    return states[static_cast<std::size_t>(it - pairs.begin())];
  }

  void set(std::size_t i, std::size_t j, CoopState s) {
    const PairKey k = coordinate_key(i, j, mode);
    auto it = std::ranges::lower_bound(pairs, k);
    if (it == pairs.end() || *it != k) throw Error(Errc::InvalidParams, "pair is not tracked by this graph");
    states[static_cast<std::size_t>(it - pairs.begin())] = s;
  }

  /// Undirected cooperation edge: the symmetric state, or both directed states.
  bool linked(std::size_t i, std::size_t j) const {
    if (mode == ActionMode::Symmetric) return state(i, j) == CoopState::Cooperating;
    return state(i, j) == CoopState::Cooperating && state(j, i) == CoopState::Cooperating;
  }

  double density() const {
    if (states.empty()) return 0.0;
    const auto on = std::ranges::count(states, CoopState::Cooperating);
    return static_cast<double>(on) / static_cast<double>(states.size());
  }

  bool operator==(const CoopGraph&) const = default;
};

/// Teams are the connected components of the cooperation graph, in order of
/// their smallest robot index. Singletons are leaves; larger components are
/// formed with the org-model rules and each member keeps its own goals.
inline std::vector<OrgNode> reform_teams(const CoopGraph& graph, std::span<const CooperativeRobot> robots,
                                         const std::map<std::string, GoalSet>& goals = {}) {
  const std::size_t n = robots.size();
  auto goals_of = [&](const std::string& id) {
    auto it = goals.find(id);
    return it == goals.end() ? GoalSet{default_goal(id)} : it->second;
  };

  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (graph.linked(i, j)) {
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
      }
    }
  }

  std::vector<bool> visited(n, false);
  std::vector<OrgNode> forest;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::vector<std::size_t> component;
    std::vector<std::size_t> stack{start};
    visited[start] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (std::size_t w : adjacency[v]) {
        if (!visited[w]) {
          visited[w] = true;
          stack.push_back(w);
        }
      }
    }
    std::ranges::sort(component);

    if (component.size() == 1) {
      forest.emplace_back(Leaf{robots[start].id, goals_of(robots[start].id), {}, {}, 0.0});
      continue;
    }
    std::vector<CooperativeRobot> members;
    GoalSet all;
    for (std::size_t v : component) {
      members.push_back(robots[v]);
      const auto g = goals_of(robots[v].id);
      all.insert(g.begin(), g.end());
    }
    OrgNode team = form_team(members, all, 0, forest.size());
    std::map<std::size_t, GoalSet> assignment;
    for (std::size_t k = 0; k < team.team().children.size(); ++k) {
      assignment[k] = goals_of(team.team().children[k].head());
    }
    forest.push_back(decompose_goal(team, assignment));
  }
  return forest;
}

struct PairRecord {
  PairKey key;
  /// Prior in force during this epoch.
  double prior = 0.0;
  /// Action chosen on this pair's coordinate (a_from,to).
  std::size_t action = 0;
  double posterior = 0.0;
  TransitionMatrix transition;
  /// State after this epoch's step.
  CoopState state = CoopState::NotCooperating;

  bool operator==(const PairRecord&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::vector<std::string> robot_ids;
  ActionAlphabet alphabet;
  JointProfile profile;
  std::vector<PairRecord> pairs;
  TransitionMatrix aggregate;
  std::vector<double> member_payoffs;
  double team_payoff = 0.0;
  std::vector<double> realized_payoffs;
  std::vector<OrgNode> teams;
  /// Benefit accrued by each team this epoch, aligned with `teams`.
  std::vector<double> team_eu;

  CoopGraph graph() const {
    CoopGraph g{profile.mode, {}, {}};
    for (const auto& p : pairs) {
      g.pairs.push_back(p.key);
      g.states.push_back(p.state);
    }
    return g;
  }

  bool operator==(const EpochRecord&) const = default;
};

using Trajectory = std::vector<EpochRecord>;

/// P_ij(c1|a) for the optimizer: the Bayes posterior, or the prior when the
/// action is impossible under both hypotheses.
inline double belief_for(const PairModel& model, std::size_t a) {
  if (!(evidence(model, a) > 0.0)) return model.prior_coop;
  return posterior_coop(model, a);
}

/// Realized payoff of member i: u_ij(c_ij, a_ij) summed over partners.
inline double realized_payoff(const PayoffModel& model, const JointProfile& profile, const CoopGraph& graph,
                              std::size_t i) {
  double total = 0.0;
  for (std::size_t pos = 0; pos + 1 < profile.n(); ++pos) {
    const std::size_t j = partner_of(i, pos);
    total += model.payoff(i, j, graph.state(i, j), profile.vectors[i].actions[pos]);
  }
  return total;
}

namespace detail {

/// Writes realized payoffs into leaf benefits and sums them up each team.
inline double accrue(OrgNode& node, const std::map<std::string, double>& realized) {
  if (node.is_leaf()) {
    node.leaf().benefit = realized.at(node.leaf().robot_id);
    return node.leaf().benefit;
  }
  double total = 0.0;
  for (auto& c : node.team().children) total += accrue(c, realized);
  node.team().benefit = total;
  return total;
}

template <class F>
decltype(auto) with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_context(context);
  }
}

}  // namespace detail

/// Seed handed to the GA in a given epoch.
constexpr std::uint64_t optimizer_seed(std::uint64_t master, std::size_t epoch) noexcept {
  return rng::mix(rng::mix(master, 0x6761ULL), epoch);
}

inline Trajectory run(const Scenario& scenario) {
  scenario.check();
  const std::size_t n = scenario.robots.size();
  const ActionMode mode = scenario.mode;
  const auto keys = pair_keys(n, mode);
  const PayoffModel base = scenario.payoff_model();

  std::vector<std::string> ids;
  for (const auto& r : scenario.robots) ids.push_back(r.id);

  std::vector<PairModel> models;
  CoopGraph graph{mode, keys, {}};
  for (const auto& k : keys) {
    models.push_back(scenario.pairs.at(k).model);
    graph.states.push_back(scenario.pairs.at(k).initial);
  }
  auto model_of = [&](std::size_t i, std::size_t j) -> const PairModel& {
    const PairKey k = coordinate_key(i, j, mode);
    return models[static_cast<std::size_t>(std::ranges::lower_bound(keys, k) - keys.begin())];
  };

  Trajectory trajectory;
  trajectory.reserve(scenario.epochs);
  for (std::size_t epoch = 0; epoch < scenario.epochs; ++epoch) {
    const std::string where = "epoch " + std::to_string(epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.robot_ids = ids;
    rec.alphabet = scenario.alphabet;

    PayoffModel pm = base;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        detail::with_context(where + ", pair " + scenario.pair_name(coordinate_key(i, j, mode)), [&] {
          for (std::size_t a = 0; a < scenario.alphabet.size(); ++a) pm.belief(i, j, a) = belief_for(model_of(i, j), a);
        });
      }
    }

    const OptimizationResult best = detail::with_context(where + ", optimizer", [&] {
      if (scenario.optimizer.method == Method::Ga) {
        return ga_optimize(pm, mode, scenario.optimizer.ga, optimizer_seed(scenario.seed, epoch));
      }
      return brute_force_optimize(pm, mode, scenario.optimizer.cap, scenario.seed);
    });
    rec.profile = best.profile;
    rec.member_payoffs = best.member_payoffs;
    rec.team_payoff = best.team_payoff;

    std::vector<TransitionMatrix> matrices;
    for (std::size_t p = 0; p < keys.size(); ++p) {
      const PairKey k = keys[p];
      detail::with_context(where + ", pair " + scenario.pair_name(k), [&] {
        PairRecord pr;
        pr.key = k;
        pr.prior = models[p].prior_coop;
        pr.action = rec.profile.action(k.from, k.to);
        pr.posterior = belief_for(models[p], pr.action);
        pr.transition = pair_transition(models[p]);
        const double draw = rng::pair_draw(scenario.seed, ids[k.from], ids[k.to], epoch);
        pr.state = step_pair(graph.states[p], pr.transition, draw);
        graph.states[p] = pr.state;
        matrices.push_back(pr.transition);
        rec.pairs.push_back(pr);
      });
    }
    if (!matrices.empty()) rec.aggregate = aggregate_transition(matrices);

    rec.teams = reform_teams(graph, scenario.robots, scenario.goals);

    std::map<std::string, double> realized;
    for (std::size_t i = 0; i < n; ++i) {
      rec.realized_payoffs.push_back(realized_payoff(pm, rec.profile, graph, i));
      realized[ids[i]] = rec.realized_payoffs.back();
    }
    for (auto& team : rec.teams) rec.team_eu.push_back(detail::accrue(team, realized));

    if (scenario.prior_update == PriorUpdate::PosteriorFeedback) {
      for (std::size_t p = 0; p < keys.size(); ++p) models[p].prior_coop = rec.pairs[p].posterior;
    }
    trajectory.push_back(std::move(rec));
  }
  return trajectory;
}

struct EpochMetrics {
  std::size_t epoch = 0;
  double cooperation_density = 0.0;
  std::size_t team_count = 0;
  double mean_team_size = 0.0;
  double team_payoff = 0.0;
  double eu = 0.0;
  double cumulative_eu = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

struct MetricsSummary {
  std::vector<EpochMetrics> epochs;
  double mean_density = 0.0;
  double mean_team_count = 0.0;
  double mean_team_size = 0.0;
  double total_team_payoff = 0.0;
  double cumulative_eu = 0.0;
};

/// Team count includes singleton robots.
inline MetricsSummary metrics(std::span<const EpochRecord> trajectory) {
  if (trajectory.empty()) throw Error(Errc::EmptyTrajectory, "no epochs to summarize");
  MetricsSummary s;
  double cumulative = 0.0;
  for (const auto& rec : trajectory) {
    EpochMetrics e;
    e.epoch = rec.epoch;
    e.cooperation_density = rec.graph().density();
    e.team_count = rec.teams.size();
    e.mean_team_size = e.team_count == 0 ? 0.0
                                          : static_cast<double>(rec.robot_ids.size()) / static_cast<double>(e.team_count);
    e.team_payoff = rec.team_payoff;
    e.eu = std::accumulate(rec.team_eu.begin(), rec.team_eu.end(), 0.0);
    cumulative += e.eu;
    e.cumulative_eu = cumulative;
    s.mean_density += e.cooperation_density;
    s.mean_team_count += static_cast<double>(e.team_count);
    s.mean_team_size += e.mean_team_size;
    s.total_team_payoff += e.team_payoff;
    s.epochs.push_back(e);
  }
  const auto count = static_cast<double>(trajectory.size());
  s.mean_density /= count;
  s.mean_team_count /= count;
  s.mean_team_size /= count;
  s.cumulative_eu = cumulative;
  return s;
}

}  // namespace teamcoop
