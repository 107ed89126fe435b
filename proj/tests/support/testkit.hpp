#pragma once
//
// Test-only generators and independent oracles. Nothing here calls the
// library routine it is used to check.
//

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "teamcoop/teamcoop.hpp"

namespace testkit {

using teamcoop::rng::Engine;

inline double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * e.uniform(); }

inline teamcoop::ActionAlphabet alphabet(std::size_t m) {
  std::vector<std::string> s;
  for (std::size_t a = 0; a < m; ++a) s.push_back("a" + std::to_string(a));
  return teamcoop::ActionAlphabet(std::move(s));
}

/// Random distribution over m outcomes; with `allow_zeros`, entries are
/// sometimes exactly 0.
inline std::vector<double> distribution(Engine& e, std::size_t m, bool allow_zeros) {
  std::vector<double> w(m);
  for (auto& x : w) x = (allow_zeros && e.bernoulli(0.2)) ? 0.0 : uniform(e, 0.01, 1.0);
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[e.below(m)] = 1.0;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

inline teamcoop::PairModel pair_model(Engine& e, std::size_t m, bool allow_zeros = true) {
  teamcoop::PairModel model;
  model.alphabet = alphabet(m);
  const double r = e.uniform();
  model.prior_coop = r < 0.05 ? 0.0 : r < 0.1 ? 1.0 : e.uniform();
  model.likelihood_coop = distribution(e, m, allow_zeros);
  model.likelihood_noncoop = distribution(e, m, allow_zeros);
  return model;
}

inline teamcoop::TransitionMatrix transition(Engine& e) {
  return teamcoop::TransitionMatrix::from_coop_rows(e.uniform(), e.uniform());
}

inline teamcoop::PayoffModel payoff_model(Engine& e, std::size_t n, std::size_t m) {
  teamcoop::PayoffModel pm(n, alphabet(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t a = 0; a < m; ++a) {
        pm.belief(i, j, a) = e.uniform();
        pm.payoff(i, j, teamcoop::CoopState::Cooperating, a) = uniform(e, -10.0, 10.0);
        pm.payoff(i, j, teamcoop::CoopState::NotCooperating, a) = uniform(e, -10.0, 10.0);
      }
    }
  }
  return pm;
}

/// Team payoff written out directly from the definition, over a plain
/// action matrix act[i][j] (diagonal ignored).
inline double direct_team_payoff(const teamcoop::PayoffModel& pm, const std::vector<std::vector<std::size_t>>& act) {
  double total = 0.0;
  for (std::size_t i = 0; i < pm.n(); ++i) {
    for (std::size_t j = 0; j < pm.n(); ++j) {
      if (i == j) continue;
      const std::size_t a = act[i][j];
      const double b = pm.belief(i, j, a);
      total += b * pm.payoff(i, j, teamcoop::CoopState::Cooperating, a) +
               (1.0 - b) * pm.payoff(i, j, teamcoop::CoopState::NotCooperating, a);
    }
  }
  return total;
}

inline std::vector<std::vector<std::size_t>> action_matrix(const teamcoop::JointProfile& p) {
  const std::size_t n = p.n();
  std::vector<std::vector<std::size_t>> act(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) act[i][j] = p.action(i, j);
    }
  }
  return act;
}

/// Every optimal action matrix found by enumerating the full joint space
/// (m^(n(n-1)) directed, m^(n(n-1)/2) symmetric). Values within `tol` of the
/// best count as optimal.
struct JointOptimum {
  double value = 0.0;
  std::vector<std::vector<std::vector<std::size_t>>> argmax;
};

inline JointOptimum enumerate_joint(const teamcoop::PayoffModel& pm, bool symmetric, double tol = 1e-9) {
  const std::size_t n = pm.n();
  const std::size_t m = pm.m();
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i != j) coords.emplace_back(i, j);
    }
  }
  std::vector<std::size_t> digits(coords.size(), 0);
  std::vector<std::pair<double, std::vector<std::vector<std::size_t>>>> all;
  while (true) {
    std::vector<std::vector<std::size_t>> act(n, std::vector<std::size_t>(n, 0));
    for (std::size_t c = 0; c < coords.size(); ++c) {
      act[coords[c].first][coords[c].second] = digits[c];
      if (symmetric) act[coords[c].second][coords[c].first] = digits[c];
    }
    all.emplace_back(direct_team_payoff(pm, act), act);
    std::size_t k = digits.size();
    while (k > 0 && ++digits[k - 1] == m) digits[--k] = 0;
    if (k == 0) break;
  }
  JointOptimum out;
  out.value = std::max_element(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; })->first;
  for (auto& [v, act] : all) {
    if (v >= out.value - tol * std::max(1.0, std::abs(out.value))) out.argmax.push_back(act);
  }
  return out;
}

/// Directed-mode optimum by independent per-coordinate argmax (smallest
/// index on ties).
inline std::vector<std::vector<std::size_t>> coordinatewise_argmax(const teamcoop::PayoffModel& pm) {
  const std::size_t n = pm.n();
  std::vector<std::vector<std::size_t>> act(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double best = 0.0;
      for (std::size_t a = 0; a < pm.m(); ++a) {
        const double b = pm.belief(i, j, a);
        const double v = b * pm.payoff(i, j, teamcoop::CoopState::Cooperating, a) +
                         (1.0 - b) * pm.payoff(i, j, teamcoop::CoopState::NotCooperating, a);
        if (a == 0 || v > best) {
          best = v;
          act[i][j] = a;
        }
      }
    }
  }
  return act;
}

/// Union-find with path halving, used as the component oracle.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

inline teamcoop::CapabilityProfile random_capability(Engine& e) {
  return {e.uniform(), e.uniform(), e.uniform(), e.uniform(), e.uniform(), e.uniform()};
}

inline std::vector<teamcoop::CooperativeRobot> robot_pool(Engine& e, std::size_t count) {
  std::vector<teamcoop::CooperativeRobot> out;
  for (std::size_t k = 0; k < count; ++k) {
    auto cap = random_capability(e);
    // Coarse scores make leadership ties common.
    cap.organizing = static_cast<double>(e.below(4)) / 4.0;
    cap.communicating = static_cast<double>(e.below(4)) / 4.0;
    out.push_back(teamcoop::make_robot("r" + std::to_string(k), cap, {{"battery", uniform(e, 0.0, 100.0)}}, {"wifi"}));
  }
  return out;
}

/// Runs `steps` random org-model operations from a fresh team and returns
/// the number of validate() failures observed along the way. `on_violation`
/// receives each failing structure's violations.
template <class OnViolation>
std::size_t org_fuzz(Engine& e, std::size_t steps, OnViolation&& on_violation) {
  using namespace teamcoop;
  const auto pool = robot_pool(e, 12);
  const Registry registry = Registry::of(pool);
  std::size_t goal_counter = 0;
  auto fresh_goals = [&](std::size_t count) {
    GoalSet g;
    for (std::size_t k = 0; k < count; ++k) g.insert("g" + std::to_string(goal_counter++));
    return g;
  };
  auto non_members = [&](const OrgNode& node) {
    std::vector<CooperativeRobot> out;
    for (const auto& r : pool) {
      if (!node.contains(r.id)) out.push_back(r);
    }
    return out;
  };
  auto fresh_team = [&]() {
    std::vector<CooperativeRobot> members;
    for (const auto& r : pool) {
      if (e.bernoulli(0.3)) members.push_back(r);
    }
    if (members.empty()) members.push_back(pool[e.below(pool.size())]);
    return form_team(members, fresh_goals(1 + e.below(4)), 0, 0);
  };

  OrgNode root = fresh_team();
  std::size_t failures = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto op = e.below(5);
    if (op == 0) {
      root = fresh_team();
    } else if (op == 1) {
      auto outside = non_members(root);
      if (!outside.empty()) root = join(registry, root, outside[e.below(outside.size())]);
    } else if (op == 2) {
      const auto members = root.members();
      auto result = leave(registry, root, members[e.below(members.size())]);
      if (std::holds_alternative<Dissolved>(result)) {
        root = fresh_team();
      } else {
        root = std::get<OrgNode>(std::move(result));
      }
    } else if (op == 3) {
      const auto& team = root.team();
      std::map<std::size_t, GoalSet> assignment;
      for (std::size_t k = 0; k < team.children.size(); ++k) assignment[k];
      for (const auto& g : team.goals) assignment[e.below(team.children.size())].insert(g);
      root = decompose_goal(root, assignment);
    } else {
      auto outside = non_members(root);
      if (outside.size() >= 2) {
        std::vector<CooperativeRobot> sub;
        for (const auto& r : outside) {
          if (e.bernoulli(0.4)) sub.push_back(r);
        }
        if (sub.empty()) sub.push_back(outside.front());
        root = attach_subteam(registry, root, form_team(sub, fresh_goals(1 + e.below(3)), 1, e.below(3)));
      }
    }
    auto v = validate(registry, {}, root);
    if (!v.empty()) {
      ++failures;
      on_violation(v);
    }
  }
  return failures;
}

}  // namespace testkit
