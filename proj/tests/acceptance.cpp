// Acceptance checks AC1..AC10. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/testkit.hpp"
#include "teamcoop/serialization.hpp"

namespace fs = std::filesystem;
using namespace teamcoop;
using testkit::Engine;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double limit_seconds;
  std::function<Verdict()> check;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string data(const std::string& rel) { return std::string(TEAMCOOP_DATA_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = "TEAMCOOP_LOG=quiet '" + std::string(TEAMCOOP_CLI) + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---- AC1 / AC2 -----------------------------------------------------------

std::vector<PairModel> thousand_models() {
  Engine e(1001);
  std::vector<PairModel> out;
  for (int k = 0; k < 1000; ++k) out.push_back(testkit::pair_model(e, 1 + e.below(6)));
  return out;
}

Verdict ac1() {
  double worst_posterior = 0.0;
  double worst_evidence = 0.0;
  std::size_t checked = 0;
  for (const auto& m : thousand_models()) {
    double total = 0.0;
    for (std::size_t a = 0; a < m.alphabet.size(); ++a) {
      const double ev = evidence(m, a);
      total += ev;
      if (ev > 0.0) {
        worst_posterior = std::max(worst_posterior, std::abs(posterior_coop(m, a) + posterior_noncoop(m, a) - 1.0));
        ++checked;
      }
    }
    worst_evidence = std::max(worst_evidence, std::abs(total - 1.0));
  }
  return {worst_posterior <= 1e-12 && worst_evidence <= 1e-12,
          std::to_string(checked) + " actions, max |post sum - 1| " + num(worst_posterior) + ", max |evidence sum - 1| " +
              num(worst_evidence)};
}

Verdict ac2() {
  double worst = 0.0;
  bool in_range = true;
  for (const auto& m : thousand_models()) {
    const auto t = pair_transition(m);
    for (double x : {t.p11, t.p10, t.p01, t.p00}) in_range &= x >= 0.0 && x <= 1.0;
    worst = std::max({worst, std::abs(t.p11 + t.p10 - 1.0), std::abs(t.p01 + t.p00 - 1.0)});
  }
  return {in_range && worst <= 1e-12,
          std::string(in_range ? "entries in [0,1]" : "entry outside [0,1]") + ", max |row sum - 1| " + num(worst)};
}

// ---- AC3 -----------------------------------------------------------------

Verdict ac3() {
  const double p10 = 0.3;
  const double p01 = 0.2;
  const double closed = p01 / (p01 + p10);
  const auto m = TransitionMatrix::from_coop_rows(1.0 - p10, p01);
  const double library = stationary(m).coop;
  Engine e(3003);
  CoopState s = CoopState::NotCooperating;
  std::size_t on = 0;
  const std::size_t draws = 200'000;
  for (std::size_t k = 0; k < draws; ++k) {
    s = step_pair(s, m, e.uniform());
    on += s == CoopState::Cooperating ? 1 : 0;
  }
  const double freq = static_cast<double>(on) / static_cast<double>(draws);
  return {std::abs(closed - 0.4) < 1e-15 && std::abs(library - closed) <= 1e-12 && std::abs(freq - closed) <= 0.01,
          "closed form " + num(closed) + ", stationary() " + num(library) + ", empirical " + num(freq)};
}

// ---- AC4 -----------------------------------------------------------------

// Two-state chains have M^k = Pi + lambda^k (I - Pi), lambda = 1 - p10 - p01.
double closed_p11(const TransitionMatrix& m, int k) {
  const double flow = m.p10 + m.p01;
  const double pi1 = m.p01 / flow;
  return pi1 + (1.0 - pi1) * std::pow(1.0 - flow, k);
}

double closed_p01(const TransitionMatrix& m, int k) {
  const double flow = m.p10 + m.p01;
  const double pi1 = m.p01 / flow;
  return pi1 - pi1 * std::pow(1.0 - flow, k);
}

Verdict ac4() {
  Engine e(4004);
  double ck = 0.0;
  double nested = 0.0;
  double closed = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto m = testkit::transition(e);
    const auto five = n_step(m, 5);
    const auto split = multiply(n_step(m, 2), n_step(m, 3));
    const auto six = n_step(m, 6);
    const auto two_then_three = n_step(n_step(m, 2), 3);
    ck = std::max({ck, std::abs(five.p11 - split.p11), std::abs(five.p01 - split.p01)});
    nested = std::max({nested, std::abs(six.p11 - two_then_three.p11), std::abs(six.p01 - two_then_three.p01)});
    closed = std::max({closed, std::abs(five.p11 - closed_p11(m, 5)), std::abs(five.p01 - closed_p01(m, 5))});
  }
  return {ck <= 1e-12 && nested <= 1e-12 && closed <= 1e-12,
          "100 matrices, |M^5 - M^2 M^3| " + num(ck) + ", |(M^2)^3 - M^6| " + num(nested) + ", |M^5 - closed form| " +
              num(closed)};
}

// ---- AC5 -----------------------------------------------------------------

Verdict ac5() {
  Engine e(5005);
  std::size_t total = 0;
  std::size_t argmax_match = 0;
  std::size_t ga_hits = 0;
  std::size_t ga_exceeds = 0;
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::size_t m = 2; m <= 4; ++m) {
      for (int k = 0; k < 30; ++k) {
        const auto pm = testkit::payoff_model(e, n, m);
        const auto brute = brute_force_optimize(pm, ActionMode::Directed);
        const auto ga = ga_optimize(pm, ActionMode::Directed, {}, e.bits());
        const double oracle = testkit::direct_team_payoff(pm, testkit::coordinatewise_argmax(pm));
        const double tol = 1e-9 * std::max(1.0, std::abs(oracle));
        ++total;
        if (testkit::action_matrix(brute.profile) == testkit::coordinatewise_argmax(pm) &&
            std::abs(brute.team_payoff - oracle) <= tol) {
          ++argmax_match;
        }
        if (ga.team_payoff > brute.team_payoff + tol) ++ga_exceeds;
        if (ga.team_payoff >= brute.team_payoff - tol) ++ga_hits;
      }
    }
  }
  const double rate = static_cast<double>(ga_hits) / static_cast<double>(total);
  return {argmax_match == total && rate >= 0.95 && ga_exceeds == 0,
          std::to_string(total) + " instances, argmax agreement " + std::to_string(argmax_match) + "/" +
              std::to_string(total) + ", ga optimal " + std::to_string(ga_hits) + "/" + std::to_string(total) +
              ", ga above brute " + std::to_string(ga_exceeds)};
}

// ---- AC6 -----------------------------------------------------------------

Verdict ac6() {
  Engine e(6006);
  std::size_t unchanged = 0;
  const int instances = 50;
  for (int k = 0; k < instances; ++k) {
    const std::size_t n = 2 + e.below(2);
    const std::size_t m = 2 + e.below(2);
    const bool symmetric = e.bernoulli(0.5);
    const auto mode = symmetric ? ActionMode::Symmetric : ActionMode::Directed;
    const auto pm = testkit::payoff_model(e, n, m);
    const auto base = testkit::enumerate_joint(pm, symmetric).argmax;
    const std::set<std::vector<std::vector<std::size_t>>> base_set(base.begin(), base.end());
    const auto base_profile = brute_force_optimize(pm, mode).profile;
    bool same = true;
    for (double scale : {0.5, 3.0, 100.0}) {
      const auto scaled = pm.scaled(scale);
      const auto opt = testkit::enumerate_joint(scaled, symmetric).argmax;
      same &= std::set<std::vector<std::vector<std::size_t>>>(opt.begin(), opt.end()) == base_set;
      same &= brute_force_optimize(scaled, mode).profile == base_profile;
    }
    unchanged += same ? 1 : 0;
  }
  return {unchanged == instances, std::to_string(unchanged) + "/" + std::to_string(instances) +
                                      " instances keep the optimal set for k in {0.5, 3, 100}"};
}

// ---- AC7 -----------------------------------------------------------------

Verdict ac7() {
  Engine e(7007);
  std::size_t failures = 0;
  std::size_t steps = 0;
  std::string first;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t len = 1 + e.below(50);
    steps += len;
    failures += testkit::org_fuzz(e, len, [&](const std::vector<Violation>& v) {
      if (first.empty()) first = v.front().path + ": " + v.front().what;
    });
  }
  return {failures == 0, "1000 sequences, " + std::to_string(steps) + " operations, " + std::to_string(failures) +
                             " invalid structures" + (first.empty() ? "" : " (first: " + first + ")")};
}

// ---- AC8 -----------------------------------------------------------------

Verdict ac8(const fs::path& scratch) {
  const auto scenario = data("scenarios/three_robots.json");
  const int a = cli("simulate --scenario " + scenario + " --seed 42 --out " + (scratch / "run_a").string());
  const int b = cli("simulate --scenario " + scenario + " --seed 42 --out " + (scratch / "run_b").string());
  const auto ta = slurp(scratch / "run_a/trajectory.jsonl");
  const auto tb = slurp(scratch / "run_b/trajectory.jsonl");
  const auto ma = slurp(scratch / "run_a/metrics.csv");
  const auto mb = slurp(scratch / "run_b/metrics.csv");
  const bool ok = a == 0 && b == 0 && !ta.empty() && !ma.empty() && ta == tb && ma == mb;
  return {ok, "trajectory " + std::to_string(ta.size()) + " bytes " + (ta == tb ? "identical" : "DIFFER") +
                  ", metrics " + std::to_string(ma.size()) + " bytes " + (ma == mb ? "identical" : "DIFFER")};
}

// ---- AC9 -----------------------------------------------------------------

Verdict ac9() {
  Engine e(9009);
  std::size_t bad = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + e.below(10);
    const auto mode = e.bernoulli(0.5) ? ActionMode::Directed : ActionMode::Symmetric;
    auto g = CoopGraph::empty(n, mode);
    for (auto& s : g.states) s = coop_state(e.bernoulli(e.uniform()));
    std::vector<CooperativeRobot> robots;
    for (std::size_t i = 0; i < n; ++i) robots.push_back(make_robot("r" + std::to_string(i), testkit::random_capability(e), {}, {}));

    std::vector<std::vector<bool>> half(n, std::vector<bool>(n, false));
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
      if (g.states[p] != CoopState::Cooperating) continue;
      half[g.pairs[p].from][g.pairs[p].to] = true;
      if (mode == ActionMode::Symmetric) half[g.pairs[p].to][g.pairs[p].from] = true;
    }
    auto edge = [&](std::size_t i, std::size_t j) { return half[i][j] && half[j][i]; };
    testkit::UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (edge(i, j)) uf.unite(i, j);
      }
    }

    const auto forest = reform_teams(g, robots);
    std::vector<std::size_t> team_of(n, n);
    bool ok = true;
    for (std::size_t t = 0; t < forest.size(); ++t) {
      std::vector<std::size_t> members;
      for (const auto& id : forest[t].members()) {
        const std::size_t i = std::stoul(id.substr(1));
        ok &= team_of[i] == n;
        team_of[i] = t;
        members.push_back(i);
      }
      // Connected through state-1 edges inside the team.
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{members.front()};
      seen[members.front()] = true;
      std::size_t reached = 0;
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        ++reached;
        for (auto w : members) {
          if (!seen[w] && edge(v, w)) {
            seen[w] = true;
            stack.push_back(w);
          }
        }
      }
      ok &= reached == members.size();
    }
    for (std::size_t i = 0; i < n; ++i) {
      ok &= team_of[i] < n;
      for (std::size_t j = 0; j < n && ok; ++j) {
        ok &= (team_of[i] == team_of[j]) == (uf.find(i) == uf.find(j));
        if (edge(i, j)) ok &= team_of[i] == team_of[j];
      }
    }
    bad += ok ? 0 : 1;
  }
  return {bad == 0, "200 graphs, " + std::to_string(bad) + " mismatches against union-find"};
}

// ---- AC10 ----------------------------------------------------------------

Verdict ac10(const fs::path& scratch) {
  struct Case {
    std::string args;
    int expected;
  };
  const std::string out = scratch.string();
  const std::vector<Case> cases{
      {"validate --scenario " + data("scenarios/three_robots.json"), 0},
      {"validate --problem " + data("problems/three_by_two.json"), 0},
      {"validate --structure " + data("structures/two_level.json"), 0},
      {"simulate --scenario " + data("scenarios/four_robots_feedback.json") + " --out " + out + "/sim", 0},
      {"metrics --trajectory " + out + "/sim/trajectory.jsonl --out " + out + "/metrics.csv", 0},
      {"optimize --problem " + data("problems/three_by_two.json") + " --method brute --out " + out + "/b.json", 0},
      {"optimize --problem " + data("problems/symmetric_four.json") + " --method ga --seed 1 --out " + out + "/g.json", 0},
      {"validate --scenario " + data("invalid/likelihood_sum.json"), 1},
      {"validate --scenario " + data("invalid/missing_pair.json"), 1},
      {"validate --scenario " + data("invalid/malformed.json"), 1},
      {"validate --structure " + data("invalid/structure_bad.json"), 1},
      {"simulate --scenario " + data("invalid/malformed.json") + " --out " + out + "/x", 1},
      {"optimize --problem " + data("invalid/problem_missing_coordinate.json") + " --out " + out + "/x.json", 1},
      {"optimize --problem " + data("problems/too_large.json") + " --method brute --out " + out + "/x.json", 2},
      {"simulate --scenario " + data("scenarios/three_robots.json") + " --epochs 0 --out " + out + "/x", 3},
      {"simulate --scenario " + data("no_such_file.json") + " --out " + out + "/x", 3},
      {"optimize --method ga --out " + out + "/x.json", 3},
      {"metrics --trajectory " + out + "/sim/trajectory.jsonl --out " + out + "/m.csv --bogus", 3},
  };
  std::size_t ok = 0;
  std::string first;
  for (const auto& c : cases) {
    const int got = cli(c.args);
    if (got == c.expected) {
      ++ok;
    } else if (first.empty()) {
      first = "'" + c.args + "' exited " + std::to_string(got) + ", expected " + std::to_string(c.expected);
    }
  }
  const bool metrics_match = slurp(scratch / "metrics.csv") == slurp(scratch / "sim/metrics.csv");
  const bool nothing_partial = !fs::exists(scratch / "x") && !fs::exists(scratch / "x.json");
  return {ok == cases.size() && metrics_match && nothing_partial,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " exit codes as documented" +
              (metrics_match ? "" : ", metrics output differs") + (nothing_partial ? "" : ", partial output left") +
              (first.empty() ? "" : " (" + first + ")")};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("teamcoop_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::vector<Criterion> criteria{
      {"AC1", "Bayes consistency", 5, ac1},
      {"AC2", "Transition validity", 5, ac2},
      {"AC3", "Stationary convergence", 2, ac3},
      {"AC4", "Chapman-Kolmogorov", 1, ac4},
      {"AC5", "Optimizer oracle equivalence", 60, ac5},
      {"AC6", "Scaling argmax invariance", 10, ac6},
      {"AC7", "Org-model fuzz", 10, ac7},
      {"AC8", "Replay determinism", 5, [&] { return ac8(scratch); }},
      {"AC9", "Component soundness", 2, ac9},
      {"AC10", "End-to-end CLI", 10, [&] { return ac10(scratch); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = v.ok && in_time;
    failed += pass ? 0 : 1;
    std::printf("[%s] %s %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(),
                secs, c.limit_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  fs::remove_all(scratch);
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
