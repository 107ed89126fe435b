// teamcoop command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime error, 3 bad arguments.
// TEAMCOOP_LOG=quiet|info|debug sets how much goes to stderr (default info).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "teamcoop/teamcoop.hpp"

namespace fs = std::filesystem;
using namespace teamcoop;

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kRuntime = 2, kUsage = 3 };

enum class Level { Quiet, Info, Debug };

Level log_level() {
  const char* v = std::getenv("TEAMCOOP_LOG");
  if (v == nullptr) return Level::Info;
  const std::string_view s(v);
  if (s == "quiet" || s == "0") return Level::Quiet;
  if (s == "debug" || s == "2") return Level::Debug;
  return Level::Info;
}

void log(Level at, const std::string& msg) {
  if (at <= log_level()) std::cerr << msg << '\n';
}

struct Failure {
  int code;
  std::vector<std::string> lines;
};

[[noreturn]] void fail(int code, std::vector<std::string> lines) { throw Failure{code, std::move(lines)}; }

int exit_for(Errc c) {
  switch (c) {
    case Errc::Parse:
    case Errc::InvalidScenario:
    case Errc::InvalidModel:
    case Errc::EmptyTrajectory:
      return kInvalid;
    default:
      return kRuntime;
  }
}

io::Json load_json(const std::string& path) {
  try {
    return io::load(path);
  } catch (const Error& e) {
    fail(kInvalid, {e.detail()});
  }
}

// Temp files are written next to their targets and only renamed once every
// file in the batch has been written.
void write_all(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& [tmp, _] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [target, text] : files) {
    fs::path tmp = target;
    tmp += ".tmp";
    staged.emplace_back(tmp, target);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
      cleanup();
      fail(kRuntime, {"cannot write '" + target.string() + "'"});
    }
  }
  for (const auto& [tmp, target] : staged) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      cleanup();
      fail(kRuntime, {"cannot rename '" + tmp.string() + "': " + ec.message()});
    }
  }
}

Scenario load_scenario(const std::string& path) {
  Scenario s;
  try {
    s = io::scenario_from_json(load_json(path));
  } catch (const Error& e) {
    fail(kInvalid, {e.detail()});
  }
  return s;
}

io::ProblemFile load_problem(const std::string& path) {
  try {
    return io::problem_from_json(load_json(path));
  } catch (const Error& e) {
    fail(kInvalid, {e.detail()});
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string out;
};

int simulate(const SimulateArgs& a) {
  Scenario s = load_scenario(a.scenario);
  if (a.seed) s.seed = *a.seed;
  if (a.epochs) s.epochs = *a.epochs;
  if (auto p = s.problems(); !p.empty()) fail(kInvalid, p);

  log(Level::Debug, "running " + std::to_string(s.epochs) + " epochs, seed " + std::to_string(s.seed));
  Trajectory t;
  MetricsSummary m;
  try {
    t = run(s);
    m = metrics(t);
  } catch (const Error& e) {
    fail(exit_for(e.code()), {e.what()});
  }

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(kRuntime, {"cannot create '" + dir.string() + "': " + ec.message()});
  write_all({{dir / "trajectory.jsonl", io::trajectory_to_jsonl(t)}, {dir / "metrics.csv", io::metrics_to_csv(m)}});

  std::cout << "simulated " << t.size() << " epochs, " << s.robots.size() << " robots, seed " << s.seed
            << ": mean density " << fmt(m.mean_density) << ", mean teams " << fmt(m.mean_team_count)
            << ", cumulative EU " << fmt(m.cumulative_eu) << '\n';
  log(Level::Info, "wrote " + (dir / "trajectory.jsonl").string() + " and " + (dir / "metrics.csv").string());
  return kOk;
}

// ---- optimize ------------------------------------------------------------

struct OptimizeArgs {
  std::string problem;
  std::string method = "brute";
  std::uint64_t seed = 0;
  std::string out;
};

int optimize(const OptimizeArgs& a) {
  const auto file = load_problem(a.problem);
  if (!file.problems.empty()) fail(kInvalid, file.problems);
  const auto& p = file.problem;
  const auto& alphabet = p.model.alphabet();

  OptimizationResult r;
  std::optional<OptimizationResult> reference;
  try {
    if (a.method == "brute") {
      r = brute_force_optimize(p.model, p.mode, p.cap, a.seed);
    } else {
      r = ga_optimize(p.model, p.mode, p.ga, a.seed);
      if (brute_force_space(p.model.n(), p.model.m(), p.mode, p.cap)) {
        reference = brute_force_optimize(p.model, p.mode, p.cap, a.seed);
      }
    }
  } catch (const Error& e) {
    fail(exit_for(e.code()), {e.what()});
  }

  write_all({{fs::path(a.out), io::to_json(r, alphabet).dump(2) + "\n"}});

  if (a.method == "brute") {
    std::cout << "optimum team payoff " << fmt(r.team_payoff) << " (" << r.evaluations << " evaluations)\n";
    for (std::size_t i = 0; i < r.profile.n(); ++i) {
      std::cout << "  member " << i << ":";
      for (auto x : r.profile.vectors[i].actions) std::cout << ' ' << alphabet[x];
      std::cout << "  payoff " << fmt(r.member_payoffs[i]) << '\n';
    }
  } else {
    std::cout << "ga best team payoff " << fmt(r.team_payoff) << " (" << r.evaluations << " evaluations)";
    if (reference) {
      std::cout << ", brute optimum " << fmt(reference->team_payoff) << ", gap "
                << fmt(reference->team_payoff - r.team_payoff);
    } else {
      std::cout << ", brute force infeasible";
    }
    std::cout << '\n';
  }
  return kOk;
}

// ---- validate ------------------------------------------------------------

struct ValidateArgs {
  std::string scenario;
  std::string problem;
  std::string structure;
};

int validate_cmd(const ValidateArgs& a) {
  std::vector<std::string> found;
  if (!a.scenario.empty()) {
    found = load_scenario(a.scenario).problems();
  } else if (!a.problem.empty()) {
    found = load_problem(a.problem).problems;
  } else {
    try {
      for (const auto& v : validate(io::structure_from_json(load_json(a.structure)))) {
        found.push_back(v.path + ": " + v.what);
      }
    } catch (const Error& e) {
      fail(kInvalid, {e.detail()});
    }
  }
  if (!found.empty()) fail(kInvalid, found);
  std::cout << "OK\n";
  return kOk;
}

// ---- metrics -------------------------------------------------------------

struct MetricsArgs {
  std::string trajectory;
  std::string out;
};

int metrics_cmd(const MetricsArgs& a) {
  MetricsSummary m;
  try {
    m = metrics(io::trajectory_from_jsonl(io::read_text(a.trajectory), a.trajectory));
  } catch (const Error& e) {
    fail(exit_for(e.code()), {e.detail()});
  }
  write_all({{fs::path(a.out), io::metrics_to_csv(m)}});
  std::cout << m.epochs.size() << " epochs: mean density " << fmt(m.mean_density) << ", mean teams "
            << fmt(m.mean_team_count) << ", mean team size " << fmt(m.mean_team_size) << ", cumulative EU "
            << fmt(m.cumulative_eu) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot team organization, cooperation and payoff tools"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Run a scenario and write trajectory.jsonl and metrics.csv");
  cmd_sim->add_option("--scenario", sim.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd_sim->add_option("--seed", sim.seed, "Override the scenario seed");
  cmd_sim->add_option("--epochs", sim.epochs, "Override the number of epochs (>= 1)")->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  cmd_sim->add_option("--out", sim.out, "Output directory")->required();

  OptimizeArgs opt;
  auto* cmd_opt = app.add_subcommand("optimize", "Optimize a standalone payoff problem");
  cmd_opt->add_option("--problem", opt.problem, "Problem JSON file")->required()->check(CLI::ExistingFile);
  cmd_opt->add_option("--method", opt.method, "brute or ga")->check(CLI::IsMember({"brute", "ga"}))->capture_default_str();
  cmd_opt->add_option("--seed", opt.seed, "Seed for the genetic algorithm")->capture_default_str();
  cmd_opt->add_option("--out", opt.out, "Result JSON file")->required();

  ValidateArgs val;
  auto* cmd_val = app.add_subcommand("validate", "Check a scenario, problem or team structure file");
  auto* v1 = cmd_val->add_option("--scenario", val.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  auto* v2 = cmd_val->add_option("--problem", val.problem, "Problem JSON file")->check(CLI::ExistingFile);
  auto* v3 = cmd_val->add_option("--structure", val.structure, "Team structure JSON file")->check(CLI::ExistingFile);
  v1->excludes(v2)->excludes(v3);
  v2->excludes(v3);
  cmd_val->require_option(1);

  MetricsArgs met;
  auto* cmd_met = app.add_subcommand("metrics", "Summarize an existing trajectory into metrics CSV");
  cmd_met->add_option("--trajectory", met.trajectory, "Trajectory JSONL file")->required()->check(CLI::ExistingFile);
  cmd_met->add_option("--out", met.out, "Metrics CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*cmd_sim) return simulate(sim);
    if (*cmd_opt) return optimize(opt);
    if (*cmd_val) return validate_cmd(val);
    return metrics_cmd(met);
  } catch (const Failure& f) {
    if (f.code == kInvalid && *cmd_val) {
      std::cout << f.lines.size() << (f.lines.size() == 1 ? " problem" : " problems") << ":\n";
      for (const auto& l : f.lines) std::cout << "  - " << l << '\n';
    } else {
      for (const auto& l : f.lines) std::cerr << "error: " << l << '\n';
    }
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
