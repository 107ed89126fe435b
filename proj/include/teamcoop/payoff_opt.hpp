#pragma once
//
// Belief-weighted payoff of cooperation-related action sets, and the search
// for the best joint profile.
//
// Member i picks one action a_ij toward every partner j. Its payoff is
//
//   C_i(A_i) = sum_j P_ij(c1|a_ij) u_ij(c1,a_ij) + sum_j P_ij(c0|a_ij) u_ij(c0,a_ij)
//
// and the team payoff is sum_i C_i, accumulated in member order 0..n-1.
// In directed mode a_ij and a_ji are independent; in symmetric mode they are
// one shared choice.
//
// Search-space genomes list the free coordinates in a fixed order: directed
// mode goes member-major (i, then partners in increasing j); symmetric mode
// lists pairs i < j lexicographically. Ties between equal-payoff profiles go
// to the lexicographically smallest genome.
//
// Evaluation counts in results are member-payoff evaluations, so a full
// team-payoff evaluation counts n.
//

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "teamcoop/coop_bayes.hpp"
#include "teamcoop/error.hpp"
#include "teamcoop/random.hpp"

namespace teamcoop {

enum class ActionMode { Directed, Symmetric };

constexpr std::string_view to_string(ActionMode mode) noexcept {
  return mode == ActionMode::Directed ? "directed" : "symmetric";
}

inline ActionMode parse_action_mode(std::string_view text) {
  if (text == "directed") return ActionMode::Directed;
  if (text == "symmetric") return ActionMode::Symmetric;
  throw Error(Errc::InvalidParams, "unknown mode '" + std::string(text) + "' (expected directed|symmetric)");
}

/// Partner addressed by slot `pos` of member i's action vector.
constexpr std::size_t partner_of(std::size_t i, std::size_t pos) noexcept { return pos < i ? pos : pos + 1; }
/// Slot of partner j in member i's action vector.
constexpr std::size_t slot_of(std::size_t i, std::size_t j) noexcept { return j < i ? j : j - 1; }

struct ActionVector {
  std::size_t owner = 0;
  /// Alphabet indices; slot k addresses partner_of(owner, k).
  std::vector<std::size_t> actions;

  bool operator==(const ActionVector&) const = default;
};

class PayoffModel {
 public:
  PayoffModel() = default;

  /// All payoffs start at 0 and all beliefs at 0.5.
  PayoffModel(std::size_t n, ActionAlphabet alphabet)
      : n_(n),
        alphabet_(std::move(alphabet)),
        coop_(n * n * alphabet_.size(), 0.0),
        noncoop_(n * n * alphabet_.size(), 0.0),
        belief_(n * n * alphabet_.size(), 0.5) {
    if (alphabet_.size() == 0) throw Error(Errc::InvalidModel, "payoff model needs a nonempty alphabet");
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return alphabet_.size(); }
  const ActionAlphabet& alphabet() const { return alphabet_; }

  double& payoff(std::size_t i, std::size_t j, CoopState c, std::size_t a) {
    return c == CoopState::Cooperating ? coop_[index(i, j, a)] : noncoop_[index(i, j, a)];
  }
  double payoff(std::size_t i, std::size_t j, CoopState c, std::size_t a) const {
    return c == CoopState::Cooperating ? coop_[index(i, j, a)] : noncoop_[index(i, j, a)];
  }

  /// P_ij(c1 | a); the complement is the non-cooperation belief.
  double& belief(std::size_t i, std::size_t j, std::size_t a) { return belief_[index(i, j, a)]; }
  double belief(std::size_t i, std::size_t j, std::size_t a) const { return belief_[index(i, j, a)]; }

  /// Expected payoff of one coordinate.
  double pair_value(std::size_t i, std::size_t j, std::size_t a) const {
    const double b = belief(i, j, a);
    return b * payoff(i, j, CoopState::Cooperating, a) + (1.0 - b) * payoff(i, j, CoopState::NotCooperating, a);
  }

  /// Scales every payoff by k.
  PayoffModel scaled(double k) const {
    PayoffModel out = *this;
    for (auto& u : out.coop_) u *= k;
    for (auto& u : out.noncoop_) u *= k;
    return out;
  }

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        for (std::size_t a = 0; a < m(); ++a) {
          const std::string where = "(" + std::to_string(i) + "," + std::to_string(j) + "," + alphabet_[a] + ")";
          const double b = belief(i, j, a);
          if (!(b >= 0.0 && b <= 1.0)) out.push_back("belief " + where + " = " + std::to_string(b) + " outside [0,1]");
          if (!std::isfinite(payoff(i, j, CoopState::Cooperating, a)) ||
              !std::isfinite(payoff(i, j, CoopState::NotCooperating, a))) {
            out.push_back("payoff " + where + " is not finite");
          }
        }
      }
    }
    return out;
  }

  bool operator==(const PayoffModel&) const = default;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t a) const {
    if (i >= n_ || j >= n_ || i == j) {
      throw Error(Errc::InvalidMember, "no coordinate (" + std::to_string(i) + "," + std::to_string(j) + ") in a team of " +
                                           std::to_string(n_));
    }
    if (a >= alphabet_.size()) throw Error(Errc::UnknownAction, "action index " + std::to_string(a) + " out of range");
    return (i * n_ + j) * alphabet_.size() + a;
  }

  std::size_t n_ = 0;
  ActionAlphabet alphabet_;
  std::vector<double> coop_;
  std::vector<double> noncoop_;
  std::vector<double> belief_;
};

using Genome = std::vector<std::size_t>;

struct JointProfile {
  ActionMode mode = ActionMode::Directed;
  std::vector<ActionVector> vectors;

  std::size_t n() const { return vectors.size(); }
  std::size_t action(std::size_t i, std::size_t j) const { return vectors.at(i).actions.at(slot_of(i, j)); }

  /// Violations of shape and of a_ij == a_ji in symmetric mode.
  std::vector<std::string> problems(std::size_t n, std::size_t m) const {
    std::vector<std::string> out;
    if (vectors.size() != n) {
      out.push_back("profile has " + std::to_string(vectors.size()) + " vectors, expected " + std::to_string(n));
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = vectors[i];
      if (v.owner != i) out.push_back("vector " + std::to_string(i) + " has owner " + std::to_string(v.owner));
      if (v.actions.size() + 1 != n) {
        out.push_back("vector " + std::to_string(i) + " has length " + std::to_string(v.actions.size()));
        continue;
      }
      for (auto a : v.actions) {
        if (a >= m) out.push_back("vector " + std::to_string(i) + " uses action index " + std::to_string(a));
      }
    }
    if (out.empty() && mode == ActionMode::Symmetric) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (action(i, j) != action(j, i)) {
            out.push_back("symmetric profile has a_" + std::to_string(i) + std::to_string(j) + " != a_" +
                          std::to_string(j) + std::to_string(i));
          }
        }
      }
    }
    return out;
  }

  bool operator==(const JointProfile&) const = default;
};

constexpr std::size_t genome_length(std::size_t n, ActionMode mode) noexcept {
  return mode == ActionMode::Directed ? n * (n == 0 ? 0 : n - 1) : n * (n == 0 ? 0 : n - 1) / 2;
}

inline Genome to_genome(const JointProfile& profile) {
  Genome g;
  const std::size_t n = profile.n();
  if (profile.mode == ActionMode::Directed) {
    for (const auto& v : profile.vectors) g.insert(g.end(), v.actions.begin(), v.actions.end());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) g.push_back(profile.action(i, j));
    }
  }
  return g;
}

inline JointProfile from_genome(std::size_t n, ActionMode mode, const Genome& genome) {
  if (genome.size() != genome_length(n, mode)) throw Error(Errc::InvalidParams, "genome length does not match team size");
  JointProfile p{mode, {}};
  p.vectors.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.vectors[i] = {i, std::vector<std::size_t>(n - 1, 0)};
  std::size_t k = 0;
  if (mode == ActionMode::Directed) {
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& a : p.vectors[i].actions) a = genome[k++];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        p.vectors[i].actions[slot_of(i, j)] = genome[k];
        p.vectors[j].actions[slot_of(j, i)] = genome[k];
        ++k;
      }
    }
  }
  return p;
}

inline double member_payoff(const PayoffModel& model, std::size_t i, const ActionVector& vector) {
  if (i >= model.n()) throw Error(Errc::InvalidMember, "member " + std::to_string(i) + " out of range");
  if (vector.actions.size() + 1 != model.n()) {
    throw Error(Errc::InvalidMember, "action vector for member " + std::to_string(i) + " has wrong length");
  }
  double coop_term = 0.0;
  double noncoop_term = 0.0;
  for (std::size_t pos = 0; pos < vector.actions.size(); ++pos) {
    const std::size_t j = partner_of(i, pos);
    const std::size_t a = vector.actions[pos];
    const double b = model.belief(i, j, a);
    coop_term += b * model.payoff(i, j, CoopState::Cooperating, a);
    noncoop_term += (1.0 - b) * model.payoff(i, j, CoopState::NotCooperating, a);
  }
  return coop_term + noncoop_term;
}

inline std::vector<double> member_payoffs(const PayoffModel& model, const JointProfile& profile) {
  std::vector<double> out;
  out.reserve(profile.n());
  for (std::size_t i = 0; i < profile.n(); ++i) out.push_back(member_payoff(model, i, profile.vectors[i]));
  return out;
}

/// Sum of member payoffs, in member order.
inline double sum_in_order(const std::vector<double>& member) {
  double total = 0.0;
  for (double c : member) total += c;
  return total;
}

inline double team_payoff(const PayoffModel& model, const JointProfile& profile) {
  if (profile.n() != model.n()) throw Error(Errc::InvalidMember, "profile size does not match the model");
  return sum_in_order(member_payoffs(model, profile));
}

enum class Method { Brute, Ga };

constexpr std::string_view to_string(Method m) noexcept { return m == Method::Brute ? "brute" : "ga"; }

struct OptimizationResult {
  JointProfile profile;
  std::vector<double> member_payoffs;
  double team_payoff = 0.0;
  Method method = Method::Brute;
  std::uint64_t evaluations = 0;
  std::uint64_t seed = 0;

  bool operator==(const OptimizationResult&) const = default;
};

inline constexpr std::uint64_t kDefaultBruteForceCap = 1'000'000;

namespace detail {

/// base^exp, or nullopt when it exceeds `cap`.
inline std::optional<std::uint64_t> bounded_power(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (std::uint64_t e = 0; e < exp; ++e) {
    if (base != 0 && r > cap / base) return std::nullopt;
    r *= base;
  }
  if (r > cap) return std::nullopt;
  return r;
}

/// Odometer over [0,m)^len with the last digit fastest: lexicographic order.
inline bool next_digits(std::vector<std::size_t>& digits, std::size_t m) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < m) return true;
    digits[k] = 0;
  }
  return false;
}

inline OptimizationResult finish(const PayoffModel& model, JointProfile profile, Method method,
                                 std::uint64_t evaluations, std::uint64_t seed) {
  OptimizationResult r;
  r.member_payoffs = member_payoffs(model, profile);
  r.team_payoff = sum_in_order(r.member_payoffs);
  r.profile = std::move(profile);
  r.method = method;
  r.evaluations = evaluations;
  r.seed = seed;
  return r;
}

inline void require_valid(const PayoffModel& model) {
  auto p = model.problems();
  if (!p.empty()) throw Error(Errc::InvalidModel, p.front());
}

/// Best own vector for member i under C_i alone, smallest on ties.
inline std::pair<ActionVector, double> best_member_vector(const PayoffModel& model, std::size_t i,
                                                          std::uint64_t& evaluations) {
  ActionVector v{i, std::vector<std::size_t>(model.n() - 1, 0)};
  ActionVector best = v;
  double best_value = member_payoff(model, i, v);
  ++evaluations;
  while (next_digits(v.actions, model.m())) {
    const double value = member_payoff(model, i, v);
    ++evaluations;
    if (value > best_value) {
      best_value = value;
      best = v;
    }
  }
  return {best, best_value};
}

}  // namespace detail

/// Size of the space brute force must enumerate: per member in directed mode
/// (members are independent there), jointly in symmetric mode.
inline std::optional<std::uint64_t> brute_force_space(std::size_t n, std::size_t m, ActionMode mode,
                                                      std::uint64_t cap = kDefaultBruteForceCap) {
  const std::uint64_t exp = mode == ActionMode::Directed ? (n == 0 ? 0 : n - 1) : genome_length(n, mode);
  return detail::bounded_power(m, exp, cap);
}

/// Exhaustive search for the team-optimal profile.
inline OptimizationResult brute_force_optimize(const PayoffModel& model, ActionMode mode,
                                               std::uint64_t cap = kDefaultBruteForceCap, std::uint64_t seed = 0) {
  detail::require_valid(model);
  const std::size_t n = model.n();
  if (!brute_force_space(n, model.m(), mode, cap)) {
    throw Error(Errc::TooLarge, "search space exceeds the cap of " + std::to_string(cap));
  }
  std::uint64_t evaluations = 0;
  if (mode == ActionMode::Directed) {
    // Member payoffs do not interact, so the joint optimum is the product of
    // per-member optima and the smallest genome concatenates the smallest vectors.
    JointProfile profile{mode, {}};
    for (std::size_t i = 0; i < n; ++i) profile.vectors.push_back(detail::best_member_vector(model, i, evaluations).first);
    return detail::finish(model, std::move(profile), Method::Brute, evaluations, seed);
  }
  Genome g(genome_length(n, mode), 0);
  Genome best = g;
  double best_value = team_payoff(model, from_genome(n, mode, g));
  evaluations += n;
  while (detail::next_digits(g, model.m())) {
    const double value = team_payoff(model, from_genome(n, mode, g));
    evaluations += n;
    if (value > best_value) {
      best_value = value;
      best = g;
    }
  }
  return detail::finish(model, from_genome(n, mode, best), Method::Brute, evaluations, seed);
}

struct GaParams {
  std::size_t population = 32;
  std::size_t generations = 200;
  std::size_t tournament = 2;
  double crossover_rate = 0.9;
  /// Per-bit flip probability; defaults to 1 / genome bit length.
  std::optional<double> mutation_rate;
  std::size_t elitism = 1;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (population < 2) out.push_back("population must be at least 2");
    if (tournament < 1 || tournament > population) out.push_back("tournament size must be in [1, population]");
    if (elitism > population) out.push_back("elitism cannot exceed population");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) out.push_back("crossover rate outside [0,1]");
    if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0)) out.push_back("mutation rate outside [0,1]");
    return out;
  }

  bool operator==(const GaParams&) const = default;
};

/// Bits needed to address m actions.
constexpr std::size_t bits_per_action(std::size_t m) noexcept {
  return m <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(m - 1));
}

/// Decodes a bit string (most significant bit first per coordinate); values
/// past m-1 wrap modulo m so every bit string is a feasible genome.
inline Genome decode_bits(const std::vector<std::uint8_t>& bits, std::size_t coords, std::size_t m) {
  const std::size_t width = bits_per_action(m);
  Genome g(coords, 0);
  for (std::size_t c = 0; c < coords; ++c) {
    std::size_t v = 0;
    for (std::size_t b = 0; b < width; ++b) v = (v << 1) | bits[c * width + b];
    g[c] = v % m;
  }
  return g;
}

/// Generational GA over binary-coded genomes. Tournament selection, one-point
/// crossover, per-bit mutation, elitism; fitness is team payoff. Returns the
/// best genome ever evaluated. A pure function of its arguments.
inline OptimizationResult ga_optimize(const PayoffModel& model, ActionMode mode, const GaParams& params,
                                      std::uint64_t seed) {
  if (auto p = params.problems(); !p.empty()) throw Error(Errc::InvalidParams, p.front());
  detail::require_valid(model);

  const std::size_t n = model.n();
  const std::size_t m = model.m();
  const std::size_t coords = genome_length(n, mode);
  const std::size_t length = coords * bits_per_action(m);
  if (length == 0) return detail::finish(model, from_genome(n, mode, Genome(coords, 0)), Method::Ga, n, seed);

  const double mutation = params.mutation_rate.value_or(1.0 / static_cast<double>(length));
  using Bits = std::vector<std::uint8_t>;
  rng::Engine engine(seed);
  std::uint64_t evaluations = 0;

  struct Scored {
    Bits bits;
    Genome genome;
    double fitness;
  };
  auto score = [&](Bits bits) {
    Genome g = decode_bits(bits, coords, m);
    const double f = team_payoff(model, from_genome(n, mode, g));
    evaluations += n;
    return Scored{std::move(bits), std::move(g), f};
  };
  auto better = [](const Scored& a, const Scored& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.genome < b.genome;
  };

  std::vector<Scored> population;
  population.reserve(params.population);
  for (std::size_t k = 0; k < params.population; ++k) {
    Bits bits(length);
    for (auto& b : bits) b = static_cast<std::uint8_t>(engine.bits() >> 63);
    population.push_back(score(std::move(bits)));
  }
  Scored best = *std::ranges::min_element(population, better);

  auto tournament = [&]() -> const Scored& {
    const Scored* winner = &population[engine.below(population.size())];
    for (std::size_t t = 1; t < params.tournament; ++t) {
      const Scored& rival = population[engine.below(population.size())];
      if (better(rival, *winner)) winner = &rival;
    }
    return *winner;
  };

  for (std::size_t gen = 0; gen < params.generations; ++gen) {
    std::vector<std::size_t> order(population.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return better(population[a], population[b]); });

    std::vector<Scored> next;
    next.reserve(params.population);
    for (std::size_t e = 0; e < params.elitism; ++e) next.push_back(population[order[e]]);

    std::vector<Bits> offspring;
    while (next.size() + offspring.size() < params.population) {
      Bits a = tournament().bits;
      Bits b = tournament().bits;
      if (length > 1 && engine.bernoulli(params.crossover_rate)) {
        const std::size_t cut = 1 + engine.below(length - 1);
        std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(cut), a.end(),
                         b.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto* child : {&a, &b}) {
        for (auto& bit : *child) {
          if (engine.bernoulli(mutation)) bit ^= 1U;
        }
      }
      offspring.push_back(std::move(a));
      if (next.size() + offspring.size() < params.population) offspring.push_back(std::move(b));
    }
    // Fitness of the offspring is independent of evaluation order.
    for (auto& bits : offspring) next.push_back(score(std::move(bits)));
    population = std::move(next);
    for (const auto& s : population) {
      if (better(s, best)) best = s;
    }
  }
  return detail::finish(model, from_genome(n, mode, best.genome), Method::Ga, evaluations, seed);
}

struct MemberDemand {
  std::size_t member = 0;
  double payoff = 0.0;
  double best_payoff = 0.0;
  bool optimal = false;
};

/// A coordinate where the member would rather pick another action.
struct DemandConflict {
  std::size_t member = 0;
  std::size_t partner = 0;
  std::size_t preferred = 0;
  std::size_t chosen = 0;
};

struct DemandReport {
  ActionMode mode = ActionMode::Directed;
  std::vector<MemberDemand> members;
  double team_payoff = 0.0;
  double best_team_payoff = 0.0;
  bool team_optimal = false;
  std::vector<DemandConflict> conflicts;

  bool all_members_optimal() const {
    return std::ranges::all_of(members, [](const MemberDemand& d) { return d.optimal; });
  }
  bool satisfied() const { return team_optimal && all_members_optimal(); }
};

namespace detail {

inline bool at_least(double value, double best) {
  return value >= best - 1e-9 * std::max(1.0, std::abs(best));
}

}  // namespace detail

/// Checks the member-level and team-level optimality demands for a profile.
/// In symmetric mode the two can disagree; disagreements are listed.
inline DemandReport check_demands(const PayoffModel& model, const JointProfile& profile,
                                  std::uint64_t cap = kDefaultBruteForceCap) {
  if (auto p = profile.problems(model.n(), model.m()); !p.empty()) throw Error(Errc::InvalidMember, p.front());
  if (!brute_force_space(model.n(), model.m(), ActionMode::Directed, cap) ||
      !brute_force_space(model.n(), model.m(), profile.mode, cap)) {
    throw Error(Errc::TooLarge, "search space exceeds the cap of " + std::to_string(cap));
  }
  DemandReport report;
  report.mode = profile.mode;
  std::uint64_t evaluations = 0;
  for (std::size_t i = 0; i < model.n(); ++i) {
    MemberDemand d;
    d.member = i;
    d.payoff = member_payoff(model, i, profile.vectors[i]);
    d.best_payoff = detail::best_member_vector(model, i, evaluations).second;
    d.optimal = detail::at_least(d.payoff, d.best_payoff);
    report.members.push_back(d);

    for (std::size_t pos = 0; pos + 1 < model.n(); ++pos) {
      const std::size_t j = partner_of(i, pos);
      std::size_t preferred = 0;
      for (std::size_t a = 1; a < model.m(); ++a) {
        if (model.pair_value(i, j, a) > model.pair_value(i, j, preferred)) preferred = a;
      }
      const std::size_t chosen = profile.vectors[i].actions[pos];
      if (!detail::at_least(model.pair_value(i, j, chosen), model.pair_value(i, j, preferred))) {
        report.conflicts.push_back({i, j, preferred, chosen});
      }
    }
  }
  report.team_payoff = team_payoff(model, profile);
  report.best_team_payoff = brute_force_optimize(model, profile.mode, cap).team_payoff;
  report.team_optimal = detail::at_least(report.team_payoff, report.best_team_payoff);
  return report;
}

}  // namespace teamcoop
