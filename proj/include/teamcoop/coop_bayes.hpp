#pragma once
//
// Two-state cooperation chain for a pair of robots.
//
// A PairModel holds the prior probability that the pair cooperates and, for
// each observable action, its likelihood under "cooperating" (c1) and "not
// cooperating" (c0). Bayes' rule turns an observed action into posteriors;
// the expected posterior under each hypothesis gives the chain's
// persistence probabilities p11 and p01.
//

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamcoop/error.hpp"

namespace teamcoop {

inline constexpr double kProbabilityTolerance = 1e-12;

enum class CoopState : std::uint8_t { NotCooperating = 0, Cooperating = 1 };

constexpr int to_int(CoopState s) noexcept { return static_cast<int>(s); }
constexpr CoopState coop_state(bool cooperating) noexcept {
  return cooperating ? CoopState::Cooperating : CoopState::NotCooperating;
}

/// Ordered set of distinct action symbols.
class ActionAlphabet {
 public:
  ActionAlphabet() = default;

  explicit ActionAlphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw Error(Errc::InvalidModel, "action alphabet must have at least one symbol");
    for (std::size_t a = 0; a < symbols_.size(); ++a) {
      if (symbols_[a].empty()) throw Error(Errc::InvalidModel, "action symbols must be nonempty");
      for (std::size_t b = 0; b < a; ++b) {
        if (symbols_[a] == symbols_[b]) throw Error(Errc::InvalidModel, "duplicate action symbol '" + symbols_[a] + "'");
      }
    }
  }

  std::size_t size() const { return symbols_.size(); }
  const std::string& operator[](std::size_t a) const { return symbols_[a]; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::size_t index_of(std::string_view symbol) const {
    auto it = std::ranges::find(symbols_, symbol);
    if (it == symbols_.end()) throw Error(Errc::UnknownAction, "action '" + std::string(symbol) + "' not in alphabet");
    return static_cast<std::size_t>(it - symbols_.begin());
  }

  bool operator==(const ActionAlphabet&) const = default;

 private:
  std::vector<std::string> symbols_;
};

/// Prior and per-action likelihood tables for one pair. Likelihood vectors
/// are aligned with the alphabet.
struct PairModel {
  ActionAlphabet alphabet;
  double prior_coop = 0.5;
  std::vector<double> likelihood_coop;
  std::vector<double> likelihood_noncoop;

  double prior_noncoop() const { return 1.0 - prior_coop; }

  /// Human-readable list of broken invariants; empty when valid.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!(prior_coop >= 0.0 && prior_coop <= 1.0)) out.push_back("prior " + std::to_string(prior_coop) + " outside [0,1]");
    auto table = [&](const std::vector<double>& t, const char* name) {
      if (t.size() != alphabet.size()) {
        out.push_back(std::string(name) + " has " + std::to_string(t.size()) + " entries, alphabet has " +
                      std::to_string(alphabet.size()));
        return;
      }
      double sum = 0.0;
      for (double p : t) {
        if (!(p >= 0.0)) out.push_back(std::string(name) + " has a negative or NaN entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", sum);
        out.push_back(std::string(name) + " sums to " + buf + ", expected 1");
      }
    };
    table(likelihood_coop, "likelihood_coop");
    table(likelihood_noncoop, "likelihood_noncoop");
    return out;
  }

  void check() const {
    auto p = problems();
    if (!p.empty()) throw Error(Errc::InvalidModel, p.front());
  }

  bool operator==(const PairModel&) const = default;
};

/// Row-stochastic 2x2 matrix over {cooperating, not cooperating}.
struct TransitionMatrix {
  double p11 = 1.0;
  double p10 = 0.0;
  double p01 = 0.0;
  double p00 = 1.0;

  /// Builds a matrix from the probabilities of landing in state 1.
  static TransitionMatrix from_coop_rows(double stay_coop, double become_coop) {
    return {stay_coop, 1.0 - stay_coop, become_coop, 1.0 - become_coop};
  }

  static TransitionMatrix identity() { return {}; }

  bool valid(double tol = kProbabilityTolerance) const {
    auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    return unit(p11) && unit(p10) && unit(p01) && unit(p00) && std::abs(p11 + p10 - 1.0) <= tol &&
           std::abs(p01 + p00 - 1.0) <= tol;
  }

  bool operator==(const TransitionMatrix&) const = default;
};

struct StationaryDistribution {
  double coop = 0.0;
  double noncoop = 0.0;
};

namespace detail {

inline void check_action(const PairModel& model, std::size_t a) {
  if (a >= model.alphabet.size()) throw Error(Errc::UnknownAction, "action index " + std::to_string(a) + " out of range");
}

inline double evidence_unchecked(const PairModel& m, std::size_t a) {
  return m.likelihood_coop[a] * m.prior_coop + m.likelihood_noncoop[a] * m.prior_noncoop();
}

inline double clamp_unit(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace detail

/// Total probability of observing action `a`.
inline double evidence(const PairModel& model, std::size_t a) {
  detail::check_action(model, a);
  return detail::evidence_unchecked(model, a);
}

inline double evidence(const PairModel& model, std::string_view action) {
  return evidence(model, model.alphabet.index_of(action));
}

inline double posterior_coop(const PairModel& model, std::size_t a) {
  const double ev = evidence(model, a);
  if (!(ev > 0.0)) throw Error(Errc::UndefinedPosterior, "action '" + model.alphabet[a] + "' has zero evidence");
  return detail::clamp_unit(model.likelihood_coop[a] * model.prior_coop / ev);
}

inline double posterior_coop(const PairModel& model, std::string_view action) {
  return posterior_coop(model, model.alphabet.index_of(action));
}

inline double posterior_noncoop(const PairModel& model, std::size_t a) {
  const double ev = evidence(model, a);
  if (!(ev > 0.0)) throw Error(Errc::UndefinedPosterior, "action '" + model.alphabet[a] + "' has zero evidence");
  return detail::clamp_unit(model.likelihood_noncoop[a] * model.prior_noncoop() / ev);
}

inline double posterior_noncoop(const PairModel& model, std::string_view action) {
  return posterior_noncoop(model, model.alphabet.index_of(action));
}

/// p11 is the posterior of cooperation averaged over the action distribution
/// of a cooperating pair; p01 the posterior of non-cooperation averaged over
/// that of a non-cooperating pair. Zero-evidence actions are skipped.
inline TransitionMatrix pair_transition(const PairModel& model) {
  model.check();
  double stay = 0.0;
  double become = 0.0;
  bool any = false;
  for (std::size_t a = 0; a < model.alphabet.size(); ++a) {
    const double ev = detail::evidence_unchecked(model, a);
    if (!(ev > 0.0)) continue;
    any = true;
    stay += model.likelihood_coop[a] * (model.likelihood_coop[a] * model.prior_coop / ev);
    become += model.likelihood_noncoop[a] * (model.likelihood_noncoop[a] * model.prior_noncoop() / ev);
  }
  if (!any) throw Error(Errc::DegenerateModel, "every action has zero evidence");
  return TransitionMatrix::from_coop_rows(detail::clamp_unit(stay), detail::clamp_unit(become));
}

/// Element-wise mean over the pair matrices.
inline TransitionMatrix aggregate_transition(std::span<const TransitionMatrix> matrices) {
  if (matrices.empty()) throw Error(Errc::EmptyAggregate, "no matrices to aggregate");
  double stay = 0.0;
  double become = 0.0;
  for (const auto& m : matrices) {
    stay += m.p11;
    become += m.p01;
  }
  const auto n = static_cast<double>(matrices.size());
  return TransitionMatrix::from_coop_rows(detail::clamp_unit(stay / n), detail::clamp_unit(become / n));
}

/// One chain step. `draw` is uniform on [0,1); the next state is cooperative
/// iff draw < (p11 or p01, depending on the current state).
constexpr CoopState step_pair(CoopState state, const TransitionMatrix& m, double draw) noexcept {
  const double p = state == CoopState::Cooperating ? m.p11 : m.p01;
  return coop_state(draw < p);
}

inline TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
  const double stay = a.p11 * b.p11 + a.p10 * b.p01;
  const double become = a.p01 * b.p11 + a.p00 * b.p01;
  return TransitionMatrix::from_coop_rows(detail::clamp_unit(stay), detail::clamp_unit(become));
}

/// k-step transition matrix, k >= 1.
inline TransitionMatrix n_step(const TransitionMatrix& m, std::uint64_t k) {
  if (k == 0) throw Error(Errc::InvalidParams, "step count must be at least 1");
  TransitionMatrix result = m;
  for (std::uint64_t i = 1; i < k; ++i) result = multiply(result, m);
  return result;
}

inline StationaryDistribution stationary(const TransitionMatrix& m) {
  const double flow = m.p01 + m.p10;
  if (!(flow > 0.0)) throw Error(Errc::NonErgodic, "both states are absorbing");
  const double coop = m.p01 / flow;
  return {coop, 1.0 - coop};
}

}  // namespace teamcoop
