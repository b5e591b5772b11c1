#pragma once

// Exact ground truth on a lattice log-likelihood walk. Observations are a
// two-point alphabet whose LLR increments are +-step, and the thresholds are
// integer multiples of step, so the walk hits a boundary without overshoot
// and the decision-time fluctuation relations hold exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "seqaudit/core.hpp"
#include "seqaudit/models.hpp"
#include "seqaudit/rng.hpp"

namespace seqaudit {

/// Up-probability p under H1 and 1 - p under H2; l1 = m1 * step and
/// l2 = -m2 * step with step = ln(p / (1 - p)).
struct LatticeBernoulliModel {
  double p;
  int m1;
  int m2;

  void validate() const {
    if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument("lattice p must lie in (0.5, 1)");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("lattice m1, m2 must be >= 1");
  }
  double step() const { return std::log(p / (1.0 - p)); }
  Thresholds thresholds() const { return Thresholds::make(m1 * step(), -m2 * step()); }
  double up_probability(Hypothesis h) const noexcept {
    return h == Hypothesis::H1 ? p : 1.0 - p;
  }
};

/// Matched Wald test on the lattice walk. The level is tracked as an integer
/// so boundary hits are exact; terminal_llr = level * step.
inline WaldOutcome run_wald_lattice(const LatticeBernoulliModel& model, Hypothesis h,
                                    std::size_t max_steps, Rng& rng) {
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
  const double up = model.up_probability(h);
  WaldOutcome out;
  out.hypothesis = h;
  int level = 0;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    level += rng.uniform() < up ? 1 : -1;
    if (level >= model.m1 || level <= -model.m2) {
      out.decision = level >= model.m1 ? Decision::D1 : Decision::D2;
      out.steps = k;
      out.time = static_cast<double>(k);
      out.terminal_llr = level * model.step();
      return out;
    }
  }
  out.steps = max_steps;
  out.time = static_cast<double>(max_steps);
  out.terminal_llr = level * model.step();
  return out;
}

/// P(T = k, D = d | H = h) for k = 1..k_max, plus the mass still undecided
/// after k_max steps.
struct ExactLaw {
  LatticeBernoulliModel model;
  std::size_t k_max = 0;
  // joint[h][d][k-1]
  std::array<std::array<std::vector<long double>, 2>, 2> joint;
  std::array<long double, 2> surviving{};

  long double probability(Hypothesis h, Decision d, std::size_t k) const {
    if (k == 0 || k > k_max) return 0.0L;
    return joint[index_of(h)][index_of(d)][k - 1];
  }

  long double decision_probability(Hypothesis h, Decision d) const {
    const auto& v = joint[index_of(h)][index_of(d)];
    long double s = 0.0L;
    for (auto x : v) s += x;
    return s;
  }

  /// P(T = k | H = h, D = d) over k = 1..k_max.
  std::vector<double> conditional_pmf(Hypothesis h, Decision d) const {
    const long double z = decision_probability(h, d);
    const auto& v = joint[index_of(h)][index_of(d)];
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = z > 0 ? static_cast<double>(v[i] / z) : 0.0;
    return out;
  }
};

inline ExactLaw enumerate_exact_law(const LatticeBernoulliModel& model, std::size_t k_max) {
  model.validate();
  if (k_max < static_cast<std::size_t>(model.m1))
    throw std::invalid_argument("k_max must be >= m1");
  ExactLaw law;
  law.model = model;
  law.k_max = k_max;
  // Interior levels -m2+1 .. m1-1 map to indices 0 .. m1+m2-2.
  const int n_states = model.m1 + model.m2 - 1;
  const int origin = model.m2 - 1;
  for (Hypothesis h : kHypotheses) {
    const long double up = model.up_probability(h);
    const long double down = 1.0L - up;
    std::vector<long double> dist(n_states, 0.0L), next(n_states);
    dist[origin] = 1.0L;
    auto& hit_up = law.joint[index_of(h)][index_of(Decision::D1)];
    auto& hit_down = law.joint[index_of(h)][index_of(Decision::D2)];
    hit_up.assign(k_max, 0.0L);
    hit_down.assign(k_max, 0.0L);
    for (std::size_t k = 0; k < k_max; ++k) {
      std::fill(next.begin(), next.end(), 0.0L);
      for (int i = 0; i < n_states; ++i) {
        const long double m = dist[i];
        if (m == 0.0L) continue;
        if (i + 1 < n_states) next[i + 1] += m * up;
        else hit_up[k] += m * up;
        if (i - 1 >= 0) next[i - 1] += m * down;
        else hit_down[k] += m * down;
      }
      dist.swap(next);
    }
    long double rest = 0.0L;
    for (auto m : dist) rest += m;
    law.surviving[index_of(h)] = rest;
  }
  return law;
}

/// Smallest horizon leaving less than `tail` undecided mass under both
/// hypotheses.
inline ExactLaw enumerate_exact_law_until(const LatticeBernoulliModel& model,
                                          long double tail = 1e-12L) {
  std::size_t k = std::max<std::size_t>(static_cast<std::size_t>(model.m1), 16);
  for (;;) {
    ExactLaw law = enumerate_exact_law(model, k);
    if (law.surviving[0] < tail && law.surviving[1] < tail) return law;
    k *= 2;
    if (k > (1u << 24)) throw std::runtime_error("lattice walk does not terminate");
  }
}

struct FluctuationCheck {
  bool holds;
  double max_deviation;        // sup_k,d |P(T=k|H1,d) - P(T=k|H2,d)|
  double ratio_deviation;      // |P(D1|H1)/P(D1|H2) - e^{l1}| / e^{l1}
};

/// Checks P(T=k | H=1, D=d) = P(T=k | H=2, D=d) for both decisions and
/// every covered k, and P(D=1|H=1) / P(D=1|H=2) = e^{l1}.
inline FluctuationCheck verify_fluctuation_relation(const ExactLaw& law, double tol) {
  if (law.surviving[0] > tol || law.surviving[1] > tol)
    throw PreconditionError("exact law does not cover enough steps: surviving mass exceeds tol");
  double dev = 0.0;
  for (Decision d : kDecisions) {
    const auto c1 = law.conditional_pmf(Hypothesis::H1, d);
    const auto c2 = law.conditional_pmf(Hypothesis::H2, d);
    for (std::size_t i = 0; i < c1.size(); ++i) dev = std::max(dev, std::abs(c1[i] - c2[i]));
  }
  const long double ratio = law.decision_probability(Hypothesis::H1, Decision::D1) /
                            law.decision_probability(Hypothesis::H2, Decision::D1);
  const long double expected = std::exp(static_cast<long double>(law.model.m1) *
                                        std::log(static_cast<long double>(law.model.p) /
                                                 (1.0L - law.model.p)));
  const double ratio_dev = static_cast<double>(std::abs(ratio - expected) / expected);
  return {dev <= tol && ratio_dev <= tol, dev, ratio_dev};
}

/// Decision symmetry P(T=k | D=1) = P(T=k | D=2) under equal priors; exact
/// for m1 == m2 where the H2 walk is the mirrored H1 walk.
inline FluctuationCheck verify_decision_symmetry(const ExactLaw& law, double tol) {
  double dev = 0.0;
  std::array<std::vector<long double>, 2> marg;
  for (Decision d : kDecisions) {
    auto& m = marg[index_of(d)];
    m.assign(law.k_max, 0.0L);
    long double z = 0.0L;
    for (Hypothesis h : kHypotheses) {
      for (std::size_t k = 1; k <= law.k_max; ++k) {
        m[k - 1] += 0.5L * law.probability(h, d, k);
        z += 0.5L * law.probability(h, d, k);
      }
    }
    for (auto& x : m) x /= z;
  }
  for (std::size_t i = 0; i < law.k_max; ++i)
    dev = std::max(dev, static_cast<double>(std::abs(marg[0][i] - marg[1][i])));
  return {dev <= tol, dev, 0.0};
}

/// Rows (k, d, h, probability) for every covered k with nonzero mass.
inline void write_exact_law_csv(std::ostream& os, const ExactLaw& law) {
  os << "k,d,h,probability\n";
  os.precision(17);
  for (std::size_t k = 1; k <= law.k_max; ++k)
    for (Decision d : kDecisions)
      for (Hypothesis h : kHypotheses) {
        const long double p = law.probability(h, d, k);
        if (p == 0.0L) continue;
        os << k << ',' << to_int(d) << ',' << to_int(h) << ',' << static_cast<double>(p) << '\n';
      }
}

}  // namespace seqaudit
