#pragma once

// Observation processes and black-box decision devices. A device runs a
// Wald test on the log-likelihood ratio computed from its own, possibly
// wrong, belief about the observation statistics.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seqaudit/core.hpp"
#include "seqaudit/llr_params.hpp"
#include "seqaudit/rng.hpp"

namespace seqaudit {

/// X_n ~ N(mu_h, sigma_h^2) i.i.d. given H = h.
struct GaussianIIDModel {
  double mu1;
  double mu2;
  double sigma1;
  double sigma2;

  void validate() const {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
      throw std::invalid_argument("Gaussian model sigmas must be > 0");
  }
  double mu(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? mu1 : mu2; }
  double sigma(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? sigma1 : sigma2; }
};

/// X_n | X_{n-1} ~ N(v_h + (w_h + 1) X_{n-1}, sigma_h^2), X_0 = 0.
struct MarkovGaussianModel {
  double v1;
  double v2;
  double w1;
  double w2;
  double sigma1;
  double sigma2;

  void validate() const {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
      throw std::invalid_argument("Markov model sigmas must be > 0");
  }
  double v(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? v1 : v2; }
  double w(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? w1 : w2; }
  double sigma(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? sigma1 : sigma2; }
  double conditional_mean(Hypothesis h, double x_prev) const noexcept {
    return v(h) + (w(h) + 1.0) * x_prev;
  }
};

/// Result of one device run. A truncated run hit the observation window
/// without a decision; it carries no decision and is excluded from every
/// statistic.
struct WaldOutcome {
  Hypothesis hypothesis = Hypothesis::H1;
  std::optional<Decision> decision;
  double time = 0.0;
  double terminal_llr = 0.0;
  std::size_t steps = 0;

  bool truncated() const noexcept { return !decision.has_value(); }

  TrialRecord record() const {
    if (truncated()) throw std::logic_error("truncated outcome has no decision");
    return {hypothesis, *decision, time, terminal_llr};
  }
};

// --- log-likelihood increments -------------------------------------------

inline double llr_increment_iid(double x, const GaussianIIDModel& wm) noexcept {
  const double d1 = x - wm.mu1;
  const double d2 = x - wm.mu2;
  return std::log(wm.sigma2 / wm.sigma1) + d2 * d2 / (2.0 * wm.sigma2 * wm.sigma2) -
         d1 * d1 / (2.0 * wm.sigma1 * wm.sigma1);
}

inline double llr_increment_markov(double x_prev, double x_cur,
                                   const MarkovGaussianModel& wm) noexcept {
  const double r1 = x_cur - x_prev - wm.v1 - wm.w1 * x_prev;
  const double r2 = x_cur - x_prev - wm.v2 - wm.w2 * x_prev;
  return std::log(wm.sigma2 / wm.sigma1) + r2 * r2 / (2.0 * wm.sigma2 * wm.sigma2) -
         r1 * r1 / (2.0 * wm.sigma1 * wm.sigma1);
}

// --- observation sampling --------------------------------------------------

inline double sample_observation(const GaussianIIDModel& m, Hypothesis h, Rng& rng) noexcept {
  return m.mu(h) + m.sigma(h) * rng.normal();
}

inline double sample_observation(const MarkovGaussianModel& m, Hypothesis h, double x_prev,
                                 Rng& rng) noexcept {
  return m.conditional_mean(h, x_prev) + m.sigma(h) * rng.normal();
}

inline std::vector<double> observation_path(const GaussianIIDModel& m, Hypothesis h,
                                            std::size_t k, Rng& rng) {
  std::vector<double> xs(k);
  for (auto& x : xs) x = sample_observation(m, h, rng);
  return xs;
}

inline std::vector<double> observation_path(const MarkovGaussianModel& m, Hypothesis h,
                                            std::size_t k, Rng& rng) {
  std::vector<double> xs(k);
  double prev = 0.0;
  for (auto& x : xs) {
    x = sample_observation(m, h, prev, rng);
    prev = x;
  }
  return xs;
}

/// Partial sums S~_1..S~_k of the device statistic along a fixed path.
inline std::vector<double> llr_partial_sums(const GaussianIIDModel& wm,
                                            std::span<const double> xs) {
  std::vector<double> s(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s[i] = acc += llr_increment_iid(xs[i], wm);
  return s;
}

inline std::vector<double> llr_partial_sums(const MarkovGaussianModel& wm,
                                            std::span<const double> xs) {
  std::vector<double> s(xs.size());
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s[i] = acc += llr_increment_markov(prev, xs[i], wm);
    prev = xs[i];
  }
  return s;
}

// --- Wald tests --------------------------------------------------------------

/// Discrete Wald test driven by an increment generator. Stops at the first
/// k with S_k outside (l2, l1); decisions at k == max_steps still count.
template <class NextIncrement>
WaldOutcome run_sprt(NextIncrement&& next, const Thresholds& th, Hypothesis h,
                     std::size_t max_steps) {
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
  WaldOutcome out;
  out.hypothesis = h;
  double s = 0.0;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    s += next();
    if (s >= th.l1 || s <= th.l2) {
      out.decision = s >= th.l1 ? Decision::D1 : Decision::D2;
      out.steps = k;
      out.time = static_cast<double>(k);
      out.terminal_llr = s;
      return out;
    }
  }
  out.steps = max_steps;
  out.time = static_cast<double>(max_steps);
  out.terminal_llr = s;
  return out;
}

inline WaldOutcome run_wald_discrete(const GaussianIIDModel& model, const GaussianIIDModel& wm,
                                     const Thresholds& th, Hypothesis h, std::size_t max_steps,
                                     Rng& rng) {
  return run_sprt([&] { return llr_increment_iid(sample_observation(model, h, rng), wm); }, th,
                  h, max_steps);
}

inline WaldOutcome run_wald_discrete(const MarkovGaussianModel& model,
                                     const MarkovGaussianModel& wm, const Thresholds& th,
                                     Hypothesis h, std::size_t max_steps, Rng& rng) {
  double prev = 0.0;
  return run_sprt(
      [&] {
        const double x = sample_observation(model, h, prev, rng);
        const double inc = llr_increment_markov(prev, x, wm);
        prev = x;
        return inc;
      },
      th, h, max_steps);
}

/// Continuous Wald test. The device statistic is integrated directly as the
/// drift-diffusion dS = a_h dt + sqrt(2b) dW with fixed-step Euler-Maruyama;
/// the reported time is the first grid time past a threshold and the
/// terminal value is clamped to the crossed threshold.
inline WaldOutcome run_wald_continuous(const DriftDiffusionModel& model,
                                       const DriftDiffusionModel& wm, const Thresholds& th,
                                       Hypothesis h, double dt, double t_max, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_max > dt)) throw std::invalid_argument("t_max must exceed dt");
  const ContinuousLLRParams p = continuous_llr_params(model, wm);
  const double drift = p.a(h) * dt;
  const double noise = std::sqrt(2.0 * p.b * dt);
  const auto n_max = static_cast<std::size_t>(std::ceil(t_max / dt));
  WaldOutcome out;
  out.hypothesis = h;
  double s = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    s += drift + noise * rng.normal();
    if (s >= th.l1 || s <= th.l2) {
      const bool up = s >= th.l1;
      out.decision = up ? Decision::D1 : Decision::D2;
      out.terminal_llr = up ? th.l1 : th.l2;
      out.steps = n;
      out.time = static_cast<double>(n) * dt;
      return out;
    }
  }
  out.steps = n_max;
  out.time = static_cast<double>(n_max) * dt;
  out.terminal_llr = s;
  return out;
}

}  // namespace seqaudit
