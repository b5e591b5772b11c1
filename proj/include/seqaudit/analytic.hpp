#pragma once

// Closed-form quantities for the continuous-time device whose statistic is
// the drift-diffusion dS = a_h dt + sqrt(2b) dW: error probabilities,
// asymptotic (l2 -> -inf) decision-time densities and means, the mutual
// information I(H; T | D) and its finite-resolution version, and exact
// samplers for (H, D, T).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/inverse_gaussian.hpp>

#include "seqaudit/core.hpp"
#include "seqaudit/llr_params.hpp"
#include "seqaudit/quadrature.hpp"
#include "seqaudit/rng.hpp"

namespace seqaudit {

struct ErrorProbs {
  double alpha1;  // P(D=1 | H=2)
  double alpha2;  // P(D=2 | H=1)
};

namespace detail {

// P(hit l1 before l2) for dS = a dt + sqrt(2b) dW started at 0:
// (1 - e^{a l2 / b}) / (1 - e^{a (l2 - l1) / b}). l2 may be -inf.
inline double upper_hit_probability(double a, double b, double l1, double l2) {
  if (a == 0.0) return std::isinf(l2) ? 1.0 : l2 / (l2 - l1);
  const double d = a * l1 / b;
  if (std::isinf(l2)) return a < 0.0 ? std::exp(d) : 1.0;
  const double x = a * l2 / b;
  const double y = a * (l2 - l1) / b;
  if (a < 0.0) return std::exp(d) * (-std::expm1(-x)) / (-std::expm1(-y));
  return std::expm1(x) / std::expm1(y);
}

// 1 - upper_hit_probability, evaluated without cancellation.
inline double lower_hit_probability(double a, double b, double l1, double l2) {
  if (a == 0.0) return std::isinf(l2) ? 0.0 : l1 / (l1 - l2);
  const double d = a * l1 / b;
  if (std::isinf(l2)) return a < 0.0 ? -std::expm1(d) : 0.0;
  const double y = a * (l2 - l1) / b;
  if (a > 0.0) return std::exp(y) * std::expm1(d) / (-std::expm1(y));
  return (-std::expm1(d)) / (-std::expm1(-y));
}

inline double log_add_exp(double x, double y) {
  if (x < y) std::swap(x, y);
  if (y == -std::numeric_limits<double>::infinity()) return x;
  return x + std::log1p(std::exp(y - x));
}

}  // namespace detail

/// Error probabilities without the [0, 1/2] range check.
inline ErrorProbs error_probs_continuous_unchecked(const ContinuousLLRParams& p,
                                                   const Thresholds& th) {
  p.validate();
  return {detail::upper_hit_probability(p.a2, p.b, th.l1, th.l2),
          detail::lower_hit_probability(p.a1, p.b, th.l1, th.l2)};
}

inline ErrorProbs error_probs_continuous(const ContinuousLLRParams& p, const Thresholds& th) {
  const ErrorProbs e = error_probs_continuous_unchecked(p, th);
  if (!(e.alpha1 >= 0.0 && e.alpha1 <= 0.5 && e.alpha2 >= 0.0 && e.alpha2 <= 0.5)) {
    std::ostringstream msg;
    msg << "error probabilities (" << e.alpha1 << ", " << e.alpha2
        << ") fall outside [0, 1/2]; choose a1 > 0 > a2 and wider thresholds";
    throw RegimeError(msg.str());
  }
  return e;
}

// --- asymptotic regime -------------------------------------------------------

/// Ratios |l2| |a_h| / b; the asymptotic densities need both to be large.
struct RegimeRatios {
  double h1;
  double h2;
};

inline RegimeRatios regime_ratios(const ContinuousLLRParams& p, const Thresholds& th) {
  return {std::abs(th.l2) * std::abs(p.a1) / p.b, std::abs(th.l2) * std::abs(p.a2) / p.b};
}

struct RegimeOptions {
  double min_ratio = 10.0;
};

inline void check_regime(const ContinuousLLRParams& p, const Thresholds& th,
                         const RegimeOptions& opt = {}) {
  p.validate();
  const RegimeRatios r = regime_ratios(p, th);
  if (!(r.h1 >= opt.min_ratio && r.h2 >= opt.min_ratio)) {
    std::ostringstream msg;
    msg << "asymptotic regime violated: |l2||a1|/b = " << r.h1 << ", |l2||a2|/b = " << r.h2
        << " (need >= " << opt.min_ratio << ")";
    throw RegimeError(msg.str());
  }
}

/// Density of the first passage of dS = |a| dt + sqrt(2b) dW through level
/// `level` > 0 (inverse Gaussian with mean level/|a|, shape level^2/(2b)).
inline double first_passage_density(double t, double level, double abs_drift, double b) {
  if (!(t > 0.0)) return 0.0;
  const double z = abs_drift * t - level;
  return level / (2.0 * std::sqrt(std::numbers::pi * b) * t * std::sqrt(t)) *
         std::exp(-z * z / (4.0 * b * t));
}

struct DensityValue {
  double value;
  bool clamped;  // bracket correction evaluated negative and was set to 0
};

/// p_T(t | D = d, H = h) to leading order in |l2|. For D = 2 the bracketed
/// image term is clamped at zero where it turns negative.
inline DensityValue decision_time_density_checked(double t, Decision d, Hypothesis h,
                                                  const ContinuousLLRParams& p,
                                                  const Thresholds& th,
                                                  const RegimeOptions& opt = {}) {
  check_regime(p, th, opt);
  if (!(t > 0.0)) throw std::invalid_argument("density argument t must be > 0");
  const double a = std::abs(p.a(h));
  const double b = p.b;
  const double l1 = th.l1;
  if (d == Decision::D1) return {first_passage_density(t, l1, a, b), false};
  if (std::isinf(th.l2))
    throw RegimeError("D = 2 density needs a finite l2 (it has no mass as l2 -> -inf)");
  const double m = std::abs(th.l2);
  const double z = a * t - m;
  const double lead = 1.0 / (-std::expm1(-a * l1 / b)) /
                      (std::sqrt(std::numbers::pi * b) * t * std::sqrt(t)) *
                      std::exp(-z * z / (4.0 * b * t));
  double bracket = 0.5 * m - (l1 + 0.5 * m) * std::exp(-(l1 * l1 + m * l1) / (b * t));
  const bool clamped = bracket < 0.0;
  if (clamped) bracket = 0.0;
  return {lead * bracket, clamped};
}

inline double decision_time_density(double t, Decision d, Hypothesis h,
                                    const ContinuousLLRParams& p, const Thresholds& th,
                                    const RegimeOptions& opt = {}) {
  return decision_time_density_checked(t, d, h, p, th, opt).value;
}

/// Leading-order E[T | D = d, H = h], plus the mean time of the matched
/// Wald test with the same error probabilities when the observation model
/// is supplied.
struct MeanTimes {
  double d1h1;
  double d1h2;
  double d2h1;
  double d2h2;
  double wald_reference = std::numeric_limits<double>::quiet_NaN();

  double get(Decision d, Hypothesis h) const {
    if (d == Decision::D1) return h == Hypothesis::H1 ? d1h1 : d1h2;
    return h == Hypothesis::H1 ? d2h1 : d2h2;
  }
};

/// 2 (sigma / (mu1 - mu2))^2 ln((1 - alpha2) / alpha1).
inline double wald_reference_mean_time(const DriftDiffusionModel& obs, const ErrorProbs& e) {
  const double r = obs.sigma / (obs.mu1 - obs.mu2);
  return 2.0 * r * r * (std::log1p(-e.alpha2) - std::log(e.alpha1));
}

inline MeanTimes mean_decision_times(const ContinuousLLRParams& p, const Thresholds& th,
                                     const RegimeOptions& opt = {}) {
  check_regime(p, th, opt);
  const double a1 = std::abs(p.a1);
  const double a2 = std::abs(p.a2);
  const double m = std::abs(th.l2);
  auto lower = [&](double a) {
    if (std::isinf(m)) return std::numeric_limits<double>::infinity();
    return (m - 2.0 * th.l1 / std::expm1(a * th.l1 / p.b)) / a;
  };
  return {th.l1 / a1, th.l1 / a2, lower(a1), lower(a2)};
}

inline MeanTimes mean_decision_times(const ContinuousLLRParams& p, const Thresholds& th,
                                     const DriftDiffusionModel& obs,
                                     const RegimeOptions& opt = {}) {
  MeanTimes out = mean_decision_times(p, th, opt);
  out.wald_reference = wald_reference_mean_time(obs, error_probs_continuous_unchecked(p, th));
  return out;
}

// --- mutual information --------------------------------------------------------

namespace detail {

struct MiSetup {
  double a1;  // |a1|
  double a2;  // |a2|
  double b;
  double l1;
  double alpha1;
  double log_alpha1;
};

inline MiSetup mi_setup(const ContinuousLLRParams& p, double l1) {
  p.validate();
  if (!(l1 > 0.0)) throw std::invalid_argument("l1 must be > 0");
  const double log_alpha1 = p.a2 * l1 / p.b;
  if (!(log_alpha1 <= -std::numbers::ln2))
    throw RegimeError("alpha1 = exp(a2 l1 / b) must lie in (0, 1/2]; need a2 < 0 and large l1");
  if (p.a1 == 0.0) throw RegimeError("a1 = 0: the D=1 time has no finite mean");
  return {std::abs(p.a1), std::abs(p.a2), p.b, l1, std::exp(log_alpha1), log_alpha1};
}

// Per-(h, D=1) contributions to I(H; T | D) in bits given the likelihood
// ratio rho = f2 / f1 at a point or bin, rewritten so both integrands vanish
// identically when rho == 1.
inline double h1_term(const MiSetup& s, double log_rho) {
  // log2((1 + alpha1) / (1 + alpha1 rho))
  return (std::log1p(s.alpha1) - log_add_exp(0.0, s.log_alpha1 + log_rho)) /
         std::numbers::ln2;
}
inline double h2_term(const MiSetup& s, double log_rho) {
  // log2((1 + alpha1) rho / (1 + alpha1 rho))
  return (std::log1p(s.alpha1) + log_rho - log_add_exp(0.0, s.log_alpha1 + log_rho)) /
         std::numbers::ln2;
}

}  // namespace detail

/// I(H; T | D) in bits for equal priors in the l2 -> -inf limit, where
/// alpha1 = exp(a2 l1 / b) and D = 2 only occurs under H = 2.
inline double mutual_info_continuous(const ContinuousLLRParams& p, double l1) {
  const detail::MiSetup s = detail::mi_setup(p, l1);
  if (s.a1 == s.a2) return 0.0;
  // ln(f2/f1) is linear in t for two inverse Gaussians sharing level and shape.
  auto log_rho = [&](double t) {
    return (s.a1 - s.a2) * ((s.a1 + s.a2) * t - 2.0 * s.l1) / (4.0 * s.b);
  };
  auto f1 = [&](double t) { return first_passage_density(t, s.l1, s.a1, s.b); };
  auto f2 = [&](double t) { return first_passage_density(t, s.l1, s.a2, s.b); };
  const double scale = s.l1 / std::max(s.a1, s.a2);
  const auto i1 = integrate_half_line(
      [&](double t) {
        const double f = f1(t);
        return f == 0.0 ? 0.0 : f * detail::h1_term(s, log_rho(t));
      },
      scale);
  const auto i2 = integrate_half_line(
      [&](double t) {
        const double f = f2(t);
        return f == 0.0 ? 0.0 : f * detail::h2_term(s, log_rho(t));
      },
      scale);
  return std::max(0.0, 0.5 * i1.value + 0.5 * s.alpha1 * i2.value);
}

namespace detail {

// P(lo < T <= hi) for the first passage of |a| t + sqrt(2b) W through
// `level`, from the inverse Gaussian CDF; whichever tail is smaller is
// differenced to limit cancellation.
inline double first_passage_mass(double lo, double hi, double level, double abs_drift, double b) {
  const boost::math::inverse_gaussian_distribution<double> ig(level / abs_drift,
                                                               level * level / (2.0 * b));
  auto cdf = [&](double t) { return t <= 0.0 ? 0.0 : boost::math::cdf(ig, t); };
  auto sf = [&](double t) { return t <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(ig, t)); };
  if (hi <= ig.mean()) return std::max(0.0, cdf(hi) - cdf(lo));
  return std::max(0.0, sf(lo) - sf(hi));
}

inline double first_passage_survival(double t, double level, double abs_drift, double b) {
  const boost::math::inverse_gaussian_distribution<double> ig(level / abs_drift,
                                                               level * level / (2.0 * b));
  return t <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(ig, t));
}

}  // namespace detail

/// I(H; N | D) in bits where N = ceil(T / t_r) is the decision time measured
/// at resolution t_r; bins are summed until the remaining mass of both
/// conditional laws is below 1e-12.
inline double mutual_info_discretized(const ContinuousLLRParams& p, double l1, double t_r) {
  if (!(t_r > 0.0)) throw std::invalid_argument("time resolution t_r must be > 0");
  const detail::MiSetup s = detail::mi_setup(p, l1);
  if (s.a1 == s.a2) return 0.0;
  double acc1 = 0.0, acc2 = 0.0;
  const double past_means = std::max(s.l1 / s.a1, s.l1 / s.a2);
  constexpr std::size_t kMaxBins = 50'000'000;
  for (std::size_t n = 1; n <= kMaxBins; ++n) {
    const double lo = static_cast<double>(n - 1) * t_r;
    const double hi = static_cast<double>(n) * t_r;
    const double p1 = detail::first_passage_mass(lo, hi, s.l1, s.a1, s.b);
    const double p2 = detail::first_passage_mass(lo, hi, s.l1, s.a2, s.b);
    if (p1 > 0.0 && p2 > 0.0) {
      const double lr = std::log(p2) - std::log(p1);
      acc1 += p1 * detail::h1_term(s, lr);
      acc2 += p2 * detail::h2_term(s, lr);
    } else if (p2 > 0.0) {
      acc2 += p2 * (std::log1p(s.alpha1) - s.log_alpha1) / std::numbers::ln2;
    } else if (p1 > 0.0) {
      acc1 += p1 * std::log1p(s.alpha1) / std::numbers::ln2;
    }
    if (hi > past_means && detail::first_passage_survival(hi, s.l1, s.a1, s.b) < 1e-12 &&
        detail::first_passage_survival(hi, s.l1, s.a2, s.b) < 1e-12)
      return std::max(0.0, 0.5 * acc1 + 0.5 * s.alpha1 * acc2);
  }
  throw QuadratureNonConvergence("discretized mutual information did not converge");
}

// --- sampling --------------------------------------------------------------------

/// Inverse Gaussian variate by transformation with multiple roots
/// (Michael, Schucany & Haas).
inline double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  if (!(mean > 0.0) || !(shape > 0.0))
    throw std::invalid_argument("inverse Gaussian mean and shape must be > 0");
  const double nu = rng.normal();
  const double w = mean * nu * nu / (2.0 * shape);
  // Smaller root mean * (1 + w - sqrt(w (w + 2))), written without cancellation.
  const double x = mean / (1.0 + w + std::sqrt(w * (w + 2.0)));
  if (rng.uniform() * (mean + x) <= mean) return x;
  return mean * mean / x;
}

struct EnvelopeFailure : Error {
  using Error::Error;
};

/// Draws (D, T) given H from the closed-form law: D from the two-boundary
/// error probabilities, T from the matching asymptotic density. D = 2 times
/// are drawn by rejection from the inverse Gaussian obtained by dropping the
/// image term of the bracket, which dominates the target pointwise.
inline TrialRecord sample_outcome_given_hypothesis(const ContinuousLLRParams& p,
                                                   const Thresholds& th, Hypothesis h,
                                                   Rng& rng, const RegimeOptions& opt = {}) {
  check_regime(p, th, opt);
  const ErrorProbs e = error_probs_continuous_unchecked(p, th);
  const double p_upper = h == Hypothesis::H1 ? 1.0 - e.alpha2 : e.alpha1;
  const Decision d = rng.uniform() < p_upper ? Decision::D1 : Decision::D2;
  const double a = std::abs(p.a(h));
  if (d == Decision::D1) {
    const double t = sample_inverse_gaussian(th.l1 / a, th.l1 * th.l1 / (2.0 * p.b), rng);
    return {h, d, t, th.l1};
  }
  if (std::isinf(th.l2)) throw RegimeError("cannot sample D = 2 times with l2 = -inf");
  const double m = std::abs(th.l2);
  const double mean = m / a;
  const double shape = m * m / (2.0 * p.b);
  const double image_weight = 1.0 + 2.0 * th.l1 / m;
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const double t = sample_inverse_gaussian(mean, shape, rng);
    const double accept = 1.0 - image_weight * std::exp(-th.l1 * (th.l1 + m) / (p.b * t));
    if (rng.uniform() < accept) return {h, d, t, th.l2};
  }
  throw EnvelopeFailure("rejection sampler for D = 2 times failed to accept");
}

/// Draws (H, D, T): H from the prior p1 = P(H = 1), then (D, T) given H.
inline TrialRecord sample_decision_outcome_asymptotic(const ContinuousLLRParams& p,
                                                      const Thresholds& th, double p1,
                                                      Rng& rng, const RegimeOptions& opt = {}) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("prior p1 must lie in [0, 1]");
  const Hypothesis h = rng.uniform() < p1 ? Hypothesis::H1 : Hypothesis::H2;
  return sample_outcome_given_hypothesis(p, th, h, rng, opt);
}

}  // namespace seqaudit
