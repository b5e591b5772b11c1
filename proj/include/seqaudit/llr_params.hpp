#pragma once

// Drift and diffusion of the device's log-likelihood ratio for continuous
// drift-diffusion observations. Shared by the path simulator and the
// closed-form module.

#include <cmath>
#include <stdexcept>

#include "seqaudit/core.hpp"

namespace seqaudit {

/// dX_t = mu_h dt + sigma dW_t with X_0 = 0. Used both for the true
/// observation process and for a device's belief (mu~1, mu~2, sigma~).
struct DriftDiffusionModel {
  double mu1;
  double mu2;
  double sigma;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("drift-diffusion sigma must be > 0");
  }
  double mu(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? mu1 : mu2; }
};

/// Under H = i the device's statistic obeys dS = a_i dt + sqrt(2b) dW.
struct ContinuousLLRParams {
  double a1;
  double a2;
  double b;

  double a(Hypothesis h) const noexcept { return h == Hypothesis::H1 ? a1 : a2; }

  void validate() const {
    if (!(b > 0.0)) throw std::invalid_argument("diffusion parameter b must be > 0");
    if (!std::isfinite(a1) || !std::isfinite(a2))
      throw std::invalid_argument("drifts a1, a2 must be finite");
  }
};

inline ContinuousLLRParams continuous_llr_params(const DriftDiffusionModel& obs,
                                                 const DriftDiffusionModel& belief) {
  obs.validate();
  belief.validate();
  if (belief.mu1 == belief.mu2)
    throw std::invalid_argument("device with mu~1 == mu~2 carries no evidence (b = 0)");
  const double s2 = belief.sigma * belief.sigma;
  const double gain = (belief.mu1 - belief.mu2) / s2;
  const double mid = 0.5 * (belief.mu1 + belief.mu2);
  const double root_b = obs.sigma * gain;
  return {gain * (obs.mu1 - mid), gain * (obs.mu2 - mid), 0.5 * root_b * root_b};
}

/// Ratio S~_t / S_t for a belief satisfying mu~1 + mu~2 = mu1 + mu2; such
/// a device is a rescaled optimal one.
inline double scale_factor(const DriftDiffusionModel& obs, const DriftDiffusionModel& belief) {
  const double r = obs.sigma / belief.sigma;
  return r * r * (belief.mu1 - belief.mu2) / (obs.mu1 - obs.mu2);
}

}  // namespace seqaudit
