#pragma once

// Matched Wald reference for a discrete device: the correctly specified test
// whose thresholds are tuned by simulation until it reproduces the device's
// empirical error probabilities. Its mean decision time is the optimum the
// device is compared against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <variant>

#include "seqaudit/simulate.hpp"

namespace seqaudit {

struct ReferenceResult {
  Thresholds th;
  ErrorEstimate achieved;
  double mean_time = 0.0;  // prior-weighted E[T | H] over decided trials
  std::array<double, 2> mean_time_by_h{};
  double truncation_rate = 0.0;
};

struct ReferenceOptions {
  std::size_t trials = 200'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int iterations = 20;
  double p1 = 0.5;
  bool stratified = false;
};

/// The device with its belief replaced by the true model and thresholds th.
inline DeviceSpec matched_device(const DeviceSpec& spec, const Thresholds& th) {
  return std::visit(
      [&](const auto& d) -> DeviceSpec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LatticeDevice>) {
          throw PreconditionError("lattice devices are matched by construction");
        } else {
          T m = d;
          m.belief = d.model;
          m.th = th;
          return m;
        }
      },
      spec);
}

/// Fixed-point search on (l1, l2) using common random numbers: each pass
/// shifts l1 by ln(alpha1_hat / alpha1) and l2 by -ln(alpha2_hat / alpha2),
/// which is exact for boundary hits without overshoot. Running it with the
/// device's own seed and trial count makes the comparison paired: at the
/// matched point the reference reproduces the device run.
inline ReferenceResult calibrate_matched_reference(const DeviceSpec& device,
                                                   const ErrorEstimate& target,
                                                   const ReferenceOptions& opt = {}) {
  if (opt.trials == 0) throw ConfigError("reference trials must be >= 1");
  const double floor = 0.5 / static_cast<double>(opt.trials);
  const double t1 = std::clamp(target.alpha1, floor, 0.5);
  const double t2 = std::clamp(target.alpha2, floor, 0.5);
  double l1 = std::log((1.0 - t2) / t1);
  double l2 = std::log(t2 / (1.0 - t1));
  ReferenceResult out{Thresholds::make(std::max(l1, 1e-3), std::min(l2, -1e-3)), {}};
  for (int it = 0; it <= opt.iterations; ++it) {
    out.th = Thresholds::make(std::max(l1, 1e-3), std::min(l2, -1e-3));
    ExperimentConfig cfg{matched_device(device, out.th), opt.p1, opt.trials, opt.seed, opt.stratified,
                         opt.threads};
    const ExperimentResult r = run_experiment(cfg);
    out.achieved = empirical_error_probs(r);
    out.mean_time_by_h = {r.mean_time(Hypothesis::H1), r.mean_time(Hypothesis::H2)};
    out.mean_time = opt.p1 * out.mean_time_by_h[0] + (1.0 - opt.p1) * out.mean_time_by_h[1];
    out.truncation_rate = r.truncation_rate();
    if (it == opt.iterations) break;
    const double a1 = std::max(out.achieved.alpha1, floor);
    const double a2 = std::max(out.achieved.alpha2, floor);
    if (std::abs(std::log(a1 / t1)) < 1e-4 && std::abs(std::log(a2 / t2)) < 1e-4) break;
    l1 = out.th.l1 + std::log(a1 / t1);
    l2 = out.th.l2 - std::log(a2 / t2);
  }
  return out;
}

}  // namespace seqaudit
