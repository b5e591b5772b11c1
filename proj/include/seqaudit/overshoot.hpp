#pragma once

// Empirical overshoot diagnostics for discrete-time Wald devices: the
// conditional mean of e^{M1} given termination with D = 1 at step k under
// H = 2, where M1 = S_T - l1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <variant>
#include <vector>

#include "seqaudit/core.hpp"
#include "seqaudit/parallel.hpp"
#include "seqaudit/simulate.hpp"

namespace seqaudit {

struct OvershootSeries {
  std::vector<std::size_t> k;
  std::vector<double> value;       // E[e^{M1} | T = k, D = 1, H = 2]; NaN where count == 0
  std::vector<std::size_t> count;  // contributing trials at each k
  std::vector<double> pmf;         // P(T = k | D = 1, H = 2)
  std::size_t trials = 0;
  std::size_t truncated = 0;

  /// Mass-weighted mean of value, i.e. E[e^{M1} | D = 1, H = 2].
  double weighted_mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (count[i] > 0) s += pmf[i] * value[i];
    return s;
  }
};

enum class OvershootMethod {
  // Run under H = 2 and average e^{M1} over the D = 1 outcomes.
  Direct,
  // Run under H = 1 and reweight by the likelihood ratio e^{-S_T}; valid
  // only for matched devices, where S is the true log-likelihood ratio.
  // Needed when D = 1 under H = 2 is too rare to sample directly.
  Reweighted,
};

inline bool is_discrete(const DeviceSpec& spec) { return time_kind(spec) == TimeKind::Steps; }

inline double device_l1(const DeviceSpec& spec) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LatticeDevice>)
          return d.model.thresholds().l1;
        else
          return d.th.l1;
      },
      spec);
}

inline OvershootSeries overshoot_profile(const DeviceSpec& device, std::size_t trials,
                                         std::uint64_t seed, unsigned threads = 1,
                                         OvershootMethod method = OvershootMethod::Direct) {
  if (!is_discrete(device)) throw PreconditionError("overshoot diagnostics need a discrete device");
  if (trials == 0) throw ConfigError("trials must be >= 1");
  validate(device);
  const Hypothesis h = method == OvershootMethod::Direct ? Hypothesis::H2 : Hypothesis::H1;
  const double l1 = device_l1(device);
  std::vector<WaldOutcome> outcomes(trials);
  parallel_chunks(trials, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = stream_for(seed, i);
      outcomes[i] = run_device(device, h, rng);
    }
  });

  std::size_t k_max = 0;
  for (const auto& o : outcomes)
    if (o.decision == Decision::D1) k_max = std::max(k_max, o.steps);

  OvershootSeries s;
  s.trials = trials;
  s.k.resize(k_max);
  for (std::size_t i = 0; i < k_max; ++i) s.k[i] = i + 1;
  s.count.assign(k_max, 0);
  std::vector<double> acc(k_max, 0.0);
  for (const auto& o : outcomes) {
    if (o.truncated()) {
      ++s.truncated;
      continue;
    }
    if (o.decision != Decision::D1) continue;
    const double m1 = o.terminal_llr - l1;
    ++s.count[o.steps - 1];
    acc[o.steps - 1] += method == OvershootMethod::Direct ? std::exp(m1) : std::exp(-m1);
  }

  s.value.assign(k_max, std::numeric_limits<double>::quiet_NaN());
  s.pmf.assign(k_max, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < k_max; ++i) {
    if (s.count[i] == 0) continue;
    if (method == OvershootMethod::Direct) {
      s.value[i] = acc[i] / static_cast<double>(s.count[i]);
      s.pmf[i] = static_cast<double>(s.count[i]);
    } else {
      // E2[e^{M1} | T=k, D=1] = 1 / E1[e^{-M1} | T=k, D=1], and the H = 2
      // termination mass at k is proportional to the summed weights.
      s.value[i] = static_cast<double>(s.count[i]) / acc[i];
      s.pmf[i] = acc[i];
    }
    mass += s.pmf[i];
  }
  if (mass > 0.0)
    for (auto& p : s.pmf) p /= mass;
  return s;
}

/// max/min of the series over the shortest contiguous k-range holding at
/// least `mass_threshold` of the termination mass (the heavier one on ties).
inline double overshoot_flatness(const OvershootSeries& s, double mass_threshold = 0.9) {
  if (!(mass_threshold > 0.0 && mass_threshold <= 1.0))
    throw std::invalid_argument("mass threshold must lie in (0, 1]");
  double total = 0.0;
  for (double p : s.pmf) total += p;
  if (!(total > 0.0)) throw PreconditionError("overshoot series carries no mass");
  const double need = mass_threshold * total * (1.0 - 1e-12);
  const std::size_t n = s.pmf.size();
  std::size_t best_lo = 0, best_hi = n - 1;
  double best_mass = -1.0;
  std::size_t best_len = n + 1;
  std::size_t lo = 0;
  double window = 0.0;
  for (std::size_t hi = 0; hi < n; ++hi) {
    window += s.pmf[hi];
    while (lo < hi && window - s.pmf[lo] >= need) window -= s.pmf[lo++];
    if (window >= need) {
      const std::size_t len = hi - lo + 1;
      if (len < best_len || (len == best_len && window > best_mass)) {
        best_len = len;
        best_lo = lo;
        best_hi = hi;
        best_mass = window;
      }
    }
  }
  double vmax = -std::numeric_limits<double>::infinity();
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = best_lo; i <= best_hi; ++i) {
    if (s.count[i] == 0) continue;
    vmax = std::max(vmax, s.value[i]);
    vmin = std::min(vmin, s.value[i]);
  }
  if (!(vmin > 0.0)) throw PreconditionError("overshoot series is degenerate on its mass range");
  if (vmax == vmin) return 1.0;
  return vmax / vmin;
}

inline void write_overshoot_csv(std::ostream& os, const OvershootSeries& s) {
  os << "k,value,count,pmf\n";
  os.precision(17);
  for (std::size_t i = 0; i < s.k.size(); ++i) {
    os << s.k[i] << ',';
    if (s.count[i] > 0) os << s.value[i];
    os << ',' << s.count[i] << ',' << s.pmf[i] << '\n';
  }
}

}  // namespace seqaudit
