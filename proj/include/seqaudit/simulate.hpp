#pragma once

// Monte Carlo harness: N independent trials of one configured device, each
// under a hypothesis drawn from the prior, collected into records.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "seqaudit/analytic.hpp"
#include "seqaudit/core.hpp"
#include "seqaudit/models.hpp"
#include "seqaudit/oracle.hpp"
#include "seqaudit/parallel.hpp"
#include "seqaudit/rng.hpp"

namespace seqaudit {

struct IidDevice {
  GaussianIIDModel model;
  GaussianIIDModel belief;
  Thresholds th;
  std::size_t max_steps = 1'000'000;
};

struct MarkovDevice {
  MarkovGaussianModel model;
  MarkovGaussianModel belief;
  Thresholds th;
  std::size_t max_steps = 1'000'000;
};

struct LatticeDevice {
  LatticeBernoulliModel model;
  std::size_t max_steps = 1'000'000;
};

struct ContinuousDevice {
  DriftDiffusionModel model;
  DriftDiffusionModel belief;
  Thresholds th;
  double dt = 0.01;
  double t_max = 1e6;
};

// Draws outcomes from the closed-form continuous law instead of simulating
// paths.
struct AsymptoticDevice {
  DriftDiffusionModel model;
  DriftDiffusionModel belief;
  Thresholds th;
};

using DeviceSpec =
    std::variant<IidDevice, MarkovDevice, LatticeDevice, ContinuousDevice, AsymptoticDevice>;

inline TimeKind time_kind(const DeviceSpec& spec) {
  return std::holds_alternative<ContinuousDevice>(spec) ||
                 std::holds_alternative<AsymptoticDevice>(spec)
             ? TimeKind::Continuous
             : TimeKind::Steps;
}

inline void validate(const DeviceSpec& spec) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LatticeDevice>) {
          d.model.validate();
          if (d.max_steps == 0) throw ConfigError("max_steps must be >= 1");
        } else {
          d.model.validate();
          d.belief.validate();
          Thresholds::make(d.th.l1, d.th.l2);
          if constexpr (std::is_same_v<T, ContinuousDevice>) {
            if (!(d.dt > 0.0)) throw ConfigError("dt must be > 0");
            if (!(d.t_max > d.dt)) throw ConfigError("t_max must exceed dt");
          } else if constexpr (!std::is_same_v<T, AsymptoticDevice>) {
            if (d.max_steps == 0) throw ConfigError("max_steps must be >= 1");
          }
        }
      },
      spec);
}

/// One device run under hypothesis h.
inline WaldOutcome run_device(const DeviceSpec& spec, Hypothesis h, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> WaldOutcome {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, IidDevice> || std::is_same_v<T, MarkovDevice>) {
          return run_wald_discrete(d.model, d.belief, d.th, h, d.max_steps, rng);
        } else if constexpr (std::is_same_v<T, LatticeDevice>) {
          return run_wald_lattice(d.model, h, d.max_steps, rng);
        } else if constexpr (std::is_same_v<T, ContinuousDevice>) {
          return run_wald_continuous(d.model, d.belief, d.th, h, d.dt, d.t_max, rng);
        } else {
          const TrialRecord r =
              sample_outcome_given_hypothesis(continuous_llr_params(d.model, d.belief), d.th, h, rng);
          WaldOutcome out;
          out.hypothesis = h;
          out.decision = r.decision;
          out.time = r.time;
          out.terminal_llr = r.terminal_llr.value_or(0.0);
          return out;
        }
      },
      spec);
}

struct ExperimentConfig {
  DeviceSpec device;
  double p1 = 0.5;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  // Exact split: the first round(p1 * trials) trials run under H1.
  bool stratified = false;
  unsigned threads = 1;

  void validate() const {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw ConfigError("p1 must lie in [0, 1]");
    if (trials == 0) throw ConfigError("trials must be >= 1");
    seqaudit::validate(device);
  }
};

struct ErrorEstimate {
  double alpha1;  // #{D=1, H=2} / #{H=2 decided}
  double alpha2;  // #{D=2, H=1} / #{H=1 decided}
};

struct ExperimentResult {
  TimeKind kind = TimeKind::Steps;
  std::vector<TrialRecord> records;  // decided trials, in trial order
  std::size_t trials = 0;
  std::size_t truncated_count = 0;
  std::array<std::size_t, 2> truncated_by_h{};
  std::array<std::array<std::size_t, 2>, 2> cell_count{};
  std::array<std::array<double, 2>, 2> cell_mean{};  // NaN for empty cells
  bool stratified = false;
  std::uint64_t seed = 0;

  std::size_t decided() const noexcept { return records.size(); }
  std::size_t decided_under(Hypothesis h) const noexcept {
    return cell_count[index_of(h)][0] + cell_count[index_of(h)][1];
  }
  double truncation_rate() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(truncated_count) / static_cast<double>(trials);
  }
  double mean_time(Hypothesis h, Decision d) const { return cell_mean[index_of(h)][index_of(d)]; }
  /// Mean decision time over decided trials under h.
  double mean_time(Hypothesis h) const {
    const auto& c = cell_count[index_of(h)];
    const double n = static_cast<double>(c[0] + c[1]);
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (int d = 0; d < 2; ++d)
      if (c[d] > 0) s += cell_mean[index_of(h)][d] * static_cast<double>(c[d]);
    return s / n;
  }
};

inline ErrorEstimate empirical_error_probs(const ExperimentResult& r) {
  const double n1 = static_cast<double>(r.decided_under(Hypothesis::H1));
  const double n2 = static_cast<double>(r.decided_under(Hypothesis::H2));
  if (n1 == 0 || n2 == 0)
    throw PreconditionError("error probabilities need a decided trial under each hypothesis");
  return {static_cast<double>(r.cell_count[1][0]) / n2, static_cast<double>(r.cell_count[0][1]) / n1};
}

inline Hypothesis trial_hypothesis(const ExperimentConfig& cfg, std::size_t i, Rng& rng) {
  if (cfg.stratified) {
    const auto n1 = static_cast<std::size_t>(std::llround(cfg.p1 * static_cast<double>(cfg.trials)));
    return i < n1 ? Hypothesis::H1 : Hypothesis::H2;
  }
  return rng.uniform() < cfg.p1 ? Hypothesis::H1 : Hypothesis::H2;
}

/// Runs every trial on its own stream; output depends only on the seed,
/// parameters and trial count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<WaldOutcome> outcomes(cfg.trials);
  parallel_chunks(cfg.trials, cfg.threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = stream_for(cfg.seed, i);
      const Hypothesis h = trial_hypothesis(cfg, i, rng);
      outcomes[i] = run_device(cfg.device, h, rng);
    }
  });

  ExperimentResult res;
  res.kind = time_kind(cfg.device);
  res.trials = cfg.trials;
  res.stratified = cfg.stratified;
  res.seed = cfg.seed;
  res.records.reserve(cfg.trials);
  std::array<std::array<double, 2>, 2> sums{};
  for (const auto& o : outcomes) {
    if (o.truncated()) {
      ++res.truncated_count;
      ++res.truncated_by_h[index_of(o.hypothesis)];
      continue;
    }
    res.records.push_back(o.record());
    ++res.cell_count[index_of(o.hypothesis)][index_of(*o.decision)];
    sums[index_of(o.hypothesis)][index_of(*o.decision)] += o.time;
  }
  for (int h = 0; h < 2; ++h)
    for (int d = 0; d < 2; ++d)
      res.cell_mean[h][d] = res.cell_count[h][d] == 0
                                ? std::numeric_limits<double>::quiet_NaN()
                                : sums[h][d] / static_cast<double>(res.cell_count[h][d]);
  return res;
}

}  // namespace seqaudit
