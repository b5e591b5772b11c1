#pragma once

// Subcommand implementations. Each takes the parsed configuration and a
// context carrying the output directory and the text streams.

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "seqaudit/analytic.hpp"
#include "seqaudit/cli/common.hpp"
#include "seqaudit/config.hpp"
#include "seqaudit/io.hpp"
#include "seqaudit/oracle.hpp"
#include "seqaudit/overshoot.hpp"
#include "seqaudit/reference.hpp"
#include "seqaudit/simulate.hpp"
#include "seqaudit/stats.hpp"

namespace seqaudit::cli {

// --- simulate --------------------------------------------------------------------

inline Metadata experiment_metadata(const ExperimentResult& r) {
  Metadata m{{"seed", std::to_string(r.seed)},
             {"trials", std::to_string(r.trials)},
             {"decided", std::to_string(r.decided())},
             {"truncated_count", std::to_string(r.truncated_count)},
             {"time_kind", to_string(r.kind)},
             {"stratified", r.stratified ? "true" : "false"}};
  if (r.decided_under(Hypothesis::H1) > 0 && r.decided_under(Hypothesis::H2) > 0) {
    const auto e = empirical_error_probs(r);
    m.emplace_back("alpha1_hat", format_double(e.alpha1));
    m.emplace_back("alpha2_hat", format_double(e.alpha2));
  }
  return m;
}

inline void cmd_simulate(const Config& c, Context& ctx) {
  ExperimentConfig e = experiment_from_config(c);
  const std::string name = c.get_string("output", "records", "records.csv");
  c.reject_unused({"manifest"});
  const ExperimentResult r = run_experiment(e);
  const auto csv = ctx.emit(name, [&](std::ostream& os) { write_records_csv(os, r.records, r.kind); });
  const auto meta = experiment_metadata(r);
  ctx.emit(sidecar_path(csv).filename().string(), [&](std::ostream& os) { write_metadata(os, meta); });
  for (const auto& [k, v] : meta) ctx.log() << k << " = " << v << '\n';
  if (r.truncated_count > 0)
    ctx.warn() << "warning: " << r.truncated_count << " trials reached the observation window "
               << "undecided and were discarded\n";
}

// --- test ---------------------------------------------------------------------------

inline void report_row(std::ostream& os, const std::string& label, const TestReport& t) {
  os << label << ',' << to_string(t.method) << ',' << format_double(t.statistic) << ','
     << format_double(t.p_value) << ',' << t.n1 << ',' << t.n2 << ',' << t.dof << ','
     << (t.rejects(0.01) ? 1 : 0) << ',' << (t.rejects(0.05) ? 1 : 0) << '\n';
}

inline void print_report(std::ostream& os, const std::string& label, const TestReport& t) {
  os << label << ": " << to_string(t.method) << " statistic = " << t.statistic
     << ", p = " << t.p_value << ", n1 = " << t.n1 << ", n2 = " << t.n2;
  if (t.method == TestMethod::CHI2) os << ", dof = " << t.dof;
  os << "\n  reject at 0.01: " << (t.rejects(0.01) ? "yes" : "no")
     << ", reject at 0.05: " << (t.rejects(0.05) ? "yes" : "no") << '\n';
}

inline TimeKind time_kind_from(const Config& c, TimeKind inferred) {
  const std::string t = c.get_string("test", "time", "auto");
  if (t == "auto") return inferred;
  if (t == "steps") return TimeKind::Steps;
  if (t == "continuous") return TimeKind::Continuous;
  throw ConfigError(c.source() + ": test.time must be auto, steps or continuous; got '" + t + "'");
}

inline void cmd_test(const Config& c, Context& ctx) {
  const std::string path = c.require("test", "records");
  const std::string mode = c.get_string("test", "mode", "known-h");
  const double floor = c.get_double("stats", "merge_floor", 5.0);
  if (mode != "known-h" && mode != "unknown-h")
    throw ConfigError(c.source() + ": test.mode must be known-h or unknown-h; got '" + mode + "'");
  const RecordSet set = read_records_csv(std::filesystem::path(path));
  const TimeKind kind = time_kind_from(c, set.kind);
  const Binning bins = binning_for(c, set.records, kind);
  c.reject_unused({"manifest"});
  if (set.records.empty()) throw PreconditionError("record file has no records");
  const Binning chi_bins = Binning::discrete_native(floor);

  std::vector<std::pair<std::string, TestReport>> reports;
  if (mode == "known-h") {
    const auto r = optimality_test_known_h(set.records, kind, chi_bins);
    reports.emplace_back("D=1: A11 vs A21", r.decision1);
    reports.emplace_back("D=2: A12 vs A22", r.decision2);
  } else {
    ctx.warn() << "note: the unknown-hypothesis test is meaningful only if the observation law "
                  "is sign-flip symmetric and alpha1 = alpha2; this is the caller's assertion\n";
    SampleSets s = partition_records(set.records);
    const double n1 = static_cast<double>(s.a11().size() + s.a12().size());
    const double n2 = static_cast<double>(s.a21().size() + s.a22().size());
    if (n1 > 0 && n2 > 0) {
      const double a1 = static_cast<double>(s.a21().size()) / n2;
      const double a2 = static_cast<double>(s.a12().size()) / n1;
      const double se = std::sqrt(a1 * (1 - a1) / n2 + a2 * (1 - a2) / n1);
      if (std::abs(a1 - a2) > 3.0 * se)
        ctx.warn() << "warning: empirical error probabilities differ (alpha1 = " << a1
                   << ", alpha2 = " << a2 << "); the symmetric-threshold assumption looks false\n";
    }
    reports.emplace_back("T|D=1 vs T|D=2", optimality_test_unknown_h(set.records, kind, chi_bins));
  }
  for (const auto& [label, rep] : reports) {
    print_report(ctx.log(), label, rep);
    for (const auto& w : rep.warnings) ctx.warn() << "warning: " << w << '\n';
  }
  const MIEstimate mi = conditional_mi_plugin(set.records, bins);
  ctx.log() << "I(H;T|D) plug-in = " << mi.value_bits << " bits (first-order bias "
            << mi.bias_bits << ", n = " << mi.n << ")\n";
  ctx.emit("test_report.csv", [&](std::ostream& os) {
    os << "comparison,method,statistic,p_value,n1,n2,dof,reject_0.01,reject_0.05\n";
    for (const auto& [label, rep] : reports) report_row(os, label, rep);
  });
  ctx.emit("mi_estimate.csv", [&](std::ostream& os) {
    os << "quantity,value_bits,bias_bits,n,cells,binning\n";
    os << "I(H;T|D)," << format_double(mi.value_bits) << ',' << format_double(mi.bias_bits) << ','
       << mi.n << ',' << mi.cells << ','
       << (mi.binning ? std::to_string(mi.binning->bin_count()) + "-bins" : "native") << '\n';
  });
}

// --- mi-scan --------------------------------------------------------------------------

struct ScanRow {
  double value;
  MIEstimate mi;
  std::size_t decided;
  ErrorEstimate alphas;
  double truncation_rate;
  double mean_time;
  std::optional<ReferenceResult> reference;

  double normalized_time() const {
    return reference ? mean_time / reference->mean_time - 1.0
                     : std::numeric_limits<double>::quiet_NaN();
  }
};

/// Sets one belief parameter of the device.
inline DeviceSpec with_belief(const DeviceSpec& spec, const std::string& param, double v) {
  return std::visit(
      [&](const auto& d) -> DeviceSpec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LatticeDevice>) {
          throw ConfigError("lattice devices have no belief parameters to scan");
        } else {
          T m = d;
          bool ok = false;
          if constexpr (std::is_same_v<T, IidDevice>) {
            if (param == "mu1") m.belief.mu1 = v, ok = true;
            if (param == "mu2") m.belief.mu2 = v, ok = true;
            if (param == "sigma1") m.belief.sigma1 = v, ok = true;
            if (param == "sigma2") m.belief.sigma2 = v, ok = true;
          } else if constexpr (std::is_same_v<T, MarkovDevice>) {
            if (param == "v1") m.belief.v1 = v, ok = true;
            if (param == "v2") m.belief.v2 = v, ok = true;
            if (param == "w1") m.belief.w1 = v, ok = true;
            if (param == "w2") m.belief.w2 = v, ok = true;
            if (param == "sigma1") m.belief.sigma1 = v, ok = true;
            if (param == "sigma2") m.belief.sigma2 = v, ok = true;
          } else {
            if (param == "mu1") m.belief.mu1 = v, ok = true;
            if (param == "mu2") m.belief.mu2 = v, ok = true;
            if (param == "sigma") m.belief.sigma = v, ok = true;
          }
          if (param == "l1") m.th.l1 = v, ok = true;
          if (param == "l2") m.th.l2 = v, ok = true;
          if (!ok) throw ConfigError("scan.param '" + param + "' is not a parameter of this device");
          return m;
        }
      },
      spec);
}

struct ScanSettings {
  std::string param;
  std::vector<double> values;
  bool reference = true;
  std::size_t reference_trials = 0;  // 0: same as the device run
};

/// One simulate + estimate cycle per grid point. Every point reuses the same
/// seed, so the scan compares devices on common observation noise.
inline std::vector<ScanRow> run_scan(const ExperimentConfig& base, const ScanSettings& s,
                                     const Config& c, std::ostream* progress = nullptr) {
  std::vector<ScanRow> rows;
  for (double v : s.values) {
    ExperimentConfig e = base;
    e.device = with_belief(base.device, s.param, v);
    const ExperimentResult r = run_experiment(e);
    ScanRow row{v, conditional_mi_plugin(r.records, binning_for(c, r.records, r.kind)),
                r.decided(), empirical_error_probs(r), r.truncation_rate(),
                e.p1 * r.mean_time(Hypothesis::H1) + (1.0 - e.p1) * r.mean_time(Hypothesis::H2),
                std::nullopt};
    if (s.reference && !std::holds_alternative<LatticeDevice>(e.device)) {
      ReferenceOptions ro;
      ro.trials = s.reference_trials == 0 ? e.trials : s.reference_trials;
      ro.seed = e.seed;
      ro.threads = e.threads;
      ro.p1 = e.p1;
      ro.stratified = e.stratified;
      row.reference = calibrate_matched_reference(e.device, row.alphas, ro);
    }
    if (progress)
      *progress << s.param << " = " << v << ": I = " << row.mi.value_bits << " bits"
                << (row.reference ? ", normalized time = " + format_double(row.normalized_time())
                                  : std::string())
                << '\n';
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_scan_csv(std::ostream& os, const std::string& param,
                           const std::vector<ScanRow>& rows) {
  os << param
     << ",mi_bits,bias_bits,cells,decided,alpha1,alpha2,truncation_rate,mean_time,ref_mean_time,"
        "normalized_time,ref_l1,ref_l2\n";
  for (const auto& r : rows) {
    os << format_double(r.value) << ',' << format_double(r.mi.value_bits) << ','
       << format_double(r.mi.bias_bits) << ',' << r.mi.cells << ',' << r.decided << ','
       << format_double(r.alphas.alpha1) << ',' << format_double(r.alphas.alpha2) << ','
       << format_double(r.truncation_rate) << ',' << format_double(r.mean_time) << ',';
    if (r.reference)
      os << format_double(r.reference->mean_time) << ',' << format_double(r.normalized_time())
         << ',' << format_double(r.reference->th.l1) << ',' << format_double(r.reference->th.l2);
    else
      os << ",,,";
    os << '\n';
  }
}

inline ScanSettings scan_settings(const Config& c) {
  ScanSettings s;
  s.param = c.get_string("scan", "param", "mu2");
  s.values = grid_from_config(c, "scan");
  s.reference = c.get_bool("scan", "reference", true);
  s.reference_trials = static_cast<std::size_t>(c.get_uint("scan", "reference_trials", 0));
  return s;
}

inline void cmd_mi_scan(const Config& c, Context& ctx) {
  const ExperimentConfig base = experiment_from_config(c);
  const ScanSettings s = scan_settings(c);
  // Read the binning keys now so unknown-key checking sees them.
  c.get_double("stats", "merge_floor", 5.0);
  c.get_uint("stats", "bins", 32);
  if (c.has("stats", "resolution")) c.require_double("stats", "resolution");
  c.reject_unused({"manifest"});
  const auto rows = run_scan(base, s, c, &ctx.log());
  ctx.emit("mi_scan.csv", [&](std::ostream& os) { write_scan_csv(os, s.param, rows); });
}

// --- overshoot -------------------------------------------------------------------------

inline OvershootMethod overshoot_method(const Config& c) {
  const std::string m = c.get_string("overshoot", "method", "direct");
  if (m == "direct") return OvershootMethod::Direct;
  if (m == "reweighted") return OvershootMethod::Reweighted;
  throw ConfigError(c.source() + ": overshoot.method must be direct or reweighted; got '" + m + "'");
}

inline void cmd_overshoot(const Config& c, Context& ctx) {
  const DeviceSpec device = device_from_config(c);
  const auto trials = static_cast<std::size_t>(c.require_uint("experiment", "trials"));
  const auto seed = seed_of(c);
  const auto threads = threads_of(c);
  const OvershootMethod method = overshoot_method(c);
  const double mass = c.get_double("overshoot", "mass_threshold", 0.9);
  c.reject_unused({"manifest"});
  if (method == OvershootMethod::Reweighted) {
    const bool matched = std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IidDevice>)
            return d.model.mu1 == d.belief.mu1 && d.model.mu2 == d.belief.mu2 &&
                   d.model.sigma1 == d.belief.sigma1 && d.model.sigma2 == d.belief.sigma2;
          else if constexpr (std::is_same_v<T, MarkovDevice>)
            return d.model.v1 == d.belief.v1 && d.model.v2 == d.belief.v2 &&
                   d.model.w1 == d.belief.w1 && d.model.w2 == d.belief.w2 &&
                   d.model.sigma1 == d.belief.sigma1 && d.model.sigma2 == d.belief.sigma2;
          else
            return std::is_same_v<T, LatticeDevice>;
        },
        device);
    if (!matched)
      throw PreconditionError("the reweighted overshoot estimator requires a matched device");
  }
  const OvershootSeries s = overshoot_profile(device, trials, seed, threads, method);
  ctx.emit("overshoot.csv", [&](std::ostream& os) { write_overshoot_csv(os, s); });
  ctx.log() << "trials = " << trials << ", truncated = " << s.truncated << '\n';
  ctx.log() << "E[e^M1 | D=1, H=2] = " << s.weighted_mean() << '\n';
  ctx.log() << "flatness over " << mass << " of the mass = " << overshoot_flatness(s, mass) << '\n';
}

// --- analytic ---------------------------------------------------------------------------

/// The belief's noise amplitude that makes the device's error probability
/// alpha1 = e^{a2 l1 / b} take a prescribed value.
inline double sigma_for_alpha1(const DriftDiffusionModel& obs, double mu1t, double mu2t,
                               double alpha1, double l1) {
  const double ratio = (mu1t - mu2t) / (2.0 * obs.mu2 - mu1t - mu2t) * std::log(alpha1) / l1;
  if (!(ratio > 0.0))
    throw RegimeError("no real belief sigma reproduces alpha1 = " + format_double(alpha1) +
                      " at mu2~ = " + format_double(mu2t));
  return std::sqrt(obs.sigma * obs.sigma * ratio);
}

struct AnalyticPoint {
  ContinuousLLRParams p;
  Thresholds th;
  std::optional<DriftDiffusionModel> obs;
};

inline AnalyticPoint analytic_point(const Config& c, const std::optional<std::pair<std::string, double>>& scan) {
  auto value = [&](const std::string& section, const std::string& key, double fallback) {
    if (scan && scan->first == key && section == "device") return scan->second;
    return c.get_double(section, key, fallback);
  };
  const double l1 = c.require_double("thresholds", "l1");
  const double l2 = c.has("thresholds", "l2") ? c.require_double("thresholds", "l2")
                                             : -std::numeric_limits<double>::infinity();
  if (!(l1 > 0.0) || !(l2 < 0.0)) throw ConfigError(c.source() + ": need l1 > 0 > l2");
  Thresholds th{l1, l2};
  if (c.has("analytic", "a1")) {
    ContinuousLLRParams p{c.require_double("analytic", "a1"), c.require_double("analytic", "a2"),
                          c.require_double("analytic", "b")};
    p.validate();
    return {p, th, std::nullopt};
  }
  DriftDiffusionModel obs{c.require_double("model", "mu1"), c.require_double("model", "mu2"),
                          c.require_double("model", "sigma")};
  obs.validate();
  const double mu1t = value("device", "mu1", obs.mu1);
  const double mu2t = value("device", "mu2", obs.mu2);
  double sigmat = 0.0;
  if (c.has("device", "alpha1")) {
    sigmat = sigma_for_alpha1(obs, mu1t, mu2t, c.require_double("device", "alpha1"), l1);
  } else {
    sigmat = value("device", "sigma", obs.sigma);
  }
  DriftDiffusionModel belief{mu1t, mu2t, sigmat};
  belief.validate();
  return {continuous_llr_params(obs, belief), th, obs};
}

inline void cmd_analytic(const Config& c, Context& ctx) {
  const std::string q = c.require("analytic", "quantity");
  const double min_ratio = c.get_double("analytic", "min_ratio", RegimeOptions{}.min_ratio);
  const RegimeOptions ropt{min_ratio};
  std::optional<std::string> scan_param;
  std::vector<double> scan_values{std::numeric_limits<double>::quiet_NaN()};
  if (c.has_section("scan")) {
    scan_param = c.get_string("scan", "param", "mu2");
    scan_values = grid_from_config(c, "scan");
  }
  auto point = [&](double v) {
    return analytic_point(c, scan_param ? std::optional(std::pair(*scan_param, v)) : std::nullopt);
  };
  auto lead = [&](std::ostream& os, double v) {
    if (scan_param) os << format_double(v) << ',';
  };
  auto head = [&](std::ostream& os) {
    if (scan_param) os << *scan_param << ',';
  };
  const std::string file = "analytic_" + q + ".csv";

  if (q == "error-probs") {
    point(scan_values.front());
    c.reject_unused({"manifest"});
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "a1,a2,b,l1,l2,alpha1,alpha2\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        const auto e = error_probs_continuous(ap.p, ap.th);
        lead(os, v);
        os << format_double(ap.p.a1) << ',' << format_double(ap.p.a2) << ',' << format_double(ap.p.b)
           << ',' << format_double(ap.th.l1) << ',' << format_double(ap.th.l2) << ','
           << format_double(e.alpha1) << ',' << format_double(e.alpha2) << '\n';
      }
    });
  } else if (q == "regime") {
    point(scan_values.front());
    c.reject_unused({"manifest"});
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "ratio_h1,ratio_h2,satisfied\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        const auto r = regime_ratios(ap.p, ap.th);
        lead(os, v);
        os << format_double(r.h1) << ',' << format_double(r.h2) << ','
           << (std::min(r.h1, r.h2) >= min_ratio ? 1 : 0) << '\n';
      }
    });
  } else if (q == "density") {
    const auto t_grid = grid_from_config(c, "analytic", "t_");
    const auto ap0 = point(scan_values.front());
    c.reject_unused({"manifest"});
    check_regime(ap0.p, ap0.th, ropt);
    std::size_t clamped = 0;
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "t,d1h1,d1h2,d2h1,d2h2\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        check_regime(ap.p, ap.th, ropt);
        for (double t : t_grid) {
          lead(os, v);
          os << format_double(t);
          for (Decision d : kDecisions)
            for (Hypothesis h : kHypotheses) {
              const auto dv = decision_time_density_checked(t, d, h, ap.p, ap.th, ropt);
              clamped += dv.clamped ? 1 : 0;
              os << ',' << format_double(dv.value);
            }
          os << '\n';
        }
      }
    });
    if (clamped > 0)
      ctx.warn() << "warning: " << clamped << " density evaluations had a negative bracket term "
                 << "and were clamped to 0\n";
  } else if (q == "mean-times") {
    point(scan_values.front());
    c.reject_unused({"manifest"});
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "d1h1,d1h2,d2h1,d2h2,wald_reference,gap_d1h1\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        lead(os, v);
        if (!ap.obs) throw ConfigError("mean-times needs [model] parameters for the Wald reference");
        const auto m = mean_decision_times(ap.p, ap.th, *ap.obs, ropt);
        os << format_double(m.d1h1) << ',' << format_double(m.d1h2) << ',' << format_double(m.d2h1)
           << ',' << format_double(m.d2h2) << ',' << format_double(m.wald_reference) << ','
           << format_double(m.d1h1 - m.wald_reference) << '\n';
      }
    });
  } else if (q == "mi-continuous") {
    point(scan_values.front());
    c.reject_unused({"manifest"});
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "mi_bits\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        lead(os, v);
        os << format_double(mutual_info_continuous(ap.p, ap.th.l1)) << '\n';
      }
    });
  } else if (q == "mi-discretized") {
    const auto tr = grid_from_config(c, "analytic", "t_r_");
    point(scan_values.front());
    c.reject_unused({"manifest"});
    ctx.emit(file, [&](std::ostream& os) {
      head(os);
      os << "t_r,mi_bits,mi_continuous_bits\n";
      for (double v : scan_values) {
        const auto ap = point(v);
        const double cont = mutual_info_continuous(ap.p, ap.th.l1);
        for (double t : tr) {
          lead(os, v);
          os << format_double(t) << ',' << format_double(mutual_info_discretized(ap.p, ap.th.l1, t))
             << ',' << format_double(cont) << '\n';
        }
      }
    });
  } else {
    throw ConfigError(c.source() + ": analytic.quantity must be one of error-probs, regime, "
                                   "density, mean-times, mi-continuous, mi-discretized; got '" + q + "'");
  }
  ctx.log() << "wrote " << (ctx.out_dir / file).string() << '\n';
}

// --- oracle -------------------------------------------------------------------------------

inline void cmd_oracle(const Config& c, Context& ctx) {
  const LatticeBernoulliModel m{c.require_double("oracle", "p"),
                                static_cast<int>(c.require_uint("oracle", "m1")),
                                static_cast<int>(c.require_uint("oracle", "m2"))};
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.source() + ": [oracle] " + e.what());
  }
  const double tail = c.get_double("oracle", "tail", 1e-12);
  const double tol = c.get_double("oracle", "tolerance", 1e-12);
  const auto mc = static_cast<std::size_t>(c.get_uint("oracle", "mc_trials", 0));
  const auto seed = seed_of(c);
  const auto threads = threads_of(c);
  c.reject_unused({"manifest"});
  const ExactLaw law = enumerate_exact_law_until(m, tail);
  ctx.emit("exact_law.csv", [&](std::ostream& os) { write_exact_law_csv(os, law); });
  const auto fr = verify_fluctuation_relation(law, std::max(tol, tail));
  ctx.log() << "k_max = " << law.k_max << '\n';
  ctx.log() << std::setprecision(12) << "P(D=1|H=1) = "
            << static_cast<double>(law.decision_probability(Hypothesis::H1, Decision::D1))
            << ", P(D=1|H=2) = "
            << static_cast<double>(law.decision_probability(Hypothesis::H2, Decision::D1)) << '\n';
  ctx.log() << "fluctuation relation " << (fr.holds ? "holds" : "FAILS")
            << ": max deviation = " << fr.max_deviation
            << ", ratio deviation = " << fr.ratio_deviation << '\n';
  if (m.m1 == m.m2) {
    const auto sym = verify_decision_symmetry(law, std::max(tol, tail));
    ctx.log() << "decision symmetry " << (sym.holds ? "holds" : "FAILS")
              << ": max deviation = " << sym.max_deviation << '\n';
  }
  if (mc > 0) {
    ExperimentConfig e{LatticeDevice{m, law.k_max}, 0.5, mc, seed, true, threads};
    const ExperimentResult r = run_experiment(e);
    double tv = 0.0;
    for (Hypothesis h : kHypotheses) {
      std::vector<double> emp(2 * law.k_max, 0.0);
      double n = 0;
      for (const auto& rec : r.records) {
        if (rec.hypothesis != h) continue;
        emp[index_of(rec.decision) * law.k_max + static_cast<std::size_t>(rec.time) - 1] += 1;
        n += 1;
      }
      double d = 0.0;
      for (Decision dd : kDecisions)
        for (std::size_t k = 1; k <= law.k_max; ++k)
          d += std::abs(emp[index_of(dd) * law.k_max + k - 1] / n -
                        static_cast<double>(law.probability(h, dd, k)));
      tv = std::max(tv, 0.5 * d);
    }
    ctx.log() << "Monte Carlo (" << mc << " trials): max TV distance to exact law = " << tv << '\n';
  }
}

}  // namespace seqaudit::cli
