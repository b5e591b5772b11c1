#pragma once

// Two-sample tests on decision times and plug-in information estimates over
// (H, D, T) tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "seqaudit/core.hpp"

namespace seqaudit {

/// Bin edges e_0 < ... < e_{m-1}, giving bins (-inf, e_0), [e_0, e_1), ...,
/// [e_{m-1}, inf). Empty edges mean "discrete-native": every distinct value
/// is its own category.
struct Binning {
  std::vector<double> edges;
  double merge_floor = 5.0;

  bool native() const noexcept { return edges.empty(); }

  std::size_t bin_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                                    edges.begin());
  }
  std::size_t bin_count() const noexcept { return edges.size() + 1; }

  static Binning discrete_native(double merge_floor = 5.0) { return {{}, merge_floor}; }

  static Binning from_edges(std::vector<double> edges, double merge_floor = 5.0) {
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i - 1] < edges[i]))
        throw std::invalid_argument("bin edges must be strictly increasing");
    return {std::move(edges), merge_floor};
  }
};

/// Equal-mass bins: interior edges at the k/n_bins sample quantiles,
/// duplicates dropped so edges stay strictly increasing.
inline Binning quantile_binning(std::span<const double> values, std::size_t n_bins) {
  if (n_bins < 2) throw std::invalid_argument("quantile binning needs at least 2 bins");
  if (values.empty()) throw PreconditionError("quantile binning of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (std::size_t k = 1; k < n_bins; ++k) {
    const std::size_t idx = k * sorted.size() / n_bins;
    const double e = sorted[std::min(idx, sorted.size() - 1)];
    if (e > sorted.front() && (edges.empty() || e > edges.back())) edges.push_back(e);
  }
  return Binning::from_edges(std::move(edges));
}

enum class TestMethod { KS2, CHI2 };

inline const char* to_string(TestMethod m) { return m == TestMethod::KS2 ? "KS2" : "CHI2"; }

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TestMethod method = TestMethod::KS2;
  std::optional<Binning> bins;  // final (merged) bins for CHI2
  int dof = 0;
  std::vector<std::string> warnings;

  bool rejects(double level) const noexcept { return p_value < level; }
};

// --- Kolmogorov-Smirnov --------------------------------------------------------

/// Survival function of the Kolmogorov distribution, Q(x) = P(K > x).
inline double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Dual (Jacobi theta) form converges fast for small x.
    const double v = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double k = 2.0 * j - 1.0;
      cdf += std::exp(k * k * v);
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int j = 1; j <= 20; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    q += (j % 2 == 1 ? 2.0 : -2.0) * term;
  }
  return std::clamp(q, 0.0, 1.0);
}

inline TestReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  std::size_t distinct = 0;
  while (i < x.size() || j < y.size()) {
    const double v = (j >= y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    ++distinct;
    sup = std::max(sup, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  TestReport r;
  r.method = TestMethod::KS2;
  r.n1 = x.size();
  r.n2 = y.size();
  r.statistic = sup;
  const double ne = n1 * n2 / (n1 + n2);
  r.p_value = kolmogorov_survival(std::sqrt(ne) * sup);
  const double tie_fraction = 1.0 - static_cast<double>(distinct) / (n1 + n2);
  if (tie_fraction > 0.01)
    r.warnings.push_back("tie fraction " + std::to_string(tie_fraction) +
                         " exceeds 1%; discrete times should use the chi-square test");
  return r;
}

// --- chi-square homogeneity ------------------------------------------------------

namespace detail {

// Sorted category keys and the per-sample counts of each.
struct CategoryCounts {
  std::vector<double> lower;  // smallest value (or lower edge) of each category
  std::vector<double> a;
  std::vector<double> b;
};

inline CategoryCounts count_categories(std::span<const double> a, std::span<const double> b,
                                       const Binning& binning) {
  CategoryCounts out;
  if (binning.native()) {
    std::map<double, std::pair<double, double>> counts;
    for (double x : a) counts[x].first += 1.0;
    for (double x : b) counts[x].second += 1.0;
    for (const auto& [v, c] : counts) {
      out.lower.push_back(v);
      out.a.push_back(c.first);
      out.b.push_back(c.second);
    }
    return out;
  }
  const std::size_t m = binning.bin_count();
  std::vector<double> ca(m, 0.0), cb(m, 0.0);
  for (double x : a) ca[binning.bin_of(x)] += 1.0;
  for (double x : b) cb[binning.bin_of(x)] += 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (ca[k] + cb[k] == 0.0) continue;
    out.lower.push_back(k == 0 ? -std::numeric_limits<double>::infinity() : binning.edges[k - 1]);
    out.a.push_back(ca[k]);
    out.b.push_back(cb[k]);
  }
  return out;
}

}  // namespace detail

/// Two-sample chi-square homogeneity test. Categories are merged greedily
/// left to right until each merged bin's expected count under pooling is at
/// least merge_floor for both samples; a short remainder joins the last bin.
inline TestReport chi2_two_sample(std::span<const double> a, std::span<const double> b,
                                  const Binning& binning = Binning::discrete_native()) {
  if (a.empty() || b.empty()) throw PreconditionError("chi-square test needs two nonempty samples");
  const detail::CategoryCounts cats = detail::count_categories(a, b, binning);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  const double smaller = std::min(na, nb);

  std::vector<double> lower, ca, cb;
  double acc_a = 0.0, acc_b = 0.0, acc_lower = 0.0;
  bool open = false;
  for (std::size_t k = 0; k < cats.lower.size(); ++k) {
    if (!open) acc_lower = cats.lower[k];
    open = true;
    acc_a += cats.a[k];
    acc_b += cats.b[k];
    if ((acc_a + acc_b) * smaller / n >= binning.merge_floor) {
      lower.push_back(acc_lower);
      ca.push_back(acc_a);
      cb.push_back(acc_b);
      acc_a = acc_b = 0.0;
      open = false;
    }
  }
  if (open) {
    if (ca.empty()) throw PreconditionError("chi-square binning leaves fewer than 2 bins");
    ca.back() += acc_a;
    cb.back() += acc_b;
  }
  if (ca.size() < 2) throw PreconditionError("chi-square binning leaves fewer than 2 bins");

  double stat = 0.0;
  for (std::size_t k = 0; k < ca.size(); ++k) {
    const double pooled = (ca[k] + cb[k]) / n;
    const double ea = na * pooled;
    const double eb = nb * pooled;
    stat += (ca[k] - ea) * (ca[k] - ea) / ea + (cb[k] - eb) * (cb[k] - eb) / eb;
  }
  TestReport r;
  r.method = TestMethod::CHI2;
  r.n1 = a.size();
  r.n2 = b.size();
  r.statistic = stat;
  r.dof = static_cast<int>(ca.size()) - 1;
  r.p_value = stat <= 0.0 ? 1.0 : boost::math::gamma_q(0.5 * r.dof, 0.5 * stat);
  r.bins = Binning::from_edges(std::vector<double>(lower.begin() + 1, lower.end()),
                               binning.merge_floor);
  return r;
}

/// Picks the test matching the time representation.
inline TestReport two_sample_test(std::span<const double> a, std::span<const double> b,
                                  TimeKind kind, const Binning& binning = Binning::discrete_native()) {
  return kind == TimeKind::Continuous ? ks_two_sample(a, b) : chi2_two_sample(a, b, binning);
}

// --- plug-in information estimates ----------------------------------------------

struct MIEstimate {
  double value_bits = 0.0;
  std::size_t n = 0;
  std::optional<Binning> binning;  // nullopt: discrete-native categories
  std::size_t cells = 0;           // occupied cells of the joint table
  double bias_bits = 0.0;          // first-order plug-in bias estimate
};

namespace detail {

// joint * log2(joint * num / den) with 0 log 0 = 0. Extended precision: tables
// with one cell per record sum ~1e5 terms.
inline long double plogp_ratio(long double joint, long double num, long double den) {
  if (joint <= 0.0L) return 0.0L;
  return joint * std::log2(joint * num / den);
}

}  // namespace detail

/// Joint frequency table over (H, D, time-category) built in one pass.
class PluginTable {
 public:
  PluginTable(std::span<const TrialRecord> records, const Binning& binning) : binning_(binning) {
    if (binning.native()) {
      std::vector<double> values;
      values.reserve(records.size());
      for (const auto& r : records) values.push_back(r.time);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      categories_ = values.size();
      for (const auto& r : records) add(r, static_cast<std::size_t>(
                                              std::lower_bound(values.begin(), values.end(), r.time) -
                                              values.begin()));
    } else {
      categories_ = binning.bin_count();
      for (const auto& r : records) add(r, binning.bin_of(r.time));
    }
    n_ = static_cast<double>(records.size());
  }

  double n() const noexcept { return n_; }

  /// I(H; D, T) in bits.
  double mi_h_dt() const {
    double hd[2][2] = {};
    std::map<std::pair<int, std::size_t>, double> dt;
    double h[2] = {};
    for (const auto& [key, c] : counts_) {
      const auto [hi, di, ti] = key;
      dt[{di, ti}] += c;
      h[hi] += c;
      hd[hi][di] += c;
    }
    const long double N = n_;
    long double s = 0.0L;
    for (const auto& [key, c] : counts_) {
      const auto [hi, di, ti] = key;
      s += detail::plogp_ratio(c / N, 1.0L, (h[hi] / N) * (dt[{di, ti}] / N));
    }
    return static_cast<double>(s);
  }

  /// I(H; D) in bits.
  double mi_h_d() const {
    double hd[2][2] = {}, h[2] = {}, d[2] = {};
    for (const auto& [key, c] : counts_) {
      const auto [hi, di, ti] = key;
      hd[hi][di] += c;
      h[hi] += c;
      d[di] += c;
    }
    const long double N = n_;
    long double s = 0.0L;
    for (int hi = 0; hi < 2; ++hi)
      for (int di = 0; di < 2; ++di)
        s += detail::plogp_ratio(hd[hi][di] / N, 1.0L, (h[hi] / N) * (d[di] / N));
    return static_cast<double>(s);
  }

  /// I(H; T | D) in bits, evaluated directly from the conditional table.
  double cmi_h_t_given_d() const {
    double hd[2][2] = {}, d[2] = {};
    std::map<std::pair<int, std::size_t>, double> dt;
    for (const auto& [key, c] : counts_) {
      const auto [hi, di, ti] = key;
      hd[hi][di] += c;
      d[di] += c;
      dt[{di, ti}] += c;
    }
    const long double N = n_;
    long double s = 0.0L;
    for (const auto& [key, c] : counts_) {
      const auto [hi, di, ti] = key;
      s += detail::plogp_ratio(c / N, d[di] / N, (hd[hi][di] / N) * (dt[{di, ti}] / N));
    }
    return static_cast<double>(s);
  }

  std::size_t occupied_cells() const noexcept { return counts_.size(); }

  /// Miller-Madow style first-order bias of the conditional estimate:
  /// sum over D of (|H_d| - 1)(|T_d| - 1) / (2 N ln 2).
  double cmi_bias() const {
    double bias = 0.0;
    for (int di = 0; di < 2; ++di) {
      std::map<std::size_t, int> t_levels;
      int h_levels[2] = {};
      for (const auto& [key, c] : counts_) {
        const auto [hi, dd, ti] = key;
        if (dd != di) continue;
        t_levels[ti] = 1;
        h_levels[hi] = 1;
      }
      const double nh = h_levels[0] + h_levels[1];
      const double nt = static_cast<double>(t_levels.size());
      if (nh > 1 && nt > 1) bias += (nh - 1.0) * (nt - 1.0);
    }
    return bias / (2.0 * n_ * std::numbers::ln2);
  }

  const Binning& binning() const noexcept { return binning_; }

 private:
  void add(const TrialRecord& r, std::size_t category) {
    counts_[{static_cast<int>(index_of(r.hypothesis)), static_cast<int>(index_of(r.decision)),
             category}] += 1.0;
  }

  Binning binning_;
  std::size_t categories_ = 0;
  double n_ = 0.0;
  std::map<std::tuple<int, int, std::size_t>, double> counts_;
};

/// Plug-in estimate of I(H; T | D) in bits, clipped at zero.
inline MIEstimate conditional_mi_plugin(std::span<const TrialRecord> records,
                                        const Binning& binning = Binning::discrete_native()) {
  if (records.empty()) throw PreconditionError("mutual information of an empty record set");
  const PluginTable table(records, binning);
  MIEstimate e;
  e.value_bits = std::max(0.0, table.cmi_h_t_given_d());
  e.n = records.size();
  if (!binning.native()) e.binning = binning;
  e.cells = table.occupied_cells();
  e.bias_bits = table.cmi_bias();
  return e;
}

/// Plug-in I(X; Y) in bits for integer labels X and binned values Y.
inline MIEstimate mi_plugin(std::span<const int> labels, std::span<const double> values,
                            const Binning& binning = Binning::discrete_native()) {
  if (labels.size() != values.size())
    throw std::invalid_argument("labels and values must have equal length");
  if (labels.empty()) throw PreconditionError("mutual information of an empty sample");
  std::vector<double> keys;
  if (binning.native()) {
    keys.assign(values.begin(), values.end());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  }
  auto category = [&](double v) -> std::size_t {
    if (binning.native())
      return static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), v) - keys.begin());
    return binning.bin_of(v);
  };
  std::map<std::pair<int, std::size_t>, double> joint;
  std::map<int, double> px;
  std::map<std::size_t, double> py;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t c = category(values[i]);
    joint[{labels[i], c}] += 1.0;
    px[labels[i]] += 1.0;
    py[c] += 1.0;
  }
  const long double N = static_cast<long double>(labels.size());
  long double s = 0.0L;
  for (const auto& [key, c] : joint)
    s += detail::plogp_ratio(c / N, 1.0L, (px[key.first] / N) * (py[key.second] / N));
  MIEstimate e;
  e.value_bits = std::max(0.0, static_cast<double>(s));
  e.n = labels.size();
  if (!binning.native()) e.binning = binning;
  e.cells = joint.size();
  e.bias_bits = (static_cast<double>(px.size()) - 1.0) * (static_cast<double>(py.size()) - 1.0) /
                (2.0 * static_cast<double>(N) * std::numbers::ln2);
  return e;
}

// --- optimality tests ------------------------------------------------------------

struct KnownHypothesisReport {
  TestReport decision1;  // A_{1,1} vs A_{2,1}
  TestReport decision2;  // A_{1,2} vs A_{2,2}
};

/// Compares decision-time laws across hypotheses for each decision; under
/// an optimal device the two samples share one distribution.
inline KnownHypothesisReport optimality_test_known_h(
    std::span<const TrialRecord> records, TimeKind kind,
    const Binning& binning = Binning::discrete_native()) {
  const SampleSets sets = partition_records(records);
  for (Hypothesis h : kHypotheses)
    for (Decision d : kDecisions)
      if (sets.cell(h, d).empty())
        throw PreconditionError("decision cell (H=" + std::to_string(to_int(h)) +
                                ", D=" + std::to_string(to_int(d)) + ") is empty");
  return {two_sample_test(sets.a11(), sets.a21(), kind, binning),
          two_sample_test(sets.a12(), sets.a22(), kind, binning)};
}

/// Compares {T | D=1} against {T | D=2}. Valid only when the caller knows the
/// observation law has the sign-flip symmetry and the thresholds are
/// symmetric.
inline TestReport optimality_test_unknown_h(std::span<const TrialRecord> records, TimeKind kind,
                                            const Binning& binning = Binning::discrete_native()) {
  const auto by_d = partition_by_decision(records);
  if (by_d[0].empty() || by_d[1].empty())
    throw PreconditionError("unknown-hypothesis test needs both decisions present");
  return two_sample_test(by_d[0], by_d[1], kind, binning);
}

}  // namespace seqaudit
