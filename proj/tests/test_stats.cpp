#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "seqaudit/analytic.hpp"
#include "seqaudit/oracle.hpp"
#include "seqaudit/simulate.hpp"
#include "seqaudit/stats.hpp"

using namespace seqaudit;

namespace {

TrialRecord rec(int h, int d, double t) {
  return {hypothesis_from_int(h), decision_from_int(d), t, std::nullopt};
}

// Draws from a pmf over k = 1..K by inversion.
double draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  return static_cast<double>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin() + 1);
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
  std::vector<double> c(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), c.begin());
  return c;
}

}  // namespace

TEST(KS, HandValues) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.2700, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 1e-4);
  // Both series agree across the switch point.
  EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-9), kolmogorov_survival(1.18 + 1e-9), 1e-8);
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b).statistic, 1.0);
  const auto same = ks_two_sample(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  EXPECT_THROW(ks_two_sample(a, {}), PreconditionError);
}

TEST(KS, WarnsOnTies) {
  const std::vector<double> a(100, 1.0), b(100, 2.0);
  EXPECT_FALSE(ks_two_sample(a, b).warnings.empty());
}

TEST(KS, NullCalibrationOnInverseGaussian) {
  Rng rng = stream_for(1, 0);
  const int reps = 500, n = 10000;
  std::array<int, 3> rej{};
  const std::array<double, 3> levels{0.01, 0.05, 0.1};
  std::vector<double> x(n), y(n);
  for (int r = 0; r < reps; ++r) {
    for (auto& v : x) v = sample_inverse_gaussian(200, 400, rng);
    for (auto& v : y) v = sample_inverse_gaussian(200, 400, rng);
    const double p = ks_two_sample(x, y).p_value;
    for (int i = 0; i < 3; ++i) rej[i] += p < levels[i];
  }
  for (int i = 0; i < 3; ++i) {
    EXPECT_LE(static_cast<double>(rej[i]) / reps, levels[i] + 0.02) << levels[i];
    if (i == 1) {
      EXPECT_NEAR(static_cast<double>(rej[i]) / reps, 0.05, 0.02);
    }
  }
}

TEST(Chi2, HandValues) {
  const std::vector<double> a(50, 1.0), b(50, 2.0);
  const auto r = chi2_two_sample(a, b);
  EXPECT_NEAR(r.statistic, 100.0, 1e-12);
  EXPECT_EQ(r.dof, 1);
  EXPECT_NEAR(r.p_value / std::erfc(std::sqrt(50.0)), 1.0, 1e-10);
  EXPECT_NEAR(r.p_value, 1.5e-23, 0.05e-23);
  std::vector<double> c;
  for (int i = 0; i < 40; ++i) c.push_back(i % 4);
  const auto same = chi2_two_sample(c, c);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
}

TEST(Chi2, MergesSparseCategories) {
  // Tail categories with tiny counts are pooled until expected counts reach the floor.
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(1), b.push_back(1);
  for (int k = 2; k < 30; ++k) a.push_back(k), b.push_back(k + 0.5);
  const auto r = chi2_two_sample(a, b);
  ASSERT_TRUE(r.bins.has_value());
  EXPECT_LE(r.dof, 6);
  EXPECT_GE(r.dof, 1);
  const std::vector<double> one(10, 3.0);
  EXPECT_THROW(chi2_two_sample(one, one), PreconditionError);
}

TEST(Chi2, NullCalibrationOnLatticeLaw) {
  const ExactLaw law = enumerate_exact_law_until({0.8, 2, 2}, 1e-14);
  const auto c1 = cumulative(law.conditional_pmf(Hypothesis::H1, Decision::D1));
  Rng rng = stream_for(2, 0);
  const int reps = 500, n = 2000;
  std::array<int, 3> rej{};
  const std::array<double, 3> levels{0.01, 0.05, 0.1};
  std::vector<double> x(n), y(n);
  for (int r = 0; r < reps; ++r) {
    for (auto& v : x) v = draw(c1, rng);
    for (auto& v : y) v = draw(c1, rng);
    const double p = chi2_two_sample(x, y).p_value;
    for (int i = 0; i < 3; ++i) rej[i] += p < levels[i];
  }
  for (int i = 0; i < 3; ++i) EXPECT_LE(static_cast<double>(rej[i]) / reps, levels[i] + 0.02);
  EXPECT_NEAR(static_cast<double>(rej[1]) / reps, 0.05, 0.02);
}

TEST(PluginMI, HandValues) {
  std::vector<TrialRecord> r;
  for (int i = 0; i < 50; ++i) r.push_back(rec(1, 1, 10)), r.push_back(rec(2, 1, 20));
  EXPECT_NEAR(conditional_mi_plugin(r).value_bits, 1.0, 1e-12);
  std::vector<TrialRecord> flat;
  for (int i = 0; i < 40; ++i) flat.push_back(rec(1 + i % 2, 1 + (i / 2) % 2, 7));
  EXPECT_EQ(conditional_mi_plugin(flat).value_bits, 0.0);
  const std::vector<int> labels{1, 1, 2, 2, 1, 2, 1, 2};
  const std::vector<double> same{1, 1, 2, 2, 1, 2, 1, 2};
  EXPECT_NEAR(mi_plugin(labels, same).value_bits, 1.0, 1e-12);
  const std::vector<double> indep{1, 2, 1, 2, 1, 2, 2, 1};  // population product table
  EXPECT_NEAR(mi_plugin(labels, indep).value_bits, 0.0, 1e-15);
  EXPECT_THROW(conditional_mi_plugin({}), PreconditionError);
}

TEST(PluginMI, ChainRuleOnGeneratedData) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    ExperimentConfig c{IidDevice{{0, 1, 5, 10}, {0, seed * 0.7, 5, 10}, Thresholds::make(4, -2), 50}, 0.5,
                       20000, seed};
    const ExperimentResult r = run_experiment(c);
    for (const Binning& b : {Binning::discrete_native(), Binning::from_edges({2, 4, 8, 16})}) {
      const PluginTable t(r.records, b);
      EXPECT_NEAR(t.mi_h_dt(), t.mi_h_d() + t.cmi_h_t_given_d(), 1e-12);
      EXPECT_GE(t.mi_h_dt(), 0.0);
      EXPECT_GE(t.cmi_h_t_given_d(), -1e-15);
    }
  }
}

TEST(PluginMI, SymmetricMatchedTimeCarriesNoDecisionInformation) {
  const GaussianIIDModel m{-0.5, 0.5, 2, 2};
  double prev = 1.0;
  for (std::size_t n : {2000u, 20000u, 200000u}) {
    ExperimentConfig c{IidDevice{m, m, Thresholds::make(3, -3), 100000}, 0.5, n, 4};
    const ExperimentResult r = run_experiment(c);
    std::vector<int> d;
    std::vector<double> t;
    for (const auto& x : r.records) d.push_back(to_int(x.decision)), t.push_back(x.time);
    const MIEstimate e = mi_plugin(d, t);
    EXPECT_LT(e.value_bits, 3 * e.bias_bits + 1e-4);
    EXPECT_LT(e.value_bits, prev);
    prev = e.value_bits;
  }
}

TEST(PluginMI, PopulationTableOfExactLawIsZero) {
  // Evaluated directly on the exact law: I(H; T | D) with equal priors.
  const ExactLaw law = enumerate_exact_law_until({0.8, 2, 2}, 1e-15);
  long double cmi = 0;
  for (Decision d : kDecisions) {
    for (std::size_t k = 1; k <= law.k_max; ++k) {
      const long double p1 = 0.5L * law.probability(Hypothesis::H1, d, k);
      const long double p2 = 0.5L * law.probability(Hypothesis::H2, d, k);
      const long double pk = p1 + p2;
      const long double ph1 = 0.5L * law.decision_probability(Hypothesis::H1, d);
      const long double ph2 = 0.5L * law.decision_probability(Hypothesis::H2, d);
      const long double pd = ph1 + ph2;
      if (p1 > 0) cmi += p1 * std::log2(p1 * pd / (pk * ph1));
      if (p2 > 0) cmi += p2 * std::log2(p2 * pd / (pk * ph2));
    }
  }
  EXPECT_NEAR(static_cast<double>(cmi), 0.0, 1e-12);
}

TEST(Optimality, KnownHypothesisErrorsAndPower) {
  std::vector<TrialRecord> r{rec(1, 1, 3), rec(2, 1, 3), rec(1, 1, 4)};
  EXPECT_THROW(optimality_test_known_h(r, TimeKind::Steps), PreconditionError);
  EXPECT_THROW(optimality_test_unknown_h(r, TimeKind::Steps), PreconditionError);

  ExperimentConfig c{IidDevice{{-2, 1, 5, 10}, {-2, 5, 5, 10}, Thresholds::make(4, -2), 10}, 0.5,
                     100000, 3};
  const auto t = optimality_test_known_h(run_experiment(c).records, TimeKind::Steps);
  EXPECT_LT(std::min(t.decision1.p_value, t.decision2.p_value), 1e-3);
}

TEST(Optimality, MatchedLatticeGivesUniformPValues) {
  const int reps = 200;
  int rej = 0;
  double psum = 0;
  for (int rep = 0; rep < reps; ++rep) {
    ExperimentConfig c{LatticeDevice{{0.8, 2, 2}}, 0.5, 20000, 100 + static_cast<std::uint64_t>(rep)};
    const auto t = optimality_test_known_h(run_experiment(c).records, TimeKind::Steps);
    rej += t.decision1.rejects(0.05);
    psum += t.decision1.p_value;
  }
  EXPECT_LE(static_cast<double>(rej) / reps, 0.05 + 0.04);
  EXPECT_NEAR(psum / reps, 0.5, 0.07);
}

TEST(Optimality, MarkovUnknownHypothesis) {
  const MarkovGaussianModel m{1, -1, -1, -1, 5, 5};
  ExperimentConfig matched{MarkovDevice{m, m, Thresholds::make(4, -4), 100000}, 0.5, 100000, 5};
  const ExperimentResult a = run_experiment(matched);
  const auto e = empirical_error_probs(a);
  EXPECT_NEAR(e.alpha1, 0.014, 0.003);
  EXPECT_NEAR(e.alpha2, 0.014, 0.003);
  EXPECT_GT(optimality_test_unknown_h(a.records, TimeKind::Steps).p_value, 1e-3);

  MarkovGaussianModel wrong = m;
  wrong.w2 = -0.5;
  ExperimentConfig mis{MarkovDevice{m, wrong, Thresholds::make(4, -4), 100000}, 0.5, 100000, 5};
  EXPECT_LT(optimality_test_unknown_h(run_experiment(mis).records, TimeKind::Steps).p_value, 0.01);
}

TEST(Binning, QuantileAndEdges) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 0.0);
  const Binning b = quantile_binning(v, 4);
  EXPECT_EQ(b.bin_count(), 4u);
  EXPECT_EQ(b.bin_of(-5), 0u);
  EXPECT_EQ(b.bin_of(1e9), 3u);
  EXPECT_THROW(Binning::from_edges({1, 1}), std::invalid_argument);
}
