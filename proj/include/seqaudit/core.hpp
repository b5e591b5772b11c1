#pragma once

// Domain types shared by every module: hypotheses, decisions, thresholds,
// trial records and the per-cell partition of decision times.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqaudit {

// Error hierarchy. The CLI maps each kind onto a distinct exit status.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
// A statistical operation was handed data that does not meet its
// precondition (empty decision cell, too few bins, ...).
struct PreconditionError : Error {
  using Error::Error;
};
// Parameters outside the range where a closed form is valid.
struct RegimeError : Error {
  using Error::Error;
};

enum class Hypothesis : std::uint8_t { H1 = 1, H2 = 2 };
enum class Decision : std::uint8_t { D1 = 1, D2 = 2 };

constexpr int to_int(Hypothesis h) noexcept { return static_cast<int>(h); }
constexpr int to_int(Decision d) noexcept { return static_cast<int>(d); }
constexpr std::size_t index_of(Hypothesis h) noexcept { return to_int(h) - 1; }
constexpr std::size_t index_of(Decision d) noexcept { return to_int(d) - 1; }

inline Hypothesis hypothesis_from_int(int v) {
  if (v == 1) return Hypothesis::H1;
  if (v == 2) return Hypothesis::H2;
  throw SchemaError("hypothesis must be 1 or 2, got " + std::to_string(v));
}

inline Decision decision_from_int(int v) {
  if (v == 1) return Decision::D1;
  if (v == 2) return Decision::D2;
  throw SchemaError("decision must be 1 or 2, got " + std::to_string(v));
}

constexpr std::array<Hypothesis, 2> kHypotheses{Hypothesis::H1, Hypothesis::H2};
constexpr std::array<Decision, 2> kDecisions{Decision::D1, Decision::D2};

/// Bounds (l2, l1) on the cumulative log-likelihood ratio, in nats.
struct Thresholds {
  double l1;
  double l2;

  static Thresholds make(double l1, double l2) {
    if (!(l1 > 0.0)) throw std::invalid_argument("threshold l1 must be > 0");
    if (!(l2 < 0.0)) throw std::invalid_argument("threshold l2 must be < 0");
    return {l1, l2};
  }

  bool symmetric(double tol = 1e-12) const noexcept {
    return std::abs(l1 + l2) <= tol * std::max(1.0, std::abs(l1));
  }
};

/// Maximum allowed error probabilities. alpha1 = P(D=1 | H=2),
/// alpha2 = P(D=2 | H=1).
struct ErrorSpec {
  double alpha1;
  double alpha2;

  void validate() const {
    if (!(alpha1 > 0.0 && alpha1 < 0.5))
      throw std::invalid_argument("alpha1 must lie in (0, 0.5)");
    if (!(alpha2 > 0.0 && alpha2 < 0.5))
      throw std::invalid_argument("alpha2 must lie in (0, 0.5)");
  }
};

/// Wald's threshold approximation: exact for continuous paths.
inline Thresholds thresholds_from_alphas(const ErrorSpec& spec) {
  spec.validate();
  // log1p keeps precision for small alphas.
  const double l1 = std::log1p(-spec.alpha2) - std::log(spec.alpha1);
  const double l2 = std::log(spec.alpha2) - std::log1p(-spec.alpha1);
  return Thresholds::make(l1, l2);
}

// Decision times are either integer observation counts or real-valued
// times; the tag travels with every record set.
enum class TimeKind { Steps, Continuous };

inline const char* to_string(TimeKind k) {
  return k == TimeKind::Steps ? "steps" : "continuous";
}

/// One black-box outcome (h, t, d).
struct TrialRecord {
  Hypothesis hypothesis;
  Decision decision;
  double time;
  std::optional<double> terminal_llr;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct RecordSet {
  TimeKind kind = TimeKind::Steps;
  std::vector<TrialRecord> records;
};

/// Decision times split by (hypothesis, decision): cell(r, s) is A_{r,s}.
struct SampleSets {
  std::array<std::array<std::vector<double>, 2>, 2> cells;

  std::vector<double>& cell(Hypothesis h, Decision d) { return cells[index_of(h)][index_of(d)]; }
  const std::vector<double>& cell(Hypothesis h, Decision d) const {
    return cells[index_of(h)][index_of(d)];
  }
  const std::vector<double>& a11() const { return cell(Hypothesis::H1, Decision::D1); }
  const std::vector<double>& a12() const { return cell(Hypothesis::H1, Decision::D2); }
  const std::vector<double>& a21() const { return cell(Hypothesis::H2, Decision::D1); }
  const std::vector<double>& a22() const { return cell(Hypothesis::H2, Decision::D2); }

  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (const auto& row : cells)
      for (const auto& c : row) n += c.size();
    return n;
  }
};

inline SampleSets partition_records(std::span<const TrialRecord> records) {
  SampleSets sets;
  for (const auto& r : records) sets.cell(r.hypothesis, r.decision).push_back(r.time);
  return sets;
}

/// Decision times grouped by decision only (unknown-hypothesis setting).
inline std::array<std::vector<double>, 2> partition_by_decision(
    std::span<const TrialRecord> records) {
  std::array<std::vector<double>, 2> out;
  for (const auto& r : records) out[index_of(r.decision)].push_back(r.time);
  return out;
}

}  // namespace seqaudit
