#pragma once

// Flat key=value configuration with [section] headers. '#' starts a
// comment. Every key a command does not consume is reported as an error, so
// typos never pass silently.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seqaudit/core.hpp"
#include "seqaudit/io.hpp"
#include "seqaudit/simulate.hpp"

namespace seqaudit {

class Config {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;  // 0 for values set programmatically
  };

  static Config parse(std::istream& is, std::string source = "<config>") {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string raw;
    std::string section;
    std::size_t n = 0;
    while (std::getline(is, raw)) {
      ++n;
      std::string_view line = raw;
      if (const auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') cfg.fail(n, "unterminated section header");
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (section.empty()) cfg.fail(n, "empty section name");
        cfg.order_.push_back(section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) cfg.fail(n, "expected key = value");
      if (section.empty()) cfg.fail(n, "key outside of any [section]");
      const std::string key(detail::trim(line.substr(0, eq)));
      if (key.empty()) cfg.fail(n, "empty key");
      auto& sec = cfg.sections_[section];
      if (sec.count(key)) cfg.fail(n, "duplicate key '" + section + "." + key + "'");
      sec[key] = {std::string(detail::trim(line.substr(eq + 1))), n};
    }
    return cfg;
  }

  static Config parse_string(const std::string& text, std::string source = "<config>") {
    std::istringstream is(text);
    return parse(is, std::move(source));
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in, path);
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = {value, 0};
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    used_.insert(section + "." + key);
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto e = s->second.find(key);
    if (e == s->second.end()) return std::nullopt;
    resolved_[section][key] = e->second.value;
    return e->second.value;
  }

  std::string require(const std::string& section, const std::string& key) const {
    auto v = get(section, key);
    if (!v) throw ConfigError(source_ + ": missing required key '" + section + "." + key + "'");
    return *v;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? require_double(section, key)
                             : (mark(section, key, format_double(fallback)), fallback);
  }

  double require_double(const std::string& section, const std::string& key) const {
    const std::string v = require(section, key);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || v.empty())
      fail_key(section, key, "expected a number, got '" + v + "'");
    return out;
  }

  std::uint64_t get_uint(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const {
    return has(section, key) ? require_uint(section, key)
                             : (mark(section, key, std::to_string(fallback)), fallback);
  }

  std::uint64_t require_uint(const std::string& section, const std::string& key) const {
    const std::string v = require(section, key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || v.empty()) {
      // Accept integral values written in scientific form, e.g. 1e6.
      double d = 0.0;
      const auto r2 = std::from_chars(v.data(), v.data() + v.size(), d);
      if (r2.ec == std::errc{} && r2.ptr == v.data() + v.size() && d >= 0.0 && d < 1.8e19 &&
          d == static_cast<double>(static_cast<std::uint64_t>(d)))
        return static_cast<std::uint64_t>(d);
      fail_key(section, key, "expected a nonnegative integer, got '" + v + "'");
    }
    return out;
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = get(section, key);
    if (!v) return mark(section, key, fallback ? "true" : "false"), fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail_key(section, key, "expected true/false, got '" + *v + "'");
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const auto v = get(section, key);
    if (!v) return mark(section, key, fallback), fallback;
    return *v;
  }

  /// Throws on the first key that was never read.
  void reject_unused(const std::set<std::string>& ignored_sections = {}) const {
    for (const auto& [section, keys] : sections_) {
      if (ignored_sections.count(section)) continue;
      for (const auto& [key, entry] : keys)
        if (!used_.count(section + "." + key))
          throw ConfigError(where(entry.line) + "unknown key '" + section + "." + key + "'");
    }
  }

  /// Canonical text form; sections and keys in sorted order.
  void write(std::ostream& os, const std::set<std::string>& skip_sections = {}) const {
    bool first = true;
    for (const auto& [section, keys] : sections_) {
      if (skip_sections.count(section)) continue;
      if (!first) os << '\n';
      first = false;
      os << '[' << section << "]\n";
      for (const auto& [key, entry] : keys) os << key << " = " << entry.value << '\n';
    }
  }

  std::string to_string(const std::set<std::string>& skip_sections = {}) const {
    std::ostringstream os;
    write(os, skip_sections);
    return os.str();
  }

  /// Every value a command read, defaults included, as a config that
  /// replays the same run.
  Config resolved() const {
    Config out;
    out.source_ = source_;
    for (const auto& [section, keys] : resolved_)
      for (const auto& [key, value] : keys) out.set(section, key, value);
    return out;
  }

  const std::string& source() const noexcept { return source_; }

 private:
  void mark(const std::string& section, const std::string& key, const std::string& value) const {
    used_.insert(section + "." + key);
    resolved_[section][key] = value;
  }

  std::string where(std::size_t line) const {
    return line == 0 ? source_ + ": " : source_ + ":" + std::to_string(line) + ": ";
  }

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(where(line) + msg);
  }

  [[noreturn]] void fail_key(const std::string& section, const std::string& key,
                             const std::string& msg) const {
    std::size_t line = 0;
    if (auto s = sections_.find(section); s != sections_.end())
      if (auto e = s->second.find(key); e != s->second.end()) line = e->second.line;
    throw ConfigError(where(line) + section + "." + key + ": " + msg);
  }

  std::string source_ = "<config>";
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::vector<std::string> order_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::map<std::string, std::string>> resolved_;
};

// --- experiment construction ----------------------------------------------------

namespace detail {

inline Thresholds config_thresholds(const Config& c) {
  const bool by_alpha = c.has("thresholds", "alpha1") || c.has("thresholds", "alpha2");
  const bool by_level = c.has("thresholds", "l1") || c.has("thresholds", "l2");
  if (by_alpha && by_level)
    throw ConfigError(c.source() + ": give [thresholds] either l1/l2 or alpha1/alpha2, not both");
  try {
    if (by_alpha)
      return thresholds_from_alphas(
          {c.require_double("thresholds", "alpha1"), c.require_double("thresholds", "alpha2")});
    return Thresholds::make(c.require_double("thresholds", "l1"),
                            c.require_double("thresholds", "l2"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.source() + ": [thresholds] " + e.what());
  }
}

// The belief defaults to the true model, key by key.
inline double belief(const Config& c, const std::string& key, double model_value) {
  return c.get_double("device", key, model_value);
}

}  // namespace detail

inline DeviceSpec device_from_config(const Config& c) {
  const std::string kind = c.require("model", "kind");
  const auto max_steps =
      static_cast<std::size_t>(c.get_uint("device", "max_steps", 1'000'000));
  if (kind == "iid") {
    GaussianIIDModel m{c.require_double("model", "mu1"), c.require_double("model", "mu2"),
                       c.require_double("model", "sigma1"), c.require_double("model", "sigma2")};
    GaussianIIDModel b{detail::belief(c, "mu1", m.mu1), detail::belief(c, "mu2", m.mu2),
                       detail::belief(c, "sigma1", m.sigma1), detail::belief(c, "sigma2", m.sigma2)};
    return IidDevice{m, b, detail::config_thresholds(c), max_steps};
  }
  if (kind == "markov") {
    MarkovGaussianModel m{c.require_double("model", "v1"),     c.require_double("model", "v2"),
                          c.require_double("model", "w1"),     c.require_double("model", "w2"),
                          c.require_double("model", "sigma1"), c.require_double("model", "sigma2")};
    MarkovGaussianModel b{detail::belief(c, "v1", m.v1),         detail::belief(c, "v2", m.v2),
                          detail::belief(c, "w1", m.w1),         detail::belief(c, "w2", m.w2),
                          detail::belief(c, "sigma1", m.sigma1), detail::belief(c, "sigma2", m.sigma2)};
    return MarkovDevice{m, b, detail::config_thresholds(c), max_steps};
  }
  if (kind == "lattice") {
    LatticeBernoulliModel m{c.require_double("model", "p"),
                            static_cast<int>(c.require_uint("model", "m1")),
                            static_cast<int>(c.require_uint("model", "m2"))};
    return LatticeDevice{m, max_steps};
  }
  if (kind == "continuous" || kind == "asymptotic") {
    DriftDiffusionModel m{c.require_double("model", "mu1"), c.require_double("model", "mu2"),
                          c.require_double("model", "sigma")};
    DriftDiffusionModel b{detail::belief(c, "mu1", m.mu1), detail::belief(c, "mu2", m.mu2),
                          detail::belief(c, "sigma", m.sigma)};
    const Thresholds th = detail::config_thresholds(c);
    if (kind == "asymptotic") return AsymptoticDevice{m, b, th};
    return ContinuousDevice{m, b, th, c.get_double("device", "dt", 0.01),
                            c.get_double("device", "t_max", 1e6)};
  }
  throw ConfigError(c.source() + ": model.kind must be one of iid, markov, lattice, continuous, "
                                 "asymptotic; got '" + kind + "'");
}

inline ExperimentConfig experiment_from_config(const Config& c) {
  ExperimentConfig e{device_from_config(c)};
  e.trials = static_cast<std::size_t>(c.require_uint("experiment", "trials"));
  e.seed = c.get_uint("experiment", "seed", 1);
  e.p1 = c.get_double("experiment", "p1", 0.5);
  e.stratified = c.get_bool("experiment", "stratified", false);
  e.threads = static_cast<unsigned>(c.get_uint("experiment", "threads", 1));
  try {
    e.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(c.source() + ": " + err.what());
  }
  return e;
}

}  // namespace seqaudit
