#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seqaudit/config.hpp"
#include "seqaudit/core.hpp"
#include "seqaudit/io.hpp"
#include "seqaudit/stats.hpp"

namespace seqaudit::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kSchemaError = 3,
  kPreconditionError = 4,
  kRegimeError = 5,
};

struct Context {
  std::filesystem::path out_dir = ".";
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::vector<std::filesystem::path> outputs;

  std::ostream& log() { return *out; }
  std::ostream& warn() { return *err; }

  /// Writes `name` under out_dir atomically and records it as an output.
  template <class Writer>
  std::filesystem::path emit(const std::string& name, Writer&& writer) {
    const auto path = out_dir / name;
    write_file_atomic(path, std::forward<Writer>(writer));
    outputs.push_back(path);
    return path;
  }
};

inline std::uint64_t seed_of(const Config& c) { return c.get_uint("experiment", "seed", 1); }
inline unsigned threads_of(const Config& c) {
  return static_cast<unsigned>(c.get_uint("experiment", "threads", 1));
}

/// Parses "a, b, c" into doubles.
inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (auto field : detail::split_commas(text)) {
    field = detail::trim(field);
    if (field.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
      throw ConfigError(what + ": bad number '" + std::string(field) + "'");
    out.push_back(v);
  }
  return out;
}

/// Grid from `<prefix>values = ...` or `<prefix>from/to/points`.
inline std::vector<double> grid_from_config(const Config& c, const std::string& section,
                                            const std::string& prefix = "") {
  if (c.has(section, prefix + "values")) {
    auto v = parse_list(c.require(section, prefix + "values"), section + "." + prefix + "values");
    if (v.empty()) throw ConfigError(c.source() + ": " + section + "." + prefix + "values is empty");
    return v;
  }
  const double from = c.require_double(section, prefix + "from");
  const double to = c.require_double(section, prefix + "to");
  const auto points = c.require_uint(section, prefix + "points");
  if (points == 0) throw ConfigError(c.source() + ": " + section + "." + prefix + "points must be >= 1");
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i)
    v[i] = points == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
  return v;
}

/// Time binning for information estimates: native categories for steps; for
/// real times either fixed resolution t_r or equal-mass bins.
inline Binning binning_for(const Config& c, std::span<const TrialRecord> records, TimeKind kind) {
  const double floor = c.get_double("stats", "merge_floor", 5.0);
  if (c.has("stats", "resolution")) {
    const double tr = c.require_double("stats", "resolution");
    if (!(tr > 0.0)) throw ConfigError(c.source() + ": stats.resolution must be > 0");
    double t_max = 0.0;
    for (const auto& r : records) t_max = std::max(t_max, r.time);
    std::vector<double> edges;
    for (double e = tr; e <= t_max; e += tr) edges.push_back(e);
    return Binning::from_edges(std::move(edges), floor);
  }
  const auto bins = c.get_uint("stats", "bins", 32);
  if (kind == TimeKind::Steps) return Binning::discrete_native(floor);
  std::vector<double> times;
  times.reserve(records.size());
  for (const auto& r : records) times.push_back(r.time);
  Binning b = quantile_binning(times, bins);
  b.merge_floor = floor;
  return b;
}

inline std::string join_paths(const std::vector<std::filesystem::path>& paths) {
  std::string s;
  for (const auto& p : paths) {
    if (!s.empty()) s += ',';
    s += p.filename().string();
  }
  return s;
}

/// Manifest = [manifest] header plus the fully resolved configuration. It
/// parses as a config, so `rerun` can replay it.
inline void write_manifest(Context& ctx, const std::string& command, const Config& cfg,
                           double seconds) {
  std::ostringstream dur;
  dur.precision(6);
  dur << seconds;
  Config m = cfg.resolved();
  m.set("manifest", "command", command);
  m.set("manifest", "version", kVersion);
  m.set("manifest", "seed", std::to_string(seed_of(cfg)));
  m.set("manifest", "outputs", join_paths(ctx.outputs));
  m.set("manifest", "duration_seconds", dur.str());
  const auto path = ctx.out_dir / (command + ".manifest");
  write_file_atomic(path, [&](std::ostream& os) { m.write(os); });
}

inline int exit_code_for(const std::exception_ptr& e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "config error: " << x.what() << '\n';
    return kConfigError;
  } catch (const SchemaError& x) {
    err << "schema error: " << x.what() << '\n';
    return kSchemaError;
  } catch (const PreconditionError& x) {
    err << "precondition failure: " << x.what() << '\n';
    return kPreconditionError;
  } catch (const RegimeError& x) {
    err << "regime violation: " << x.what() << '\n';
    return kRegimeError;
  } catch (const std::invalid_argument& x) {
    err << "config error: " << x.what() << '\n';
    return kConfigError;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kFailure;
  }
}

using CommandFn = std::function<void(const Config&, Context&)>;

/// Runs one command, validates that every config key was consumed, writes
/// the manifest and maps failures to exit codes.
inline int execute(const std::string& name, const CommandFn& fn, const Config& cfg,
                   const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out_dir = out_dir;
  ctx.out = &out;
  ctx.err = &err;
  try {
    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    fn(cfg, ctx);
    cfg.reject_unused({"manifest"});
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(ctx, name, cfg, secs);
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
  return kOk;
}

}  // namespace seqaudit::cli
