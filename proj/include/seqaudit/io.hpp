#pragma once

// Record CSV interchange (hypothesis,decision,time,terminal_llr) and the
// key=value metadata sidecar.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "seqaudit/core.hpp"

namespace seqaudit {

inline constexpr std::string_view kRecordHeader = "hypothesis,decision,time,terminal_llr";

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_record(std::ostream& os, const TrialRecord& r, TimeKind kind) {
  os << to_int(r.hypothesis) << ',' << to_int(r.decision) << ',';
  if (kind == TimeKind::Steps)
    os << static_cast<long long>(r.time);
  else
    os << format_double(r.time);
  os << ',';
  if (r.terminal_llr) os << format_double(*r.terminal_llr);
  os << '\n';
}

inline void write_records_csv(std::ostream& os, std::span<const TrialRecord> records,
                              TimeKind kind) {
  os << kRecordHeader << '\n';
  for (const auto& r : records) write_record(os, r, kind);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, std::size_t line, const char* field) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty())
    throw SchemaError("line " + std::to_string(line) + ": bad " + field + " '" + std::string(s) +
                      "'");
  return v;
}

inline int parse_label(std::string_view s, std::size_t line, const char* field) {
  s = trim(s);
  if (s == "1") return 1;
  if (s == "2") return 2;
  throw SchemaError("line " + std::to_string(line) + ": " + field + " must be 1 or 2, got '" +
                    std::string(s) + "'");
}

}  // namespace detail

/// Parses the record CSV. The time kind is inferred: all-integer times are
/// steps, anything else is continuous.
inline RecordSet read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("record file is empty");
  if (detail::trim(line) != kRecordHeader)
    throw SchemaError("line 1: expected header '" + std::string(kRecordHeader) + "'");
  RecordSet set;
  bool all_integer = true;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != 4)
      throw SchemaError("line " + std::to_string(n) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
    TrialRecord r{hypothesis_from_int(detail::parse_label(fields[0], n, "hypothesis")),
                  decision_from_int(detail::parse_label(fields[1], n, "decision")),
                  detail::parse_double(fields[2], n, "time"), std::nullopt};
    if (!(r.time >= 0.0) || !std::isfinite(r.time))
      throw SchemaError("line " + std::to_string(n) + ": time must be finite and >= 0");
    if (!detail::trim(fields[3]).empty())
      r.terminal_llr = detail::parse_double(fields[3], n, "terminal_llr");
    if (r.time != std::floor(r.time)) all_integer = false;
    set.records.push_back(r);
  }
  set.kind = all_integer ? TimeKind::Steps : TimeKind::Continuous;
  return set;
}

inline RecordSet read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open record file " + path.string());
  return read_records_csv(in);
}

/// Writes through a temporary file and renames, so readers never observe a
/// partial file.
template <class Writer>
void write_file_atomic(const std::filesystem::path& path, Writer&& writer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << k << '=' << v << '\n';
}

inline std::map<std::string, std::string> read_metadata(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find('=');
    if (pos == std::string::npos) continue;
    out[std::string(detail::trim(std::string_view(line).substr(0, pos)))] =
        std::string(detail::trim(std::string_view(line).substr(pos + 1)));
  }
  return out;
}

/// records.csv -> records.meta
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta");
  return p;
}

}  // namespace seqaudit
