#pragma once

// Minimal numeric CSV reader/writer shared by the file-format code.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "vswir/errors.hpp"

namespace vswir::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;

  std::size_t column(std::string_view name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InputError(file + ": missing column '" + std::string(name) + "'");
  }
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError(where + ": cannot parse '" + std::string(s) + "' as a number");
  }
  return v;
}

/// Header line required; blank lines skipped; every row must match the header width.
inline Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  const std::string file = path.string();
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (t.header.empty()) {
      for (auto f : fields) t.header.emplace_back(f);
      continue;
    }
    const std::string where = file + ":" + std::to_string(lineno);
    if (fields.size() != t.header.size()) {
      throw InputError(where + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, where));
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) throw InputError(file + ": empty file");
  return t;
}

/// Shortest representation that round-trips exactly.
inline void append(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace vswir::csv
