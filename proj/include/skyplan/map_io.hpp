#pragma once

// Coverage-map CSV format:
//
//   # skyplan-map v1
//   # origin_x,origin_y,resolution,nx,ny,altitude,beam_count
//   <7 comma-separated values>
//   beam_id,ix,iy,rsrp_dbm        (one row per beam and cell)
//
// rsrp_dbm is a decimal with at most 4 fraction digits or the literal NaN
// (NODATA). Canonical row order is beam-major, then iy, then ix. Rows absent
// from a file load as NODATA; a repeated (beam, ix, iy) keeps the last value.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "skyplan/coverage_map.hpp"
#include "skyplan/error.hpp"

namespace skyplan {

inline constexpr std::string_view kMapMagic = "# skyplan-map v1";
inline constexpr std::string_view kMapMetaLabel = "# origin_x,origin_y,resolution,nx,ny,altitude,beam_count";

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Shortest decimal that round-trips.
inline std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Fixed 4-digit rounding with trailing zeros stripped.
inline std::string format_rsrp(double v) {
  if (is_nodata(v)) return "NaN";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
  std::string s(buf, ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline bool has_at_most_4_fraction_digits(std::string_view s) {
  s = trim(s);
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) return s.find_first_of("eE") == std::string_view::npos;
  const auto frac = s.substr(dot + 1);
  if (frac.find_first_not_of("0123456789") != std::string_view::npos) return false;
  return frac.size() <= 4;
}

}  // namespace detail

inline CoverageMap read_map(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != kMapMagic) throw ParseError(1, "expected header '" + std::string(kMapMagic) + "'");
  if (!next_line() || line != kMapMetaLabel)
    throw ParseError(2, "expected metadata label '" + std::string(kMapMetaLabel) + "'");
  if (!next_line()) throw ParseError(3, "missing metadata values");

  const auto meta = detail::split_commas(line);
  if (meta.size() != 7) throw ParseError(line_no, "metadata must have 7 values");
  GridSpec grid;
  if (!detail::parse_double(meta[0], grid.origin_x) || !detail::parse_double(meta[1], grid.origin_y) ||
      !detail::parse_double(meta[2], grid.resolution) || !detail::parse_int(meta[3], grid.nx) ||
      !detail::parse_int(meta[4], grid.ny) || !detail::parse_double(meta[5], grid.altitude) ||
      !detail::parse_int(meta[6], grid.beam_count))
    throw ParseError(line_no, "malformed metadata value");
  try {
    grid.validate();
  } catch (const ConfigError& e) {
    throw ParseError(line_no, e.what());
  }

  CoverageMap map(grid);
  while (next_line()) {
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto fields = detail::split_commas(row);
    if (fields.size() != 4) throw ParseError(line_no, "expected 'beam_id,ix,iy,rsrp_dbm'");
    int beam = 0, ix = 0, iy = 0;
    if (!detail::parse_int(fields[0], beam) || !detail::parse_int(fields[1], ix) || !detail::parse_int(fields[2], iy))
      throw ParseError(line_no, "malformed index field");
    if (beam < 0 || beam >= grid.beam_count)
      throw ParseError(line_no, "beam " + std::to_string(beam) + " outside [0, " + std::to_string(grid.beam_count) + ")");
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) throw ParseError(line_no, "cell index outside grid");
    const std::string_view value = detail::trim(fields[3]);
    double rsrp = kNoData;
    if (value != "NaN") {
      if (!detail::has_at_most_4_fraction_digits(value) || !detail::parse_double(value, rsrp) || !std::isfinite(rsrp))
        throw ParseError(line_no, "malformed RSRP '" + std::string(value) + "'");
      if (rsrp < kRsrpMin || rsrp > kRsrpMax) throw ParseError(line_no, "RSRP outside [-160, -20] dBm");
    }
    map.set(beam, ix, iy, rsrp);
  }
  return map;
}

inline CoverageMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file '" + path.string() + "'");
  return read_map(in);
}

/// Writes the canonical form. RSRP values are rounded to 4 fraction digits.
inline void write_map(std::ostream& out, const CoverageMap& map) {
  const GridSpec& g = map.grid();
  out << kMapMagic << '\n' << kMapMetaLabel << '\n';
  out << detail::format_exact(g.origin_x) << ',' << detail::format_exact(g.origin_y) << ','
      << detail::format_exact(g.resolution) << ',' << g.nx << ',' << g.ny << ',' << detail::format_exact(g.altitude)
      << ',' << g.beam_count << '\n';
  std::string row;
  for (int b = 0; b < g.beam_count; ++b)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        row.clear();
        row += std::to_string(b);
        row += ',';
        row += std::to_string(ix);
        row += ',';
        row += std::to_string(iy);
        row += ',';
        row += detail::format_rsrp(map.at(b, ix, iy));
        row += '\n';
        out << row;
      }
}

inline void save_map(const CoverageMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write map file '" + path.string() + "'");
  write_map(out, map);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

/// Rounds every value to what the CSV format can represent.
inline CoverageMap quantize_for_csv(const CoverageMap& map) {
  std::stringstream ss;
  write_map(ss, map);
  return read_map(ss);
}

}  // namespace skyplan
