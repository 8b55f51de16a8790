#pragma once

// Gridded per-beam RSRP field at one altitude, with dB-domain bilinear
// sampling and serving-beam SINR evaluation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "skyplan/channel.hpp"
#include "skyplan/error.hpp"

namespace skyplan {

inline constexpr double kRsrpMin = -160.0;
inline constexpr double kRsrpMax = -20.0;
inline constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();

inline bool is_nodata(double v) { return std::isnan(v); }

struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 1.0;
  int nx = 2;
  int ny = 2;
  double altitude = 98.0;
  int beam_count = 1;

  void validate() const {
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw ConfigError("map: origin must be finite");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ConfigError("map: resolution must be > 0");
    if (nx < 2 || ny < 2) throw ConfigError("map: nx and ny must be >= 2");
    if (beam_count < 1) throw ConfigError("map: beam_count must be >= 1");
    if (!(altitude > 0.0) || !std::isfinite(altitude)) throw ConfigError("map: altitude must be > 0");
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct XY {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const XY&, const XY&) = default;
  friend auto operator<=>(const XY&, const XY&) = default;
};

struct BeamSinr {
  int beam = 0;
  double sinr = 0.0;  ///< linear
};

class CoverageMap {
 public:
  CoverageMap() = default;

  /// All cells start as NODATA.
  explicit CoverageMap(const GridSpec& grid) : grid_(grid) {
    grid_.validate();
    values_.assign(static_cast<std::size_t>(grid_.beam_count) * grid_.ny * grid_.nx, kNoData);
  }

  const GridSpec& grid() const { return grid_; }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }
  int beam_count() const { return grid_.beam_count; }
  double resolution() const { return grid_.resolution; }
  double altitude() const { return grid_.altitude; }

  double x_of(int ix) const { return grid_.origin_x + ix * grid_.resolution; }
  double y_of(int iy) const { return grid_.origin_y + iy * grid_.resolution; }
  double x_max() const { return x_of(grid_.nx - 1); }
  double y_max() const { return y_of(grid_.ny - 1); }

  bool contains(double x, double y) const {
    const double eps = 1e-9 * grid_.resolution;
    return x >= grid_.origin_x - eps && x <= x_max() + eps && y >= grid_.origin_y - eps && y <= y_max() + eps;
  }

  double at(int beam, int ix, int iy) const { return values_[index(beam, ix, iy)]; }

  /// Stores a value. Accepts NODATA or a finite RSRP within [-160, -20] dBm.
  void set(int beam, int ix, int iy, double rsrp_dbm) {
    if (!is_nodata(rsrp_dbm) && !(rsrp_dbm >= kRsrpMin && rsrp_dbm <= kRsrpMax))
      throw DomainError("map: RSRP " + std::to_string(rsrp_dbm) + " dBm outside [-160, -20]");
    values_[index(beam, ix, iy)] = rsrp_dbm;
  }

  const std::vector<double>& values() const { return values_; }

  /// Bitwise equality, NODATA matching NODATA.
  friend bool operator==(const CoverageMap& a, const CoverageMap& b) {
    if (!(a.grid_ == b.grid_) || a.values_.size() != b.values_.size()) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
      const double u = a.values_[i], v = b.values_[i];
      if (is_nodata(u) != is_nodata(v)) return false;
      if (!is_nodata(u) && u != v) return false;
    }
    return true;
  }

 private:
  std::size_t index(int beam, int ix, int iy) const {
    if (beam < 0 || beam >= grid_.beam_count || ix < 0 || ix >= grid_.nx || iy < 0 || iy >= grid_.ny)
      throw DomainError("map: index out of range");
    return (static_cast<std::size_t>(beam) * grid_.ny + iy) * grid_.nx + ix;
  }

  GridSpec grid_;
  std::vector<double> values_;
};

/// Bilinear dB-domain interpolation of one beam. Returns nullopt when a
/// neighbouring node carrying non-zero weight is NODATA.
inline std::optional<double> sample_rsrp(const CoverageMap& map, XY pos, int beam) {
  if (beam < 0 || beam >= map.beam_count()) throw DomainError("sample_rsrp: beam index out of range");
  if (!map.contains(pos.x, pos.y)) throw DomainError("sample_rsrp: position outside map extent");
  const double fx = (pos.x - map.grid().origin_x) / map.resolution();
  const double fy = (pos.y - map.grid().origin_y) / map.resolution();
  int ix = static_cast<int>(std::floor(fx));
  int iy = static_cast<int>(std::floor(fy));
  if (ix < 0) ix = 0;
  if (iy < 0) iy = 0;
  if (ix > map.nx() - 2) ix = map.nx() - 2;
  if (iy > map.ny() - 2) iy = map.ny() - 2;
  double tx = fx - ix, ty = fy - iy;
  // Snap round-off so that node positions reproduce stored values exactly.
  constexpr double snap = 1e-9;
  if (std::abs(tx) < snap) tx = 0.0;
  if (std::abs(ty) < snap) ty = 0.0;
  if (std::abs(tx - 1.0) < snap) tx = 1.0;
  if (std::abs(ty - 1.0) < snap) ty = 1.0;

  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  const double v[4] = {map.at(beam, ix, iy), map.at(beam, ix + 1, iy), map.at(beam, ix, iy + 1),
                       map.at(beam, ix + 1, iy + 1)};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0.0) continue;
    if (is_nodata(v[k])) return std::nullopt;
    if (w[k] == 1.0) return v[k];
    acc += w[k] * v[k];
  }
  return acc;
}

/// Serving beam (argmax RSRP, lowest index on ties) and its SINR against the
/// other beams plus noise, all in linear milliwatts.
inline BeamSinr sinr_from_rsrp(const double* rsrp_dbm, int beam_count, double noise_dbm) {
  int best = 0;
  for (int b = 1; b < beam_count; ++b)
    if (rsrp_dbm[b] > rsrp_dbm[best]) best = b;
  double interference = dbm_to_mw(noise_dbm);
  for (int b = 0; b < beam_count; ++b)
    if (b != best) interference += dbm_to_mw(rsrp_dbm[b]);
  return {best, dbm_to_mw(rsrp_dbm[best]) / interference};
}

inline BeamSinr sinr_at(const CoverageMap& map, XY pos, double noise_dbm) {
  std::vector<double> rsrp(static_cast<std::size_t>(map.beam_count()));
  for (int b = 0; b < map.beam_count(); ++b) {
    const auto v = sample_rsrp(map, pos, b);
    if (!v) throw EvaluationError("sinr_at: NODATA for beam " + std::to_string(b));
    rsrp[static_cast<std::size_t>(b)] = *v;
  }
  return sinr_from_rsrp(rsrp.data(), map.beam_count(), noise_dbm);
}

/// SINR at grid node (ix, iy); nullopt if any beam is NODATA there.
inline std::optional<BeamSinr> node_sinr(const CoverageMap& map, int ix, int iy, double noise_dbm) {
  std::vector<double> rsrp(static_cast<std::size_t>(map.beam_count()));
  for (int b = 0; b < map.beam_count(); ++b) {
    const double v = map.at(b, ix, iy);
    if (is_nodata(v)) return std::nullopt;
    rsrp[static_cast<std::size_t>(b)] = v;
  }
  return sinr_from_rsrp(rsrp.data(), map.beam_count(), noise_dbm);
}

}  // namespace skyplan
