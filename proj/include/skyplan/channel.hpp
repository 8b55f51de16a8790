#pragma once

// Parametric line-of-sight channel: free-space path loss, clamped-Gaussian
// beam patterns, deterministic LoS RSRP and the Shannon rate.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "skyplan/error.hpp"

namespace skyplan {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
/// dBm -> milliwatts.
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
/// dBm -> watts.
inline double dbm_to_w(double dbm) { return db_to_linear(dbm - 30.0); }

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  ///< altitude above ground

  bool valid() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && z >= 0.0; }
  friend bool operator==(const Position3D&, const Position3D&) = default;
};

/// Free-space path loss in dB.
inline double fspl(double distance_m, double freq_hz) {
  if (!(distance_m > 0.0) || !(freq_hz > 0.0)) throw DomainError("fspl: distance and frequency must be positive");
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * freq_hz / kSpeedOfLight);
}

struct ChannelModel {
  double carrier_freq = 4.9e9;      ///< Hz
  double bandwidth = 100e6;         ///< Hz
  double noise_power = -94.0;       ///< dBm over `bandwidth`
  double tx_power_per_beam = 43.0;  ///< dBm
  double pathloss_exponent = 2.0;
  double ref_pathloss_1m = fspl(1.0, 4.9e9);  ///< dB
  double shadowing_sigma = 6.0;               ///< dB
  double shadowing_corr_len = 25.0;           ///< m

  /// Channel with reference loss tied to the carrier (free space at 1 m).
  static ChannelModel at_carrier(double freq_hz) {
    ChannelModel m;
    m.carrier_freq = freq_hz;
    m.ref_pathloss_1m = fspl(1.0, freq_hz);
    return m;
  }

  void validate() const {
    if (!(carrier_freq > 0.0)) throw ConfigError("channel: carrier_freq must be > 0");
    if (!(bandwidth > 0.0)) throw ConfigError("channel: bandwidth must be > 0");
    if (!(pathloss_exponent >= 1.5 && pathloss_exponent <= 6.0))
      throw ConfigError("channel: pathloss_exponent must lie in [1.5, 6]");
    if (!(shadowing_sigma >= 0.0)) throw ConfigError("channel: shadowing_sigma must be >= 0");
    if (!(shadowing_corr_len > 0.0)) throw ConfigError("channel: shadowing_corr_len must be > 0");
    if (!std::isfinite(noise_power) || !std::isfinite(tx_power_per_beam) || !std::isfinite(ref_pathloss_1m))
      throw ConfigError("channel: powers must be finite");
  }
};

struct BeamPattern {
  int beam_id = 0;
  double azimuth_center = 0.0;      ///< deg
  double elevation_center = 20.0;   ///< deg, positive = uptilt
  double azimuth_width_3db = 15.0;  ///< deg
  double elevation_width_3db = 20.0;
  double peak_gain = 17.0;   ///< dBi
  double floor_gain = -13.0;  ///< dBi

  void validate() const {
    if (!(azimuth_width_3db > 0.0) || !(elevation_width_3db > 0.0))
      throw ConfigError("beam: 3 dB widths must be > 0");
    if (!(peak_gain > floor_gain)) throw ConfigError("beam: peak_gain must exceed floor_gain");
  }
};

/// Azimuth/elevation in degrees.
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Wraps an angle difference into [-180, 180].
inline double wrap_degrees(double deg) { return std::remainder(deg, 360.0); }

/// Direction of `to` seen from `from`. Azimuth is measured from +x towards +y.
inline Direction direction_between(const Position3D& from, const Position3D& to) {
  constexpr double rad2deg = 180.0 / std::numbers::pi;
  const double dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
  return {std::atan2(dy, dx) * rad2deg, std::atan2(dz, std::hypot(dx, dy)) * rad2deg};
}

inline double beam_gain(const BeamPattern& pattern, Direction dir) {
  const double daz = wrap_degrees(dir.azimuth - pattern.azimuth_center) / pattern.azimuth_width_3db;
  const double del = wrap_degrees(dir.elevation - pattern.elevation_center) / pattern.elevation_width_3db;
  const double g = pattern.peak_gain - 12.0 * (daz * daz + del * del);
  return g < pattern.floor_gain ? pattern.floor_gain : g;
}

/// Seven beams spread over a 90 degree azimuth fan (-45..+45 in 15 degree
/// steps) around `boresight_azimuth`, all tilted up by `uptilt`.
inline std::vector<BeamPattern> default_beam_layout(double boresight_azimuth = 0.0, double uptilt = 20.0,
                                                    int count = 7, double spacing = 15.0) {
  std::vector<BeamPattern> beams;
  beams.reserve(static_cast<std::size_t>(count));
  const double first = -spacing * (count - 1) / 2.0;
  for (int b = 0; b < count; ++b) {
    BeamPattern p;
    p.beam_id = b;
    p.azimuth_center = boresight_azimuth + first + spacing * b;
    p.elevation_center = uptilt;
    beams.push_back(p);
  }
  return beams;
}

inline double distance(const Position3D& a, const Position3D& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

/// Path loss of the log-distance LoS model in dB.
inline double los_pathloss(const ChannelModel& model, double d3d) {
  return model.ref_pathloss_1m + 10.0 * model.pathloss_exponent * std::log10(d3d);
}

/// Deterministic LoS RSRP (dBm) of one beam at `p`.
inline double los_rsrp(const ChannelModel& model, const BeamPattern& pattern, const Position3D& bs,
                       const Position3D& p) {
  const double d = distance(bs, p);
  if (!(d > 0.0)) throw DomainError("los_rsrp: receiver coincides with base station");
  return model.tx_power_per_beam + beam_gain(pattern, direction_between(bs, p)) - los_pathloss(model, d);
}

/// Gradient of los_rsrp (dB per metre) with respect to the receiver's (x, y).
/// Zero gain slope inside the sidelobe floor.
inline std::array<double, 2> los_rsrp_gradient_xy(const ChannelModel& model, const BeamPattern& pattern,
                                                  const Position3D& bs, const Position3D& p) {
  constexpr double rad2deg = 180.0 / std::numbers::pi;
  const double dx = p.x - bs.x, dy = p.y - bs.y, dz = p.z - bs.z;
  const double h2 = dx * dx + dy * dy;
  const double d2 = h2 + dz * dz;
  if (!(d2 > 0.0)) throw DomainError("los_rsrp_gradient_xy: receiver coincides with base station");
  const double pl_scale = -10.0 * model.pathloss_exponent / std::log(10.0) / d2;
  std::array<double, 2> g{pl_scale * dx, pl_scale * dy};

  const Direction dir = direction_between(bs, p);
  const double daz = wrap_degrees(dir.azimuth - pattern.azimuth_center);
  const double del = wrap_degrees(dir.elevation - pattern.elevation_center);
  const double waz = pattern.azimuth_width_3db, wel = pattern.elevation_width_3db;
  const double raw = pattern.peak_gain - 12.0 * ((daz / waz) * (daz / waz) + (del / wel) * (del / wel));
  if (raw > pattern.floor_gain && h2 > 0.0) {
    const double h = std::sqrt(h2);
    const double daz_dx = -dy / h2 * rad2deg, daz_dy = dx / h2 * rad2deg;
    const double del_dh = -dz / d2 * rad2deg;
    const double del_dx = del_dh * dx / h, del_dy = del_dh * dy / h;
    const double kaz = -24.0 * daz / (waz * waz), kel = -24.0 * del / (wel * wel);
    g[0] += kaz * daz_dx + kel * del_dx;
    g[1] += kaz * daz_dy + kel * del_dy;
  }
  return g;
}

/// Shannon rate in bit/s.
inline double rate_from_sinr(double sinr, double bandwidth_share) {
  if (!(sinr >= 0.0) || !(bandwidth_share >= 0.0)) throw DomainError("rate_from_sinr: inputs must be non-negative");
  return bandwidth_share * std::log2(1.0 + sinr);
}

}  // namespace skyplan
