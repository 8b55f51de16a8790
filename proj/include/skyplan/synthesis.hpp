#pragma once

// Synthetic coverage maps: LoS RSRP per beam plus spatially correlated
// log-normal shadowing and rectangular blockage losses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "skyplan/channel.hpp"
#include "skyplan/coverage_map.hpp"
#include "skyplan/error.hpp"
#include "skyplan/parallel.hpp"

namespace skyplan {

struct BlockageRect {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double loss_db = 0.0;

  bool covers(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

struct SynthesisConfig {
  ChannelModel channel;
  std::vector<BeamPattern> beams = default_beam_layout();
  Position3D bs_position{-150.0, 150.5, 0.0};
  double origin_x = 0.0;
  double origin_y = 0.0;
  double width = 634.0;   ///< m
  double height = 301.0;  ///< m
  double resolution = 1.0;
  double altitude = 98.0;
  std::uint64_t seed = 1;
  std::vector<BlockageRect> blockages;

  void validate() const {
    channel.validate();
    if (beams.empty()) throw ConfigError("synthesis: at least one beam required");
    for (const auto& b : beams) b.validate();
    if (!bs_position.valid()) throw ConfigError("synthesis: invalid base-station position");
    if (!(resolution > 0.0)) throw ConfigError("synthesis: resolution must be > 0");
    if (!(width >= 2 * resolution) || !(height >= 2 * resolution))
      throw ConfigError("synthesis: area must span at least two cells per axis");
    if (!(altitude > 0.0)) throw ConfigError("synthesis: altitude must be > 0");
    for (const auto& r : blockages)
      if (!(r.loss_db >= 0.0) || r.x_min > r.x_max || r.y_min > r.y_max)
        throw ConfigError("synthesis: blockage rectangles need ordered bounds and loss >= 0");
  }

  GridSpec grid() const {
    GridSpec g;
    g.origin_x = origin_x;
    g.origin_y = origin_y;
    g.resolution = resolution;
    g.nx = static_cast<int>(std::floor(width / resolution + 1e-9)) + 1;
    g.ny = static_cast<int>(std::floor(height / resolution + 1e-9)) + 1;
    g.altitude = altitude;
    g.beam_count = static_cast<int>(beams.size());
    return g;
  }
};

/// The measurement campaign geometry: 634 x 301 m at 1 m, 98 m altitude,
/// seven uptilted beams at 4.9 GHz.
inline SynthesisConfig campaign_synthesis_config() { return SynthesisConfig{}; }

/// Campaign geometry shrunk to 200 x 120 m with the base station kept 150 m
/// in front of the area's near edge.
inline SynthesisConfig scaled_synthesis_config(double sigma_db, std::uint64_t seed) {
  SynthesisConfig cfg;
  cfg.width = 200.0;
  cfg.height = 120.0;
  cfg.bs_position = {-150.0, 60.0, 0.0};
  cfg.channel.shadowing_sigma = sigma_db;
  cfg.seed = seed;
  return cfg;
}

/// Unit-variance Gaussian field with separable exponential autocorrelation
/// exp(-(|dx| + |dy|) / corr_len), built by AR(1) filtering along rows and
/// then columns. Row noise comes from an engine keyed on (seed, stream, row),
/// so the result is independent of the worker count.
inline std::vector<double> correlated_gaussian_field(int nx, int ny, double resolution, double corr_len,
                                                     std::uint64_t seed, std::uint64_t stream) {
  const double a = std::exp(-resolution / corr_len);
  const double innov = std::sqrt(1.0 - a * a);
  std::vector<double> field(static_cast<std::size_t>(nx) * ny);

  parallel::for_each_index(static_cast<std::size_t>(ny), [&](std::size_t iy) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(iy)};
    std::mt19937_64 rng(sseq);
    std::normal_distribution<double> normal(0.0, 1.0);
    double* row = field.data() + iy * nx;
    row[0] = normal(rng);
    for (int ix = 1; ix < nx; ++ix) row[ix] = a * row[ix - 1] + innov * normal(rng);
  });
  parallel::for_each_index(static_cast<std::size_t>(nx), [&](std::size_t ix) {
    for (int iy = 1; iy < ny; ++iy) {
      const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
      field[i] = a * field[i - nx] + innov * field[i];
    }
  });
  return field;
}

inline CoverageMap synthesize(const SynthesisConfig& cfg) {
  cfg.validate();
  const GridSpec grid = cfg.grid();
  CoverageMap map(grid);
  for (int b = 0; b < grid.beam_count; ++b) {
    std::vector<double> shadow;
    if (cfg.channel.shadowing_sigma > 0.0)
      shadow = correlated_gaussian_field(grid.nx, grid.ny, grid.resolution, cfg.channel.shadowing_corr_len, cfg.seed,
                                         static_cast<std::uint64_t>(b));
    const BeamPattern& beam = cfg.beams[static_cast<std::size_t>(b)];
    parallel::for_each_index(static_cast<std::size_t>(grid.ny), [&](std::size_t iy_) {
      const int iy = static_cast<int>(iy_);
      for (int ix = 0; ix < grid.nx; ++ix) {
        const Position3D p{map.x_of(ix), map.y_of(iy), grid.altitude};
        double v = los_rsrp(cfg.channel, beam, cfg.bs_position, p);
        if (!shadow.empty()) v += cfg.channel.shadowing_sigma * shadow[iy_ * grid.nx + ix];
        for (const auto& r : cfg.blockages)
          if (r.covers(p.x, p.y)) v -= r.loss_db;
        map.set(b, ix, iy, std::clamp(v, kRsrpMin, kRsrpMax));
      }
    });
  }
  return map;
}

}  // namespace skyplan
