#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "skyplan/coverage_map.hpp"
#include "skyplan/parallel.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan::detail {

/// Map nodes inside the placement area with their serving beam and SINR,
/// precomputed once. Node k is (ix0 + k / count_y, iy0 + k % count_y), so
/// node order is lexicographic in (x, y).
class NodeField {
 public:
  NodeField(const CoverageMap& map, const PlacementProblem& problem) : map_(&map) {
    const Area& a = problem.area;
    const GridSpec& g = map.grid();
    if (!map.contains(a.x_min, a.y_min) || !map.contains(a.x_max, a.y_max))
      throw ConfigError("placement: area not covered by the map");
    ix0_ = static_cast<int>(std::ceil((a.x_min - g.origin_x) / g.resolution - 1e-9));
    iy0_ = static_cast<int>(std::ceil((a.y_min - g.origin_y) / g.resolution - 1e-9));
    const int ix1 = static_cast<int>(std::floor((a.x_max - g.origin_x) / g.resolution + 1e-9));
    const int iy1 = static_cast<int>(std::floor((a.y_max - g.origin_y) / g.resolution + 1e-9));
    count_x_ = ix1 - ix0_ + 1;
    count_y_ = iy1 - iy0_ + 1;
    if (count_x_ < 1 || count_y_ < 1) throw ConfigError("placement: area contains no map node");
    const double noise = problem.channel.noise_power;
    cells_ = parallel::map_indices<std::optional<BeamSinr>>(size(), [&](std::size_t k) {
      return node_sinr(map, ix(k), iy(k), noise);
    });
  }

  std::size_t size() const { return static_cast<std::size_t>(count_x_) * count_y_; }
  int count_x() const { return count_x_; }
  int count_y() const { return count_y_; }
  int ix(std::size_t k) const { return ix0_ + static_cast<int>(k / count_y_); }
  int iy(std::size_t k) const { return iy0_ + static_cast<int>(k % count_y_); }
  std::size_t node(int ix, int iy) const {
    return static_cast<std::size_t>(ix - ix0_) * count_y_ + static_cast<std::size_t>(iy - iy0_);
  }
  bool in_area(int ix, int iy) const {
    return ix >= ix0_ && ix < ix0_ + count_x_ && iy >= iy0_ && iy < iy0_ + count_y_;
  }
  XY position(std::size_t k) const { return {map_->x_of(ix(k)), map_->y_of(iy(k))}; }
  const std::optional<BeamSinr>& cell(std::size_t k) const { return cells_[k]; }

 private:
  const CoverageMap* map_;
  int ix0_ = 0, iy0_ = 0, count_x_ = 0, count_y_ = 0;
  std::vector<std::optional<BeamSinr>> cells_;
};

/// Sum rate of a node set; -inf if any node is NODATA. Mirrors
/// evaluate_on_map for node positions.
inline double node_sum_rate(const NodeField& field, const std::vector<std::size_t>& nodes, double bandwidth,
                            int beam_count) {
  std::vector<int> load(static_cast<std::size_t>(beam_count), 0);
  for (auto k : nodes) {
    const auto& c = field.cell(k);
    if (!c) return -std::numeric_limits<double>::infinity();
    ++load[static_cast<std::size_t>(c->beam)];
  }
  double sum = 0.0;
  for (auto k : nodes) {
    const auto& c = *field.cell(k);
    sum += rate_from_sinr(c.sinr, bandwidth / load[static_cast<std::size_t>(c.beam)]);
  }
  return sum;
}

inline bool nodes_separated(const NodeField& field, const std::vector<std::size_t>& nodes, double min_sep) {
  if (min_sep <= 0.0) return true;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const XY a = field.position(nodes[i]), b = field.position(nodes[j]);
      if (std::hypot(a.x - b.x, a.y - b.y) < min_sep * (1.0 - 1e-12) - 1e-9) return false;
    }
  return true;
}

/// Lexicographic order on the (x, y) positions of sorted node lists.
inline bool lex_less(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a < b;
}

}  // namespace skyplan::detail
