#pragma once

// Placement problem/solution types and the scoring shared by every placement
// method: argmax-beam association, equal bandwidth split among UAVs that
// share a beam, Shannon rate per UAV.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "skyplan/channel.hpp"
#include "skyplan/coverage_map.hpp"
#include "skyplan/error.hpp"

namespace skyplan {

enum class PlacementMethod { sca_los, map_search, llm, brute_force };

inline std::string_view to_string(PlacementMethod m) {
  switch (m) {
    case PlacementMethod::sca_los: return "SCA_LOS";
    case PlacementMethod::map_search: return "MAP_SEARCH";
    case PlacementMethod::llm: return "LLM";
    case PlacementMethod::brute_force: return "BRUTE_FORCE";
  }
  return "?";
}

struct Area {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;

  bool contains(XY p, double eps = 1e-9) const {
    return p.x >= x_min - eps && p.x <= x_max + eps && p.y >= y_min - eps && p.y <= y_max + eps;
  }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

inline Area map_area(const CoverageMap& map) { return {map.grid().origin_x, map.x_max(), map.grid().origin_y, map.y_max()}; }

struct PlacementProblem {
  int uav_count = 1;
  Area area;
  double altitude = 98.0;
  double min_separation = 10.0;
  ChannelModel channel;
  std::vector<BeamPattern> beams = default_beam_layout();
  Position3D bs_position{-150.0, 150.5, 0.0};

  void validate() const {
    if (uav_count < 1) throw ConfigError("placement: uav_count must be >= 1");
    if (!(area.x_max > area.x_min) || !(area.y_max > area.y_min)) throw ConfigError("placement: degenerate area");
    if (!(min_separation >= 0.0)) throw ConfigError("placement: min_separation must be >= 0");
    if (!(altitude > 0.0)) throw ConfigError("placement: altitude must be > 0");
    if (beams.empty()) throw ConfigError("placement: at least one beam required");
    channel.validate();
    for (const auto& b : beams) b.validate();
    // A square lattice with pitch min_separation bounds what fits in the area.
    if (min_separation > 0.0) {
      const double per_row = std::floor(area.width() / min_separation) + 1;
      const double per_col = std::floor(area.height() / min_separation) + 1;
      if (per_row * per_col < uav_count)
        throw ConfigError("placement: " + std::to_string(uav_count) + " UAVs cannot respect the separation in the area");
    }
  }
};

struct PlacementSolution {
  std::vector<XY> positions;
  std::vector<int> serving_beam;
  std::vector<double> sinr;
  std::vector<double> per_uav_rate;  ///< bit/s
  double sum_rate = 0.0;             ///< bit/s
  PlacementMethod method = PlacementMethod::map_search;
  int iterations = 0;
  std::vector<double> objective_trace;
  bool max_iter_reached = false;
};

inline double min_pairwise_distance(const std::vector<XY>& positions) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      best = std::min(best, std::hypot(positions[i].x - positions[j].x, positions[i].y - positions[j].y));
  return best;
}

inline bool respects_separation(const std::vector<XY>& positions, double min_separation) {
  return min_pairwise_distance(positions) >= min_separation * (1.0 - 1e-12) - 1e-9;
}

/// Throws ConstraintError on wrong count, out-of-area or separation violation.
inline void check_feasible(const std::vector<XY>& positions, const PlacementProblem& problem) {
  if (static_cast<int>(positions.size()) != problem.uav_count)
    throw ConstraintError("placement: expected " + std::to_string(problem.uav_count) + " positions, got " +
                          std::to_string(positions.size()));
  for (const auto& p : positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConstraintError("placement: non-finite coordinate");
    if (!problem.area.contains(p)) throw ConstraintError("placement: position outside the area");
  }
  if (!respects_separation(positions, problem.min_separation))
    throw ConstraintError("placement: minimum separation violated");
}

/// Turns per-UAV (beam, sinr) into rates with equal sharing per beam.
inline void assign_rates(PlacementSolution& sol, double bandwidth) {
  std::map<int, int> load;
  for (int b : sol.serving_beam) ++load[b];
  sol.per_uav_rate.resize(sol.serving_beam.size());
  sol.sum_rate = 0.0;
  for (std::size_t k = 0; k < sol.serving_beam.size(); ++k) {
    sol.per_uav_rate[k] = rate_from_sinr(sol.sinr[k], bandwidth / load[sol.serving_beam[k]]);
    sol.sum_rate += sol.per_uav_rate[k];
  }
}

/// Scores positions with any (x, y) -> BeamSinr field.
template <class SinrField>
PlacementSolution score_with(const std::vector<XY>& positions, const PlacementProblem& problem, SinrField&& field,
                             PlacementMethod method) {
  PlacementSolution sol;
  sol.positions = positions;
  sol.method = method;
  for (const auto& p : positions) {
    const BeamSinr bs = field(p);
    sol.serving_beam.push_back(bs.beam);
    sol.sinr.push_back(bs.sinr);
  }
  assign_rates(sol, problem.channel.bandwidth);
  return sol;
}

/// Ground-truth scoring of a placement on an empirical map.
inline PlacementSolution evaluate_on_map(const std::vector<XY>& positions, const PlacementProblem& problem,
                                         const CoverageMap& map,
                                         PlacementMethod method = PlacementMethod::map_search) {
  for (const auto& p : positions)
    if (!map.contains(p.x, p.y)) throw EvaluationError("evaluate_on_map: position outside map extent");
  check_feasible(positions, problem);
  return score_with(
      positions, problem, [&](XY p) { return sinr_at(map, p, problem.channel.noise_power); }, method);
}

/// The idealized LoS model of the problem's base station, viewed at the
/// placement altitude.
class LosField {
 public:
  explicit LosField(const PlacementProblem& problem) : problem_(&problem) {}

  Position3D at(XY p) const { return {p.x, p.y, problem_->altitude}; }

  double rsrp(XY p, int beam) const {
    return los_rsrp(problem_->channel, problem_->beams[static_cast<std::size_t>(beam)], problem_->bs_position, at(p));
  }

  BeamSinr operator()(XY p) const {
    std::vector<double> r(problem_->beams.size());
    for (std::size_t b = 0; b < r.size(); ++b) r[b] = rsrp(p, static_cast<int>(b));
    return sinr_from_rsrp(r.data(), static_cast<int>(r.size()), problem_->channel.noise_power);
  }

 private:
  const PlacementProblem* problem_;
};

/// Scoring under the LoS model (what the SCA benchmark believes).
inline PlacementSolution evaluate_los(const std::vector<XY>& positions, const PlacementProblem& problem,
                                      PlacementMethod method = PlacementMethod::sca_los) {
  check_feasible(positions, problem);
  return score_with(positions, problem, LosField(problem), method);
}

}  // namespace skyplan
