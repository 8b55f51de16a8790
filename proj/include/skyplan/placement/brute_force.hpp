#pragma once

// Exhaustive placement oracle over a stride-subsampled set of map nodes.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "skyplan/parallel.hpp"
#include "skyplan/placement/node_field.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

inline constexpr double kBruteForceLimitK3 = 1e8;   ///< combinations, K >= 3
inline constexpr double kBruteForceLimitK12 = 1e10;  ///< combinations, K <= 2

namespace detail {

inline double binomial(double n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

struct Candidate {
  std::vector<std::size_t> nodes;
  double value = -std::numeric_limits<double>::infinity();
};

/// K = 2 specialization of the subset recursion with per-node rates
/// precomputed. Visits pairs in the same order and scores them with the same
/// arithmetic as node_sum_rate.
inline std::vector<Candidate> enumerate_pairs(const NodeField& field, const std::vector<std::size_t>& cand, double bw,
                                              double min_sep) {
  const std::size_t n = cand.size();
  std::vector<double> x(n), y(n), full(n), half(n);
  std::vector<int> beam(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const XY p = field.position(cand[i]);
    x[i] = p.x;
    y[i] = p.y;
    if (const auto& c = field.cell(cand[i])) {
      beam[i] = c->beam;
      full[i] = rate_from_sinr(c->sinr, bw / 1);
      half[i] = rate_from_sinr(c->sinr, bw / 2);
    }
  }
  const double sep = min_sep > 0.0 ? min_sep * (1.0 - 1e-12) - 1e-9 : 0.0;
  const double sep2 = sep > 0.0 ? sep * sep : -1.0;
  return parallel::map_indices<Candidate>(n, [&](std::size_t i) {
    Candidate best;
    if (beam[i] < 0) return best;
    std::size_t arg = n;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (beam[j] < 0) continue;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx * dx + dy * dy < sep2) continue;
      const double v = beam[i] == beam[j] ? half[i] + half[j] : full[i] + full[j];
      if (v > best.value) {
        best.value = v;
        arg = j;
      }
    }
    if (arg < n) best.nodes = {cand[i], cand[arg]};
    return best;
  });
}

}  // namespace detail

/// Exact optimum over all unordered K-subsets of the candidate nodes. Ties go
/// to the lexicographically smallest placement in (x, y).
inline PlacementSolution brute_force_placement(const PlacementProblem& problem, const CoverageMap& map,
                                               int grid_stride = 1) {
  problem.validate();
  if (grid_stride < 1) throw ConfigError("brute_force: grid_stride must be >= 1");
  const detail::NodeField field(map, problem);
  const int K = problem.uav_count;
  const int bc = map.beam_count();
  const double bw = problem.channel.bandwidth;

  std::vector<std::size_t> cand;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const int rx = field.ix(k) - field.ix(0), ry = field.iy(k) - field.iy(0);
    if (rx % grid_stride == 0 && ry % grid_stride == 0) cand.push_back(k);
  }
  const double combos = detail::binomial(static_cast<double>(cand.size()), K);
  if ((K >= 3 && combos > kBruteForceLimitK3) || combos > kBruteForceLimitK12)
    throw SizeError("brute_force: " + std::to_string(combos) + " combinations exceed the enumeration limit");
  if (static_cast<int>(cand.size()) < K) throw EvaluationError("brute_force: fewer candidate nodes than UAVs");

  const double min_sep = problem.min_separation;
  std::vector<detail::Candidate> branches;
  if (K == 2) {
    branches = detail::enumerate_pairs(field, cand, bw, min_sep);
  } else {
  // Enumeration fans out over the first (smallest) node of each subset; within
  // a branch subsets are visited in lexicographic order and only strict
  // improvements replace the incumbent.
  branches = parallel::map_indices<detail::Candidate>(cand.size(), [&](std::size_t first) {
    detail::Candidate best;
    std::vector<std::size_t> idx{first};
    std::vector<std::size_t> nodes{cand[first]};
    auto recurse = [&](auto&& self, std::size_t start) -> void {
      if (static_cast<int>(nodes.size()) == K) {
        const double v = detail::node_sum_rate(field, nodes, bw, bc);
        if (v > best.value) {
          best.value = v;
          best.nodes = nodes;
        }
        return;
      }
      for (std::size_t j = start; j < cand.size(); ++j) {
        nodes.push_back(cand[j]);
        if (detail::nodes_separated(field, nodes, min_sep)) self(self, j + 1);
        nodes.pop_back();
      }
    };
    recurse(recurse, first + 1);
    return best;
  });
  }

  const detail::Candidate* best = nullptr;
  for (const auto& b : branches)
    if (!b.nodes.empty() && std::isfinite(b.value) && (!best || b.value > best->value)) best = &b;
  if (!best) throw EvaluationError("brute_force: no feasible placement on the map");

  std::vector<XY> positions;
  for (auto k : best->nodes) positions.push_back(field.position(k));
  PlacementSolution sol = evaluate_on_map(positions, problem, map, PlacementMethod::brute_force);
  sol.iterations = 1;
  return sol;
}

}  // namespace skyplan
