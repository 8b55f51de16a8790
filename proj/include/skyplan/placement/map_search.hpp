#pragma once

// Environment-aware placement: multi-start coordinate pattern search scored
// directly on the empirical coverage map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "skyplan/parallel.hpp"
#include "skyplan/placement/node_field.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

struct SearchConfig {
  int restarts = 8;           ///< random feasible starts besides the greedy one
  std::uint64_t seed = 1;
  double stride = 16.0;       ///< initial pattern step in metres, halved down to the map resolution
  int candidate_pool = 64;    ///< distinct high-rate cells offered to the greedy start
};

namespace detail {

struct SearchResult {
  std::vector<std::size_t> nodes;
  double value = -std::numeric_limits<double>::infinity();
};

class PatternSearch {
 public:
  PatternSearch(const NodeField& field, const PlacementProblem& problem, const CoverageMap& map)
      : field_(field), problem_(problem), beam_count_(map.beam_count()) {}

  double score(const std::vector<std::size_t>& nodes) const {
    if (!nodes_separated(field_, nodes, problem_.min_separation)) return -std::numeric_limits<double>::infinity();
    return node_sum_rate(field_, nodes, problem_.channel.bandwidth, beam_count_);
  }

  SearchResult run(std::vector<std::size_t> nodes, int stride_nodes) const {
    double value = score(nodes);
    constexpr int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    int step = std::max(1, stride_nodes);
    for (int sweep = 0; sweep < 100000; ++sweep) {
      bool improved = false;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t here = nodes[k];
        std::size_t best_node = here;
        double best_value = value;
        for (const auto& d : dirs) {
          const int ix = field_.ix(here) + d[0] * step, iy = field_.iy(here) + d[1] * step;
          if (!field_.in_area(ix, iy)) continue;
          nodes[k] = field_.node(ix, iy);
          const double v = score(nodes);
          if (v > best_value) {
            best_value = v;
            best_node = nodes[k];
          }
        }
        nodes[k] = best_node;
        if (best_node != here) {
          value = best_value;
          improved = true;
        }
      }
      if (!improved) {
        if (step == 1) break;
        step = std::max(1, step / 2);
      }
    }
    return {std::move(nodes), value};
  }

 private:
  const NodeField& field_;
  const PlacementProblem& problem_;
  int beam_count_;
};

/// Greedy start from a pool of well-separated high single-UAV-rate cells.
inline std::vector<std::size_t> greedy_seed(const NodeField& field, const PatternSearch& search,
                                            const PlacementProblem& problem, int pool_size) {
  const double bw = problem.channel.bandwidth;
  std::vector<double> single(field.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < field.size(); ++k)
    if (field.cell(k)) single[k] = rate_from_sinr(field.cell(k)->sinr, bw);
  std::vector<std::size_t> order(field.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return single[a] > single[b]; });

  const double suppress = std::max(problem.min_separation, 5.0);
  std::vector<std::size_t> pool;
  for (std::size_t k : order) {
    if (!std::isfinite(single[k])) break;
    const XY p = field.position(k);
    bool far = true;
    for (std::size_t q : pool) {
      const XY o = field.position(q);
      if (std::hypot(p.x - o.x, p.y - o.y) < suppress) {
        far = false;
        break;
      }
    }
    if (far) pool.push_back(k);
    if (static_cast<int>(pool.size()) >= pool_size) break;
  }

  std::vector<std::size_t> chosen;
  for (int k = 0; k < problem.uav_count; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_node = 0;
    for (std::size_t cand : pool) {
      chosen.push_back(cand);
      const double v = search.score(chosen);
      if (v > best) {
        best = v;
        best_node = cand;
      }
      chosen.pop_back();
    }
    if (!std::isfinite(best)) return {};
    chosen.push_back(best_node);
  }
  return chosen;
}

inline std::vector<std::size_t> random_seed(const NodeField& field, const PatternSearch& search, int count,
                                            std::uint64_t seed, std::uint64_t restart) {
  std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(restart), 0x5eedu};
  std::mt19937_64 rng(sseq);
  std::uniform_int_distribution<std::size_t> pick(0, field.size() - 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::size_t> nodes(static_cast<std::size_t>(count));
    for (auto& n : nodes) n = pick(rng);
    if (std::isfinite(search.score(nodes))) return nodes;
  }
  return {};
}

}  // namespace detail

/// Multi-start pattern search on the map grid. Deterministic given the seed;
/// ties between starts resolve to the lexicographically smallest placement.
inline PlacementSolution map_search_placement(const PlacementProblem& problem, const CoverageMap& map,
                                              const SearchConfig& cfg = {}) {
  problem.validate();
  if (cfg.restarts < 0 || !(cfg.stride > 0.0)) throw ConfigError("map_search: restarts >= 0 and stride > 0 required");
  const detail::NodeField field(map, problem);
  const detail::PatternSearch search(field, problem, map);
  const int stride_nodes = std::max(1, static_cast<int>(std::lround(cfg.stride / map.resolution())));

  std::vector<std::vector<std::size_t>> seeds;
  seeds.push_back(detail::greedy_seed(field, search, problem, std::max(cfg.candidate_pool, problem.uav_count)));
  for (int r = 0; r < cfg.restarts; ++r)
    seeds.push_back(detail::random_seed(field, search, problem.uav_count, cfg.seed, static_cast<std::uint64_t>(r)));

  const auto results = parallel::map_indices<detail::SearchResult>(seeds.size(), [&](std::size_t i) {
    if (seeds[i].empty()) return detail::SearchResult{};
    return search.run(seeds[i], stride_nodes);
  });

  const detail::SearchResult* best = nullptr;
  for (const auto& r : results) {
    if (r.nodes.empty() || !std::isfinite(r.value)) continue;
    if (!best || r.value > best->value || (r.value == best->value && detail::lex_less(r.nodes, best->nodes)))
      best = &r;
  }
  if (!best) throw EvaluationError("map_search: no feasible placement found on the map");

  std::vector<std::size_t> nodes = best->nodes;
  std::sort(nodes.begin(), nodes.end());
  std::vector<XY> positions;
  for (auto k : nodes) positions.push_back(field.position(k));
  PlacementSolution sol = evaluate_on_map(positions, problem, map, PlacementMethod::map_search);
  sol.iterations = static_cast<int>(seeds.size());
  return sol;
}

}  // namespace skyplan
