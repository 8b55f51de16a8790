#include <cmath>

#include <gtest/gtest.h>

#include "skyplan/parallel.hpp"
#include "skyplan/placement/brute_force.hpp"
#include "skyplan/placement/map_search.hpp"
#include "skyplan/placement/sca.hpp"
#include "skyplan/synthesis.hpp"

using namespace skyplan;

namespace {

CoverageMap uniform_map(int nx, int ny, const std::vector<double>& per_beam) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.beam_count = static_cast<int>(per_beam.size());
  CoverageMap m(g);
  for (int b = 0; b < g.beam_count; ++b)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) m.set(b, ix, iy, per_beam[b]);
  return m;
}

PlacementProblem problem_for(const CoverageMap& m, int k, double sep = 10.0) {
  PlacementProblem p;
  p.uav_count = k;
  p.area = map_area(m);
  p.altitude = m.altitude();
  p.min_separation = sep;
  return p;
}

PlacementProblem scaled_problem(const SynthesisConfig& cfg, const CoverageMap& m, int k) {
  PlacementProblem p = problem_for(m, k);
  p.channel = cfg.channel;
  p.beams = cfg.beams;
  p.bs_position = cfg.bs_position;
  return p;
}

// LoS sum rate straight from the channel formulas, K = 1.
double los_rate_ref(const PlacementProblem& p, XY xy) {
  double best = -1e300, total = 0.0;
  std::vector<double> mw;
  for (const auto& b : p.beams) {
    const double r = los_rsrp(p.channel, b, p.bs_position, {xy.x, xy.y, p.altitude});
    mw.push_back(std::pow(10.0, r / 10.0));
    best = std::max(best, r);
  }
  for (double v : mw) total += v;
  const double s = std::pow(10.0, best / 10.0);
  const double sinr = s / (total - s + std::pow(10.0, p.channel.noise_power / 10.0));
  return p.channel.bandwidth * std::log2(1.0 + sinr);
}

}  // namespace

TEST(EvaluateOnMap, UniformFieldAnywhere) {
  const CoverageMap m = uniform_map(5, 5, {-90.0});
  PlacementProblem p = problem_for(m, 1);
  p.channel.noise_power = -90.0;
  const double w = p.channel.bandwidth;
  for (XY xy : {XY{0, 0}, XY{1.3, 2.7}, XY{4, 4}}) EXPECT_NEAR(evaluate_on_map({xy}, p, m).sum_rate, w, 1e-6);
}

TEST(EvaluateOnMap, SharedBeamSplitsBandwidth) {
  const CoverageMap m = uniform_map(30, 30, {-90.0});
  PlacementProblem p = problem_for(m, 2);
  p.channel.noise_power = -90.0 - 10.0 * std::log10(3.0);  // sinr 3
  const auto s = evaluate_on_map({{0, 0}, {20, 20}}, p, m);
  EXPECT_NEAR(s.per_uav_rate[0], p.channel.bandwidth / 2 * 2.0, 1e-3);
  EXPECT_NEAR(s.per_uav_rate[1], p.channel.bandwidth / 2 * 2.0, 1e-3);
  EXPECT_DOUBLE_EQ(s.sum_rate, s.per_uav_rate[0] + s.per_uav_rate[1]);
}

TEST(EvaluateOnMap, DifferentBeamsAreIndependent) {
  GridSpec g;
  g.nx = 21;
  g.ny = 2;
  g.beam_count = 2;
  CoverageMap m(g);
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 21; ++ix) {
      m.set(0, ix, iy, ix < 10 ? -70.0 : -100.0);
      m.set(1, ix, iy, ix < 10 ? -100.0 : -75.0);
    }
  PlacementProblem p = problem_for(m, 2);
  const auto both = evaluate_on_map({{0, 0}, {20, 0}}, p, m);
  p.uav_count = 1;
  const auto a = evaluate_on_map({{0, 0}}, p, m);
  const auto b = evaluate_on_map({{20, 0}}, p, m);
  EXPECT_EQ(both.serving_beam, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(both.per_uav_rate[0], a.sum_rate);
  EXPECT_DOUBLE_EQ(both.per_uav_rate[1], b.sum_rate);
}

TEST(EvaluateOnMap, Errors) {
  const CoverageMap m = uniform_map(30, 30, {-90.0});
  PlacementProblem p = problem_for(m, 2);
  EXPECT_THROW(evaluate_on_map({{0, 0}, {3, 4}}, p, m), ConstraintError);
  EXPECT_THROW(evaluate_on_map({{0, 0}, {40, 4}}, p, m), EvaluationError);
  EXPECT_THROW(evaluate_on_map({{0, 0}}, p, m), ConstraintError);
}

TEST(Problem, RejectsOverfullArea) {
  const CoverageMap m = uniform_map(11, 11, {-90.0});
  EXPECT_THROW(problem_for(m, 5, 10.0).validate(), ConfigError);
  EXPECT_NO_THROW(problem_for(m, 4, 10.0).validate());
}

TEST(Sca, SingleBeamMatchesLosGridOptimum) {
  const CoverageMap m = uniform_map(201, 121, {-90.0});
  PlacementProblem p = problem_for(m, 1);
  p.bs_position = {-150, 60, 0};
  p.beams = {default_beam_layout()[3]};
  p.beams[0].elevation_center = 25.0;
  p.beams[0].azimuth_center = 5.0;
  // 1 m grid scan of the closed form.
  XY best{};
  double best_v = -1.0;
  for (int ix = 0; ix <= 200; ++ix)
    for (int iy = 0; iy <= 120; ++iy) {
      const double v = los_rate_ref(p, {1.0 * ix, 1.0 * iy});
      if (v > best_v) {
        best_v = v;
        best = {1.0 * ix, 1.0 * iy};
      }
    }
  for (XY init : {XY{0, 0}, XY{200, 120}, XY{100, 10}}) {
    const auto s = sca_los_placement(p, {init});
    EXPECT_LE(std::hypot(s.positions[0].x - best.x, s.positions[0].y - best.y), 2.0)
        << "from (" << init.x << "," << init.y << ")";
    EXPECT_GE(s.sum_rate, best_v * (1.0 - 1e-6));
  }
}

TEST(Sca, TwoUavSymmetricLayout) {
  const CoverageMap m = uniform_map(201, 121, {-90.0});
  PlacementProblem p = problem_for(m, 2, 50.0);
  p.bs_position = {-150, 60, 0};
  p.beams = default_beam_layout(0.0, 20.0, 2, 20.0);
  const auto s = sca_los_placement(p);
  EXPECT_TRUE(respects_separation(s.positions, 50.0));
  EXPECT_NE(s.serving_beam[0], s.serving_beam[1]);
  // Mirror images about the boresight line y = 60.
  EXPECT_NEAR(s.positions[0].x, s.positions[1].x, 2.0);
  EXPECT_NEAR(s.positions[0].y - 60.0, 60.0 - s.positions[1].y, 2.0);
  // Coarse 5 m exhaustive scan of the LoS pair objective.
  std::vector<XY> grid;
  for (int x = 0; x <= 200; x += 5)
    for (int y = 0; y <= 120; y += 5) grid.push_back({1.0 * x, 1.0 * y});
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j)
      if (std::hypot(grid[i].x - grid[j].x, grid[i].y - grid[j].y) >= 50.0)
        best = std::max(best, evaluate_los({grid[i], grid[j]}, p).sum_rate);
  EXPECT_GE(s.sum_rate, best * (1.0 - 1e-3));
}

TEST(Sca, TraceNonDecreasingAndScoredOnLos) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto cfg = scaled_synthesis_config(8.0, seed);
    const CoverageMap m = synthesize(cfg);
    for (int k = 1; k <= 4; ++k) {
      const auto p = scaled_problem(cfg, m, k);
      const auto s = sca_los_placement(p);
      ASSERT_FALSE(s.objective_trace.empty());
      for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
        EXPECT_GE(s.objective_trace[i], s.objective_trace[i - 1]);
      EXPECT_EQ(s.method, PlacementMethod::sca_los);
      EXPECT_DOUBLE_EQ(s.sum_rate, evaluate_los(s.positions, p).sum_rate);
      EXPECT_DOUBLE_EQ(s.objective_trace.back(), s.sum_rate);
      EXPECT_NO_THROW(check_feasible(s.positions, p));
    }
  }
}

TEST(Sca, RejectsInfeasibleInit) {
  const CoverageMap m = uniform_map(50, 50, {-90.0});
  const auto p = problem_for(m, 2, 10.0);
  EXPECT_THROW(sca_los_placement(p, {{0, 0}, {1, 1}}), ConstraintError);
  EXPECT_THROW(sca_los_placement(p, {{0, 0}, {100, 1}}), ConstraintError);
}

TEST(BruteForce, ThreeByThreeSingleMaximum) {
  CoverageMap m = uniform_map(3, 3, {-90.0});
  m.set(0, 2, 1, -80.0);
  PlacementProblem p = problem_for(m, 1, 0.0);
  p.channel.noise_power = -90.0;
  const auto s = brute_force_placement(p, m);
  EXPECT_EQ(s.positions[0], (XY{2, 1}));
  EXPECT_DOUBLE_EQ(s.sum_rate, p.channel.bandwidth * std::log2(1.0 + 10.0));
  EXPECT_EQ(s.method, PlacementMethod::brute_force);
}

TEST(BruteForce, PairsMatchHandEnumeration) {
  // Two strong far-apart cells on different beams.
  GridSpec g;
  g.nx = 3;
  g.ny = 3;
  g.beam_count = 2;
  g.resolution = 10.0;
  CoverageMap m(g);
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 3; ++ix) {
      m.set(0, ix, iy, -95.0 + ix);
      m.set(1, ix, iy, -96.0 + iy);
    }
  m.set(0, 0, 2, -70.0);
  m.set(1, 2, 0, -72.0);
  const PlacementProblem p = problem_for(m, 2, 10.0);
  double best = -1.0;
  std::vector<XY> arg;
  for (int a = 0; a < 9; ++a)
    for (int b = a + 1; b < 9; ++b) {
      const std::vector<XY> pos{{10.0 * (a % 3), 10.0 * (a / 3)}, {10.0 * (b % 3), 10.0 * (b / 3)}};
      const double v = evaluate_on_map(pos, p, m).sum_rate;
      if (v > best) best = v, arg = pos;
    }
  const auto s = brute_force_placement(p, m);
  EXPECT_DOUBLE_EQ(s.sum_rate, best);
  std::vector<XY> got = s.positions;
  std::sort(got.begin(), got.end());
  std::sort(arg.begin(), arg.end());
  EXPECT_EQ(got, arg);
  EXPECT_EQ(got, (std::vector<XY>{{0, 20}, {20, 0}}));
}

TEST(BruteForce, FinerGridNeverWorse) {
  const auto cfg = scaled_synthesis_config(8.0, 5);
  const CoverageMap m = synthesize(cfg);
  for (int k = 1; k <= 2; ++k) {
    const auto p = scaled_problem(cfg, m, k);
    EXPECT_GE(brute_force_placement(p, m, 1).sum_rate, brute_force_placement(p, m, 4).sum_rate);
  }
}

TEST(BruteForce, RefusesLargeK) {
  const auto cfg = scaled_synthesis_config(8.0, 5);
  const CoverageMap m = synthesize(cfg);
  EXPECT_THROW(brute_force_placement(scaled_problem(cfg, m, 3), m), SizeError);
}

TEST(MapSearch, SingleUavEqualsBruteForce) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto cfg = scaled_synthesis_config(seed % 2 ? 8.0 : 0.0, seed);
    const CoverageMap m = synthesize(cfg);
    const auto p = scaled_problem(cfg, m, 1);
    const auto search = map_search_placement(p, m);
    const auto brute = brute_force_placement(p, m);
    EXPECT_EQ(search.sum_rate, brute.sum_rate) << "seed " << seed;
    EXPECT_EQ(search.positions, brute.positions);
  }
}

TEST(MapSearch, DominantCell) {
  CoverageMap m = uniform_map(40, 30, {-100.0, -101.0});
  m.set(1, 33, 7, -60.0);
  PlacementProblem p = problem_for(m, 1);
  const auto s = map_search_placement(p, m);
  EXPECT_EQ(s.positions[0], (XY{33, 7}));
  EXPECT_EQ(s.serving_beam[0], 1);
}

TEST(MapSearch, DeterministicAndOrderedAgainstOracle) {
  const auto cfg = scaled_synthesis_config(8.0, 8);
  const CoverageMap m = synthesize(cfg);
  const auto p = scaled_problem(cfg, m, 2);
  const auto a = map_search_placement(p, m);
  const auto b = map_search_placement(p, m);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.sum_rate, b.sum_rate);
  EXPECT_DOUBLE_EQ(a.sum_rate, evaluate_on_map(a.positions, p, m).sum_rate);
  const auto brute = brute_force_placement(p, m);
  EXPECT_GE(brute.sum_rate, a.sum_rate);
  SearchConfig single;
  single.restarts = 0;
  EXPECT_GE(a.sum_rate, map_search_placement(p, m, single).sum_rate);
}

TEST(MapSearch, FeasibleForLargerK) {
  const auto cfg = scaled_synthesis_config(8.0, 2);
  const CoverageMap m = synthesize(cfg);
  for (int k = 3; k <= 6; ++k) {
    const auto p = scaled_problem(cfg, m, k);
    const auto s = map_search_placement(p, m);
    EXPECT_NO_THROW(check_feasible(s.positions, p));
    EXPECT_DOUBLE_EQ(s.sum_rate, evaluate_on_map(s.positions, p, m).sum_rate);
  }
}

TEST(MapSearch, ThreadCountDoesNotMatter) {
  const auto cfg = scaled_synthesis_config(8.0, 12);
  const CoverageMap m = synthesize(cfg);
  const auto p = scaled_problem(cfg, m, 3);
  parallel::set_thread_count(1);
  const auto one = map_search_placement(p, m);
  const auto brute_one = brute_force_placement(scaled_problem(cfg, m, 2), m, 3);
  parallel::set_thread_count(4);
  const auto four = map_search_placement(p, m);
  const auto brute_four = brute_force_placement(scaled_problem(cfg, m, 2), m, 3);
  parallel::set_thread_count(0);
  EXPECT_EQ(one.positions, four.positions);
  EXPECT_EQ(one.sum_rate, four.sum_rate);
  EXPECT_EQ(brute_one.positions, brute_four.positions);
}

TEST(MapSearch, BeatsLosBenchmarkOnShadowedMaps) {
  for (std::uint64_t seed = 30; seed < 34; ++seed) {
    const auto cfg = scaled_synthesis_config(6.0, seed);
    const CoverageMap m = synthesize(cfg);
    for (int k = 1; k <= 3; ++k) {
      const auto p = scaled_problem(cfg, m, k);
      const auto sca = evaluate_on_map(sca_los_placement(p).positions, p, m);
      EXPECT_GE(map_search_placement(p, m).sum_rate, sca.sum_rate);
    }
  }
}
