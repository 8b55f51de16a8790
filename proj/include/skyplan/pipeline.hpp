#pragma once

// Five-stage scenario runner: offline placement on the idealized channel,
// stencil sensing of the true map, rate realization, co-inference planning on
// the realized link, and greedy closed-loop repositioning.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "skyplan/coinference/optimizer.hpp"
#include "skyplan/coverage_map.hpp"
#include "skyplan/placement/problem.hpp"
#include "skyplan/placement/sca.hpp"

namespace skyplan {

class StageError : public std::runtime_error {
 public:
  StageError(int stage, const std::string& name, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + " (" + name + "): " + what), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

struct AdaptationConfig {
  int max_rounds = 10;
  double step = 5.0;       ///< stencil spacing, m
  double epsilon = 1e-3;   ///< relative improvement that ends adaptation
  double sensing_noise_db = 0.0;
  std::uint64_t seed = 1;
};

struct InferenceSetup {
  InferenceModelProfile profile = default_profile();
  LinkProfile link;
  QosBudget budget{kUnbounded, 1.0, 0.0};
  Objective mode = Objective::min_delay;
  double rho_max = 0.9;
};

struct ScenarioConfig {
  CoverageMap true_map;
  ChannelModel predicted_channel;
  PlacementProblem placement_problem;
  InferenceSetup inference;
  AdaptationConfig adaptation;
  ScaOptions sca;
  std::optional<std::vector<XY>> initial_positions;  ///< SCA start; greedy LoS grid when unset

  void validate() const {
    if (adaptation.max_rounds < 0) throw ConfigError("pipeline: max_rounds must be >= 0");
    if (!(adaptation.step >= true_map.resolution())) throw ConfigError("pipeline: step must be >= map resolution");
    if (!(adaptation.epsilon > 0.0)) throw ConfigError("pipeline: epsilon must be > 0");
    if (!(adaptation.sensing_noise_db >= 0.0)) throw ConfigError("pipeline: sensing noise must be >= 0");
  }
};

struct RoundRecord {
  int round = 0;
  std::vector<XY> positions;
  std::vector<int> serving_beam;
  std::vector<double> per_uav_rate;
  double map_sum_rate = 0.0;
  ExecutionPlan plan;
  double improvement = std::numeric_limits<double>::quiet_NaN();  ///< relative; NaN for round 0
};

struct ScenarioReport {
  std::vector<RoundRecord> rounds;
  PlacementSolution offline;  ///< SCA result under the predicted channel
  double initial_sum_rate = 0.0;
  double final_sum_rate = 0.0;
  int rounds_used = 0;
  std::string termination;
};

namespace detail {

template <class F>
auto run_stage(int stage, const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, name, e.what());
  }
}

/// Linear gain of the serving link of UAV 0 seen on the true map.
inline double serving_link_gain(const CoverageMap& map, const PlacementSolution& sol, double tx_power_dbm) {
  const auto rsrp = sample_rsrp(map, sol.positions.front(), sol.serving_beam.front());
  if (!rsrp) throw EvaluationError("NODATA at the planning UAV");
  return db_to_linear(*rsrp - tx_power_dbm);
}

struct Sensed {
  XY pos;
  BeamSinr link;
};

}  // namespace detail

inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const CoverageMap& map = cfg.true_map;
  const PlacementProblem& truth = cfg.placement_problem;
  PlacementProblem predicted = truth;
  predicted.channel = cfg.predicted_channel;
  const double noise = truth.channel.noise_power;

  ScenarioReport report;
  report.offline = detail::run_stage(1, "offline initialization", [&] {
    const std::vector<XY> init = cfg.initial_positions ? *cfg.initial_positions : greedy_los_init(predicted);
    return sca_los_placement(predicted, init, cfg.sca);
  });

  auto realize = [&](const std::vector<XY>& positions) {
    return detail::run_stage(3, "transmission", [&] { return evaluate_on_map(positions, truth, map); });
  };
  auto plan_for = [&](const PlacementSolution& realized) {
    return detail::run_stage(4, "execution", [&] {
      LinkProfile link = cfg.inference.link;
      link.channel_gain = detail::serving_link_gain(map, realized, truth.channel.tx_power_per_beam);
      return optimize_plan(cfg.inference.mode, cfg.inference.profile, link, cfg.inference.budget,
                           cfg.inference.rho_max);
    });
  };
  auto record = [&](int round, const PlacementSolution& realized, double improvement) {
    RoundRecord r;
    r.round = round;
    r.positions = realized.positions;
    r.serving_beam = realized.serving_beam;
    r.per_uav_rate = realized.per_uav_rate;
    r.map_sum_rate = realized.sum_rate;
    r.plan = plan_for(realized);
    r.improvement = improvement;
    report.rounds.push_back(std::move(r));
  };

  PlacementSolution current = realize(report.offline.positions);
  record(0, current, std::numeric_limits<double>::quiet_NaN());
  report.initial_sum_rate = current.sum_rate;
  report.termination = "adaptation_disabled";

  const double step = cfg.adaptation.step;
  const XY offsets[5] = {{0, 0}, {step, 0}, {-step, 0}, {0, step}, {0, -step}};
  for (int round = 1; round <= cfg.adaptation.max_rounds; ++round) {
    std::vector<XY> positions = current.positions;

    // Stage 2: stencil samples of the true map (optionally noisy).
    const auto sensed = detail::run_stage(2, "sensing", [&] {
      std::seed_seq sseq{static_cast<std::uint32_t>(cfg.adaptation.seed), static_cast<std::uint32_t>(round), 0x5e45u};
      std::mt19937_64 rng(sseq);
      std::normal_distribution<double> jitter(0.0, cfg.adaptation.sensing_noise_db);
      std::vector<std::vector<std::optional<detail::Sensed>>> out(positions.size());
      for (std::size_t k = 0; k < positions.size(); ++k)
        for (const XY& o : offsets) {
          const XY p{positions[k].x + o.x, positions[k].y + o.y};
          if (!map.contains(p.x, p.y) || !truth.area.contains(p)) {
            out[k].push_back(std::nullopt);
            continue;
          }
          std::vector<double> rsrp(static_cast<std::size_t>(map.beam_count()));
          bool ok = true;
          for (int b = 0; b < map.beam_count(); ++b) {
            const auto v = sample_rsrp(map, p, b);
            if (!v) ok = false;
            rsrp[static_cast<std::size_t>(b)] = v.value_or(kRsrpMin) +
                                                (cfg.adaptation.sensing_noise_db > 0.0 ? jitter(rng) : 0.0);
          }
          if (!ok) {
            out[k].push_back(std::nullopt);
            continue;
          }
          out[k].push_back(detail::Sensed{p, sinr_from_rsrp(rsrp.data(), map.beam_count(), noise)});
        }
      return out;
    });

    // Stage 5: per-UAV greedy move on the sensed stencil, kept only if the
    // realized map sum rate improves.
    PlacementSolution adapted = current;
    std::vector<BeamSinr> links;
    for (std::size_t k = 0; k < positions.size(); ++k)
      links.push_back(sensed[k][0] ? sensed[k][0]->link : BeamSinr{current.serving_beam[k], current.sinr[k]});
    for (std::size_t k = 0; k < positions.size(); ++k) {
      auto estimate = [&](const std::vector<BeamSinr>& l) {
        PlacementSolution s;
        for (const auto& x : l) {
          s.serving_beam.push_back(x.beam);
          s.sinr.push_back(x.sinr);
        }
        assign_rates(s, truth.channel.bandwidth);
        return s.sum_rate;
      };
      double best_est = estimate(links);
      std::optional<std::size_t> best_j;
      for (std::size_t j = 1; j < 5; ++j) {
        if (!sensed[k][j]) continue;
        std::vector<XY> trial = positions;
        trial[k] = sensed[k][j]->pos;
        if (!respects_separation(trial, truth.min_separation)) continue;
        auto trial_links = links;
        trial_links[k] = sensed[k][j]->link;
        const double est = estimate(trial_links);
        if (est > best_est) {
          best_est = est;
          best_j = j;
        }
      }
      if (!best_j) continue;
      std::vector<XY> trial = positions;
      trial[k] = sensed[k][*best_j]->pos;
      PlacementSolution realized = realize(trial);
      if (realized.sum_rate > adapted.sum_rate) {
        positions = trial;
        adapted = std::move(realized);
        links[k] = sensed[k][*best_j]->link;
      }
    }

    const double improvement = (adapted.sum_rate - current.sum_rate) / current.sum_rate;
    current = std::move(adapted);
    record(round, current, improvement);
    if (improvement < cfg.adaptation.epsilon) {
      report.termination = "converged_round_" + std::to_string(round);
      break;
    }
    if (round == cfg.adaptation.max_rounds) report.termination = "max_rounds";
  }

  report.final_sum_rate = current.sum_rate;
  report.rounds_used = static_cast<int>(report.rounds.size()) - 1;
  return report;
}

}  // namespace skyplan
