#pragma once

// Successive convex approximation benchmark for sum-rate placement under the
// idealized LoS channel.
//
// Each outer iteration first fixes the beam association (argmax LoS RSRP) and
// the resulting bandwidth shares, then updates UAVs one at a time. For UAV k
// with share w, serving power S(p) and interference-plus-noise I(p), the rate
// w*[log2(S + I) - log2(I)] is lower-bounded around the current iterate q by
//
//   u(p) = w*[log2(S(p) + I(p)) - log2 I(q) - grad log2 I(q) . (p - q)]
//          - (c/2) |p - q|^2,
//
// which touches the rate at q with the same gradient. The surrogate is
// maximized by projected gradient ascent with backtracking over the area; the
// step is then pushed out of other UAVs' separation disks. A step is kept
// only if the LoS sum rate does not drop, otherwise c grows and the surrogate
// is re-solved, so the objective trace is non-decreasing.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "skyplan/channel.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

struct ScaOptions {
  double tol = 1e-4;  ///< relative sum-rate improvement that ends the loop
  int max_iter = 200;
};

namespace detail {

struct LinkTerms {
  double signal = 0.0;    ///< mW
  double interf = 0.0;    ///< mW, other beams plus noise
  std::array<double, 2> d_signal{};
  std::array<double, 2> d_interf{};
};

inline LinkTerms los_link_terms(const PlacementProblem& problem, XY p, int serving) {
  const Position3D pos{p.x, p.y, problem.altitude};
  LinkTerms t;
  t.interf = dbm_to_mw(problem.channel.noise_power);
  constexpr double k = std::numbers::ln10 / 10.0;
  for (std::size_t b = 0; b < problem.beams.size(); ++b) {
    const double r = los_rsrp(problem.channel, problem.beams[b], problem.bs_position, pos);
    const auto g = los_rsrp_gradient_xy(problem.channel, problem.beams[b], problem.bs_position, pos);
    const double mw = dbm_to_mw(r);
    if (static_cast<int>(b) == serving) {
      t.signal = mw;
      t.d_signal = {mw * k * g[0], mw * k * g[1]};
    } else {
      t.interf += mw;
      t.d_interf[0] += mw * k * g[0];
      t.d_interf[1] += mw * k * g[1];
    }
  }
  return t;
}

inline XY clamp_to_area(XY p, const Area& a) {
  return {std::clamp(p.x, a.x_min, a.x_max), std::clamp(p.y, a.y_min, a.y_max)};
}

/// Pushes p out of the separation disks of the other UAVs while staying in
/// the area. Returns false if no feasible point was reached.
inline bool push_out_of_disks(XY& p, const std::vector<XY>& others, double min_sep, const Area& area) {
  if (min_sep <= 0.0 || others.empty()) return true;
  for (int round = 0; round < 20; ++round) {
    bool moved = false;
    for (const auto& o : others) {
      const double dx = p.x - o.x, dy = p.y - o.y;
      const double d = std::hypot(dx, dy);
      if (d >= min_sep) continue;
      const double target = min_sep * (1.0 + 1e-9);
      if (d < 1e-12) {
        p.x = o.x + target;
      } else {
        p.x = o.x + dx / d * target;
        p.y = o.y + dy / d * target;
      }
      p = clamp_to_area(p, area);
      moved = true;
    }
    if (!moved) break;
  }
  for (const auto& o : others)
    if (std::hypot(p.x - o.x, p.y - o.y) < min_sep) return false;
  return true;
}

class ScaSolver {
 public:
  ScaSolver(const PlacementProblem& problem, ScaOptions options) : problem_(problem), options_(options) {}

  double objective(const std::vector<XY>& positions) const {
    return score_with(positions, problem_, LosField(problem_), PlacementMethod::sca_los).sum_rate;
  }

  PlacementSolution run(std::vector<XY> positions) {
    check_feasible(positions, problem_);
    curvature_.assign(positions.size(), 0.0);
    double current = objective(positions);

    PlacementSolution out;
    out.objective_trace.push_back(current);
    int it = 0;
    bool converged = false;
    while (it < options_.max_iter) {
      ++it;
      const double before = current;
      const PlacementSolution assoc = score_with(positions, problem_, LosField(problem_), PlacementMethod::sca_los);
      std::vector<int> load(problem_.beams.size(), 0);
      for (int b : assoc.serving_beam) ++load[static_cast<std::size_t>(b)];

      for (std::size_t k = 0; k < positions.size(); ++k) {
        const int beam = assoc.serving_beam[k];
        const double share = 1.0 / load[static_cast<std::size_t>(beam)];
        update_uav(positions, k, beam, share, current);
      }

      current = std::max(objective(positions), current);
      out.objective_trace.push_back(current);
      if (current - before <= options_.tol * std::max(before, std::numeric_limits<double>::min())) {
        converged = true;
        break;
      }
    }

    PlacementSolution sol = score_with(positions, problem_, LosField(problem_), PlacementMethod::sca_los);
    sol.iterations = it;
    sol.objective_trace = std::move(out.objective_trace);
    sol.max_iter_reached = !converged;
    return sol;
  }

 private:
  // Surrogate value and gradient, normalized by the bandwidth.
  struct Surrogate {
    const PlacementProblem* problem;
    XY center;
    int beam;
    double share;
    double c;
    double log_interf_center;
    std::array<double, 2> grad_log_interf_center;

    double value(XY p) const {
      const LinkTerms t = los_link_terms(*problem, p, beam);
      const double lin = log_interf_center + grad_log_interf_center[0] * (p.x - center.x) +
                         grad_log_interf_center[1] * (p.y - center.y);
      const double dx = p.x - center.x, dy = p.y - center.y;
      return share * (std::log2(t.signal + t.interf) - lin) - 0.5 * c * (dx * dx + dy * dy);
    }

    std::array<double, 2> gradient(XY p) const {
      const LinkTerms t = los_link_terms(*problem, p, beam);
      const double tot = (t.signal + t.interf) * std::numbers::ln2;
      return {share * ((t.d_signal[0] + t.d_interf[0]) / tot - grad_log_interf_center[0]) - c * (p.x - center.x),
              share * ((t.d_signal[1] + t.d_interf[1]) / tot - grad_log_interf_center[1]) - c * (p.y - center.y)};
    }
  };

  XY maximize_surrogate(const Surrogate& s) const {
    XY p = s.center;
    double step = 1.0 / s.c;
    double val = s.value(p);
    for (int it = 0; it < 200; ++it) {
      const auto g = s.gradient(p);
      XY next = p;
      double next_val = val;
      bool found = false;
      for (int bt = 0; bt < 60; ++bt) {
        next = clamp_to_area({p.x + step * g[0], p.y + step * g[1]}, problem_.area);
        next_val = s.value(next);
        const double ascent = g[0] * (next.x - p.x) + g[1] * (next.y - p.y);
        if (next_val >= val + 1e-4 * ascent) {
          found = true;
          break;
        }
        step *= 0.5;
      }
      if (!found) break;
      const double moved = std::hypot(next.x - p.x, next.y - p.y);
      p = next;
      val = next_val;
      if (moved < 1e-6) break;
      step *= 2.0;
    }
    return p;
  }

  void update_uav(std::vector<XY>& positions, std::size_t k, int beam, double share, double& current) {
    const XY q = positions[k];
    const LinkTerms t = los_link_terms(problem_, q, beam);
    Surrogate s{&problem_, q, beam, share, 0.0, std::log2(t.interf),
                {t.d_interf[0] / (t.interf * std::numbers::ln2), t.d_interf[1] / (t.interf * std::numbers::ln2)}};

    double& c = curvature_[k];
    if (c <= 0.0) {
      // First step of about 5 m along the true gradient.
      const double tot = (t.signal + t.interf) * std::numbers::ln2;
      const double gx = share * ((t.d_signal[0] + t.d_interf[0]) / tot - s.grad_log_interf_center[0]);
      const double gy = share * ((t.d_signal[1] + t.d_interf[1]) / tot - s.grad_log_interf_center[1]);
      c = std::max(std::hypot(gx, gy) / 5.0, 1e-9);
    }

    std::vector<XY> others;
    for (std::size_t j = 0; j < positions.size(); ++j)
      if (j != k) others.push_back(positions[j]);

    for (int attempt = 0; attempt < 40; ++attempt) {
      s.c = c;
      XY candidate = maximize_surrogate(s);
      if (candidate == q) return;
      if (!push_out_of_disks(candidate, others, problem_.min_separation, problem_.area)) {
        c *= 4.0;
        continue;
      }
      positions[k] = candidate;
      const double value = objective(positions);
      if (value >= current) {
        current = value;
        c = std::max(c * 0.5, 1e-12);
        return;
      }
      positions[k] = q;
      c *= 4.0;
    }
  }

  const PlacementProblem& problem_;
  ScaOptions options_;
  std::vector<double> curvature_;
};

}  // namespace detail

/// Greedy coarse-grid start: UAVs are added one at a time at the grid point
/// that maximizes the LoS sum rate of the partial placement.
inline std::vector<XY> greedy_los_init(const PlacementProblem& problem, double stride = 10.0) {
  problem.validate();
  std::vector<XY> grid;
  for (double x = problem.area.x_min; x <= problem.area.x_max + 1e-9; x += stride)
    for (double y = problem.area.y_min; y <= problem.area.y_max + 1e-9; y += stride) grid.push_back({x, y});

  PlacementProblem partial = problem;
  std::vector<XY> chosen;
  for (int k = 0; k < problem.uav_count; ++k) {
    partial.uav_count = k + 1;
    double best = -1.0;
    XY best_p{};
    for (const XY& p : grid) {
      chosen.push_back(p);
      if (respects_separation(chosen, problem.min_separation)) {
        const double v = score_with(chosen, partial, LosField(partial), PlacementMethod::sca_los).sum_rate;
        if (v > best) {
          best = v;
          best_p = p;
        }
      }
      chosen.pop_back();
    }
    if (best < 0.0) throw ConfigError("greedy_los_init: no feasible grid point for UAV " + std::to_string(k));
    chosen.push_back(best_p);
  }
  return chosen;
}

/// Runs SCA from `init`. The returned solution is scored with the LoS model;
/// use evaluate_on_map for the ground truth.
inline PlacementSolution sca_los_placement(const PlacementProblem& problem, const std::vector<XY>& init,
                                           ScaOptions options = {}) {
  problem.validate();
  if (!(options.tol > 0.0)) throw ConfigError("sca: tol must be > 0");
  if (options.max_iter < 1) throw ConfigError("sca: max_iter must be >= 1");
  try {
    check_feasible(init, problem);
  } catch (const ConstraintError& e) {
    throw ConstraintError(std::string("sca: infeasible initial placement: ") + e.what());
  }
  return detail::ScaSolver(problem, options).run(init);
}

inline PlacementSolution sca_los_placement(const PlacementProblem& problem, ScaOptions options = {}) {
  return sca_los_placement(problem, greedy_los_init(problem), options);
}

}  // namespace skyplan
