#pragma once

// Grid oracle for the co-inference planner: every paradigm and split times
// uniform grids in rho, p and f.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "skyplan/coinference/model.hpp"
#include "skyplan/coinference/optimizer.hpp"
#include "skyplan/error.hpp"
#include "skyplan/parallel.hpp"

namespace skyplan {

struct OracleGrid {
  int n_rho = 60;
  int n_p = 60;
  int n_f = 60;
};

inline constexpr int kOracleMaxGrid = 200;

namespace detail {
/// lo + (hi - lo) i / (n - 1); a single point sits at lo.
inline double grid_point(double lo, double hi, int i, int n) {
  return n == 1 ? lo : (i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
}
}  // namespace detail

/// Exact optimum over the grid; infeasible result carries feasible = false.
/// Ties keep the smaller split, then smaller rho, p and f.
inline ExecutionPlan brute_force_plan(Objective mode, const InferenceModelProfile& profile, const LinkProfile& link,
                                      const QosBudget& budget, OracleGrid grid = {}, double rho_max = 0.9,
                                      std::optional<Paradigm> only = std::nullopt) {
  profile.validate();
  link.validate();
  check_budget(mode, budget);
  for (int n : {grid.n_rho, grid.n_p, grid.n_f})
    if (n < 1 || n > kOracleMaxGrid) throw SizeError("brute_force_plan: grid sizes must lie in [1, 200]");

  std::vector<double> rhos(static_cast<std::size_t>(grid.n_rho)), ps(static_cast<std::size_t>(grid.n_p)),
      fs(static_cast<std::size_t>(grid.n_f));
  for (int i = 0; i < grid.n_rho; ++i) rhos[static_cast<std::size_t>(i)] = detail::grid_point(0.0, rho_max, i, grid.n_rho);
  for (int i = 0; i < grid.n_p; ++i) ps[static_cast<std::size_t>(i)] = detail::grid_point(link.p_min, link.p_max, i, grid.n_p);
  for (int i = 0; i < grid.n_f; ++i) fs[static_cast<std::size_t>(i)] = detail::grid_point(link.f_min, link.f_max, i, grid.n_f);

  const detail::BranchSolver eval(profile, link, budget);
  const auto branches = detail::branches_for(profile, only);
  const auto bests = parallel::map_indices<std::optional<ExecutionPlan>>(branches.size(), [&](std::size_t bi) {
    const auto [paradigm, split] = branches[bi];
    const bool prunable = split > 0 && paradigm != Paradigm::on_cloud;
    std::optional<ExecutionPlan> best;
    for (double rho : rhos) {
      if (!prunable && rho > 0.0) break;
      const double q = quality_of(profile, rho);
      if (q < budget.q_min) break;
      const SplitCost c = split_cost(profile, link, split, rho);
      // Knobs that do not act on the workload stay at their first grid value.
      const std::size_t np = c.upload_bits > 0.0 ? ps.size() : 1;
      const std::size_t nf = c.iaa_cycles > 0.0 ? fs.size() : 1;
      for (std::size_t ip = 0; ip < np; ++ip) {
        const double p = ps[ip];
        const double tx = transmit_seconds(link, c.upload_bits, p);
        const double tx_energy = c.upload_bits > 0.0 ? p * tx : 0.0;
        for (std::size_t jf = 0; jf < nf; ++jf) {
          const double f = fs[jf];
          const double delay = (c.iaa_cycles > 0.0 ? c.iaa_cycles / f : 0.0) + tx + c.cloud_seconds;
          const double energy = link.kappa * c.iaa_cycles * f * f + tx_energy;
          if (!(delay <= budget.t_max) || !(energy <= budget.e_max)) continue;
          const double v = objective_value(mode, {q, delay, energy});
          if (!best || strictly_better(mode, v, objective_value(mode, best->achieved)))
            best = eval.make_plan(paradigm, split, rho, p, f);
        }
      }
    }
    return best;
  });

  const ExecutionPlan* best = nullptr;
  for (const auto& b : bests)
    if (b && (!best || detail::plan_preferred(mode, *b, *best))) best = &*b;
  if (best) return *best;
  ExecutionPlan none;
  none.paradigm = only.value_or(Paradigm::co_inference);
  none.feasible = false;
  none.infeasible_reason = "no grid point satisfies the budget";
  none.achieved = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  return none;
}

}  // namespace skyplan
