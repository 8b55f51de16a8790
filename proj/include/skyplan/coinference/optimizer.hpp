#pragma once

// Joint split / pruning / power / frequency planner.
//
// For every (paradigm, split) branch the pruning ratio is searched in
// [0, rho_hi], where rho_hi is the largest ratio meeting the quality floor.
// Given (split, rho) the workload is fixed and the (p, f) subproblem reduces
// to sharing a time budget B between computing and transmitting:
// f = C / tau_c and p = (N0 W / g)(2^{D / (W tau_tx)} - 1), both clamped to
// their boxes. Energy is convex in tau_c, so golden-section search finds the
// minimum-energy split of any deadline. Minimum delay under an energy cap is
// the smallest deadline whose minimum energy fits the cap (bisection).

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "skyplan/coinference/model.hpp"
#include "skyplan/golden_section.hpp"
#include "skyplan/parallel.hpp"

namespace skyplan {

struct ParadigmComparison {
  Objective mode = Objective::min_energy;
  std::array<ExecutionPlan, 3> plans;  ///< indexed by Paradigm
  std::array<double, 3> objective{};   ///< NaN when infeasible
};

/// Value of the optimized metric (quality, delay or energy).
inline double objective_value(Objective mode, const QosTriple& q) {
  switch (mode) {
    case Objective::max_quality: return q.quality;
    case Objective::min_delay: return q.delay;
    case Objective::min_energy: return q.energy;
  }
  return q.energy;
}

/// True if a is strictly better than b under the mode.
inline bool strictly_better(Objective mode, double a, double b) {
  return mode == Objective::max_quality ? a > b : a < b;
}

inline void check_budget(Objective mode, const QosBudget& budget) {
  if (!(budget.t_max > 0.0)) throw ConfigError("budget: t_max must be > 0");
  if (!(budget.e_max > 0.0)) throw ConfigError("budget: e_max must be > 0");
  if (!(budget.q_min >= 0.0 && budget.q_min <= 1.0)) throw ConfigError("budget: q_min must lie in [0, 1]");
  if (mode == Objective::max_quality && budget.q_min > 0.0)
    throw ConfigError("budget: q_min must be relaxed (0) when maximizing quality");
  if (mode == Objective::min_delay && std::isfinite(budget.t_max))
    throw ConfigError("budget: t_max must be relaxed (inf) when minimizing delay");
  if (mode == Objective::min_energy && std::isfinite(budget.e_max))
    throw ConfigError("budget: e_max must be relaxed (inf) when minimizing energy");
}

namespace detail {

inline constexpr double kFeasTol = 1e-9;

inline bool within(double value, double cap) { return value <= cap * (1.0 + kFeasTol) || value <= cap; }

struct ResourceChoice {
  double p = 0.0;
  double f = 0.0;
  double energy = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

class BranchSolver {
 public:
  BranchSolver(const InferenceModelProfile& profile, const LinkProfile& link, const QosBudget& budget)
      : profile_(profile), link_(link), budget_(budget) {}

  /// Plan for fixed (split, rho, p, f) with the achieved triple filled in.
  ExecutionPlan make_plan(Paradigm paradigm, int split, double rho, double p, double f) const {
    ExecutionPlan plan{paradigm, split, rho, p, f, {}, true, {}};
    plan.achieved = evaluate_plan(plan, profile_, link_);
    plan.feasible = meets_budget(plan.achieved);
    return plan;
  }

  bool meets_budget(const QosTriple& q) const {
    return q.quality >= budget_.q_min * (1.0 - kFeasTol) && within(q.delay, budget_.t_max) &&
           within(q.energy, budget_.e_max);
  }

  /// Minimum IAA energy finishing the local compute and upload within
  /// `budget_s` seconds (cloud time already subtracted).
  ResourceChoice min_energy(const SplitCost& c, double budget_s) const {
    ResourceChoice r;
    if (!(budget_s > 0.0) && (c.iaa_cycles > 0.0 || c.upload_bits > 0.0)) return r;
    const double C = c.iaa_cycles, D = c.upload_bits;
    auto freq_for = [&](double tau) { return std::max(link_.f_min, C / tau); };
    auto power_for = [&](double tau) { return std::max(link_.p_min, link_.power_for(D, tau)); };
    auto energy = [&](double p, double f) {
      return link_.kappa * C * f * f + (D > 0.0 ? p * transmit_seconds(link_, D, p) : 0.0);
    };

    if (C <= 0.0 && D <= 0.0) return {link_.p_min, link_.f_min, 0.0, true};
    if (D > 0.0 && link_.rate(link_.p_max) <= 0.0) return r;
    if (!std::isfinite(budget_s)) return {link_.p_min, link_.f_min, energy(link_.p_min, link_.f_min), true};
    if (C <= 0.0) {
      const double p = power_for(budget_s);
      if (!within(p, link_.p_max)) return r;
      const double pc = std::min(p, link_.p_max);
      return {pc, link_.f_min, energy(pc, link_.f_min), true};
    }
    if (D <= 0.0) {
      const double f = freq_for(budget_s);
      if (!within(f, link_.f_max)) return r;
      const double fc = std::min(f, link_.f_max);
      return {link_.p_min, fc, energy(link_.p_min, fc), true};
    }
    const double tau_lo = C / link_.f_max;
    const double tau_hi = budget_s - D / link_.rate(link_.p_max);
    if (tau_hi < tau_lo) {
      if (tau_lo - tau_hi > kFeasTol * budget_s) return r;
      return {link_.p_max, link_.f_max, energy(link_.p_max, link_.f_max), true};
    }
    auto clamp_pf = [&](double tau_c) {
      const double f = std::min(freq_for(tau_c), link_.f_max);
      const double p = std::min(power_for(budget_s - tau_c), link_.p_max);
      return std::pair{p, f};
    };
    const auto best = golden_section_minimize(
        [&](double tau_c) {
          const auto [p, f] = clamp_pf(tau_c);
          return energy(p, f);
        },
        tau_lo, tau_hi);
    const auto [p, f] = clamp_pf(best.x);
    return {p, f, energy(p, f), true};
  }

  /// Fastest resources whose energy fits e_max.
  ResourceChoice min_delay(const SplitCost& c) const {
    ResourceChoice r;
    const double C = c.iaa_cycles, D = c.upload_bits;
    if (D > 0.0 && link_.rate(link_.p_max) <= 0.0) return r;
    auto energy = [&](double p, double f) {
      return link_.kappa * C * f * f + (D > 0.0 ? p * transmit_seconds(link_, D, p) : 0.0);
    };
    // Relevant knobs only; irrelevant ones sit at their lower bound.
    const double p_fast = D > 0.0 ? link_.p_max : link_.p_min;
    const double f_fast = C > 0.0 ? link_.f_max : link_.f_min;
    if (within(energy(p_fast, f_fast), budget_.e_max)) return {p_fast, f_fast, energy(p_fast, f_fast), true};
    const double e_floor = energy(link_.p_min, link_.f_min);
    if (!within(e_floor, budget_.e_max)) return r;

    const double t_fast = (C > 0.0 ? C / f_fast : 0.0) + transmit_seconds(link_, D, p_fast);
    const double t_slow = (C > 0.0 ? C / link_.f_min : 0.0) + transmit_seconds(link_, D, link_.p_min);
    ResourceChoice at_hi = min_energy(c, t_slow);
    double lo = t_fast, hi = t_slow;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      const ResourceChoice m = min_energy(c, mid);
      if (m.feasible && within(m.energy, budget_.e_max)) {
        hi = mid;
        at_hi = m;
      } else {
        lo = mid;
      }
    }
    return at_hi;
  }

  /// Best plan of one branch for the mode, or nullopt with a reason.
  std::optional<ExecutionPlan> solve(Objective mode, Paradigm paradigm, int split, double rho_max,
                                     std::string& reason) const {
    const bool prunable = split > 0;
    double rho_hi = 0.0;
    if (prunable && paradigm != Paradigm::on_cloud) {
      if (quality_of(profile_, 0.0) < budget_.q_min) {
        reason = "quality";
        return std::nullopt;
      }
      rho_hi = bisect_last_true([&](double r) { return quality_of(profile_, r) >= budget_.q_min; }, 0.0, rho_max);
    } else if (quality_of(profile_, 0.0) < budget_.q_min) {
      reason = "quality";
      return std::nullopt;
    }

    auto plan_at = [&](double rho) -> std::optional<ExecutionPlan> {
      const SplitCost c = split_cost(profile_, link_, split, rho);
      ResourceChoice rc;
      if (mode == Objective::min_delay) {
        rc = min_delay(c);
      } else {
        rc = min_energy(c, budget_.t_max - c.cloud_seconds);
        if (rc.feasible && !within(rc.energy, budget_.e_max)) rc.feasible = false;
      }
      if (!rc.feasible) return std::nullopt;
      ExecutionPlan plan = make_plan(paradigm, split, rho, rc.p, rc.f);
      if (!plan.feasible) return std::nullopt;
      return plan;
    };

    std::optional<ExecutionPlan> best;
    if (mode == Objective::max_quality) {
      // Quality falls with rho and feasibility improves with it: take the
      // smallest feasible ratio.
      if (auto p0 = plan_at(0.0)) return p0;
      if (!prunable || paradigm == Paradigm::on_cloud || !plan_at(rho_hi)) {
        reason = diagnose(split, prunable ? rho_hi : 0.0);
        return std::nullopt;
      }
      const double rho = bisect_first_true([&](double r) { return plan_at(r).has_value(); }, 0.0, rho_hi);
      best = plan_at(rho);
    } else {
      auto cost = [&](double rho) {
        const auto p = plan_at(rho);
        return p ? objective_value(mode, p->achieved) : std::numeric_limits<double>::infinity();
      };
      const auto m = golden_section_minimize(cost, 0.0, rho_hi);
      if (std::isfinite(m.value)) best = plan_at(m.x);
    }
    if (!best) reason = diagnose(split, rho_hi);
    return best;
  }

 private:
  // Names the constraint that cannot be met even with maximal pruning.
  std::string diagnose(int split, double rho) const {
    const SplitCost c = split_cost(profile_, link_, split, rho);
    const double C = c.iaa_cycles, D = c.upload_bits;
    if (D > 0.0 && link_.rate(link_.p_max) <= 0.0) return "delay";
    const double t_fast = (C > 0.0 ? C / link_.f_max : 0.0) + transmit_seconds(link_, D, link_.p_max) + c.cloud_seconds;
    if (!within(t_fast, budget_.t_max)) return "delay";
    const double e_floor = link_.kappa * C * link_.f_min * link_.f_min +
                           (D > 0.0 ? link_.p_min * transmit_seconds(link_, D, link_.p_min) : 0.0);
    if (!within(e_floor, budget_.e_max)) return "energy";
    return "delay+energy";
  }

  const InferenceModelProfile& profile_;
  const LinkProfile& link_;
  const QosBudget& budget_;
};

struct Branch {
  Paradigm paradigm;
  int split;
};

inline std::vector<Branch> branches_for(const InferenceModelProfile& profile, std::optional<Paradigm> only) {
  std::vector<Branch> out;
  auto want = [&](Paradigm p) { return !only || *only == p; };
  if (want(Paradigm::on_cloud)) out.push_back({Paradigm::on_cloud, 0});
  if (want(Paradigm::on_iaa)) out.push_back({Paradigm::on_iaa, profile.layer_count});
  if (want(Paradigm::co_inference))
    for (int s = 0; s <= profile.layer_count; ++s) out.push_back({Paradigm::co_inference, s});
  return out;
}

/// Tie-break on equal objective: smaller split, then rho, p, f.
inline bool plan_preferred(Objective mode, const ExecutionPlan& a, const ExecutionPlan& b) {
  const double va = objective_value(mode, a.achieved), vb = objective_value(mode, b.achieved);
  if (strictly_better(mode, va, vb)) return true;
  if (strictly_better(mode, vb, va)) return false;
  return std::tie(a.split, a.rho, a.p, a.f) < std::tie(b.split, b.rho, b.p, b.f);
}

}  // namespace detail

/// Optimizes the mode's metric subject to the other two QoS budgets. With
/// `only` set, the search is restricted to one paradigm. An infeasible result
/// has feasible = false and names the binding constraint per paradigm.
inline ExecutionPlan optimize_plan(Objective mode, const InferenceModelProfile& profile, const LinkProfile& link,
                                   const QosBudget& budget, double rho_max = 0.9,
                                   std::optional<Paradigm> only = std::nullopt) {
  profile.validate();
  link.validate();
  check_budget(mode, budget);
  if (!(rho_max >= 0.0 && rho_max < 1.0)) throw ConfigError("optimize_plan: rho_max must lie in [0, 1)");

  const detail::BranchSolver solver(profile, link, budget);
  const auto branches = detail::branches_for(profile, only);
  struct Outcome {
    std::optional<ExecutionPlan> plan;
    std::string reason;
  };
  const auto outcomes = parallel::map_indices<Outcome>(branches.size(), [&](std::size_t i) {
    Outcome o;
    o.plan = solver.solve(mode, branches[i].paradigm, branches[i].split, rho_max, o.reason);
    return o;
  });

  const ExecutionPlan* best = nullptr;
  for (const auto& o : outcomes)
    if (o.plan && (!best || detail::plan_preferred(mode, *o.plan, *best))) best = &*o.plan;
  if (best) return *best;

  // Infeasible everywhere: report the binding constraints per paradigm.
  std::array<std::set<std::string>, 3> reasons;
  for (std::size_t i = 0; i < branches.size(); ++i)
    reasons[static_cast<std::size_t>(branches[i].paradigm)].insert(outcomes[i].reason);
  ExecutionPlan plan;
  plan.paradigm = only.value_or(Paradigm::co_inference);
  plan.feasible = false;
  plan.achieved = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
  for (std::size_t p = 0; p < 3; ++p) {
    if (reasons[p].empty()) continue;
    if (!plan.infeasible_reason.empty()) plan.infeasible_reason += "; ";
    plan.infeasible_reason += std::string(to_string(static_cast<Paradigm>(p))) + ": ";
    bool first = true;
    for (const auto& r : reasons[p]) {
      plan.infeasible_reason += (first ? "" : "|") + r;
      first = false;
    }
  }
  return plan;
}

/// Best plan of each paradigm for the same mode and budget.
inline ParadigmComparison compare_paradigms(Objective mode, const InferenceModelProfile& profile,
                                            const LinkProfile& link, const QosBudget& budget, double rho_max = 0.9) {
  ParadigmComparison out;
  out.mode = mode;
  for (Paradigm p : {Paradigm::on_cloud, Paradigm::on_iaa, Paradigm::co_inference}) {
    const auto i = static_cast<std::size_t>(p);
    out.plans[i] = optimize_plan(mode, profile, link, budget, rho_max, p);
    out.objective[i] = out.plans[i].feasible ? objective_value(mode, out.plans[i].achieved)
                                             : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace skyplan
