#pragma once

// Cost and quality models for pruning-aware split inference between an
// aerial agent (IAA) and the cloud.
//
//   C_iaa  = cycles_per_flop * (1 - rho) * sum(flops[1..s])
//   C_cloud = cloud_cycles_per_flop * sum(flops[s+1..L])
//   r(p)   = W log2(1 + p g / (N0 W))
//   T      = C_iaa / f + D(s) / r(p) + C_cloud / f_cloud
//   E      = kappa C_iaa f^2 + p D(s) / r(p)          (IAA side only)

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skyplan/channel.hpp"
#include "skyplan/error.hpp"

namespace skyplan {

struct QualityPoint {
  double rho = 0.0;
  double quality = 0.0;
};

struct InferenceModelProfile {
  int layer_count = 12;
  std::vector<double> flops_per_layer;       ///< FLOPs, size L
  std::vector<double> activation_bits;       ///< bits if split after layer s, size L + 1
  double q_max = 0.40;
  double gamma = 1.5;
  std::vector<QualityPoint> quality_table;   ///< optional, overrides q_max (1 - rho)^gamma

  void validate() const {
    if (layer_count < 1) throw ConfigError("profile: layer_count must be >= 1");
    if (static_cast<int>(flops_per_layer.size()) != layer_count)
      throw ConfigError("profile: flops_per_layer must have layer_count entries");
    if (static_cast<int>(activation_bits.size()) != layer_count + 1)
      throw ConfigError("profile: activation_bits must have layer_count + 1 entries");
    for (double f : flops_per_layer)
      if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("profile: flops_per_layer must be > 0");
    for (double d : activation_bits)
      if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("profile: activation_bits must be >= 0");
    if (!(q_max >= 0.0 && q_max <= 1.0)) throw ConfigError("profile: q_max must lie in [0, 1]");
    if (!(gamma > 0.0)) throw ConfigError("profile: gamma must be > 0");
    if (!quality_table.empty()) {
      if (quality_table.front().rho != 0.0) throw ConfigError("profile: quality_table must start at rho = 0");
      if (std::abs(quality_table.front().quality - q_max) > 1e-12)
        throw ConfigError("profile: quality_table(0) must equal q_max");
      for (std::size_t i = 1; i < quality_table.size(); ++i) {
        if (!(quality_table[i].rho > quality_table[i - 1].rho))
          throw ConfigError("profile: quality_table rho values must increase");
        if (quality_table[i].quality > quality_table[i - 1].quality)
          throw ConfigError("profile: quality_table must be non-increasing in rho");
      }
    }
  }

  double flops_before(int split) const {
    return std::accumulate(flops_per_layer.begin(), flops_per_layer.begin() + split, 0.0);
  }
  double flops_after(int split) const {
    return std::accumulate(flops_per_layer.begin() + split, flops_per_layer.end(), 0.0);
  }
};

struct LinkProfile {
  double bandwidth = 10e6;          ///< Hz
  double channel_gain = 1e-11;      ///< linear power gain
  double noise_psd = -174.0;        ///< dBm/Hz
  double p_min = 0.01, p_max = 1.0; ///< W
  double f_min = 0.5e9, f_max = 2.0e9;  ///< Hz, IAA clock
  double cycles_per_flop = 1.0;
  double kappa = 1e-27;             ///< J / (cycle Hz^2)
  double f_cloud = 1.0e11;          ///< Hz, effective cloud throughput
  double cloud_cycles_per_flop = 1.0;

  void validate() const {
    if (!(bandwidth > 0.0)) throw ConfigError("link: bandwidth must be > 0");
    if (!(channel_gain >= 0.0) || !std::isfinite(channel_gain)) throw ConfigError("link: channel_gain must be >= 0");
    if (!std::isfinite(noise_psd)) throw ConfigError("link: noise_psd must be finite");
    if (!(p_min > 0.0 && p_min <= p_max)) throw ConfigError("link: need 0 < p_min <= p_max");
    if (!(f_min > 0.0 && f_min <= f_max)) throw ConfigError("link: need 0 < f_min <= f_max");
    if (!(cycles_per_flop > 0.0) || !(cloud_cycles_per_flop > 0.0)) throw ConfigError("link: cycles per FLOP must be > 0");
    if (!(kappa > 0.0)) throw ConfigError("link: kappa must be > 0");
    if (!(f_cloud > 0.0)) throw ConfigError("link: f_cloud must be > 0");
  }

  /// N0 W in watts.
  double noise_power_w() const { return dbm_to_w(noise_psd) * bandwidth; }

  double rate(double p) const { return bandwidth * std::log2(1.0 + p * channel_gain / noise_power_w()); }

  /// Smallest power delivering `bits` within `seconds`; +inf if the channel is dead.
  double power_for(double bits, double seconds) const {
    if (channel_gain <= 0.0) return std::numeric_limits<double>::infinity();
    return noise_power_w() / channel_gain * std::expm1(std::log(2.0) * bits / (bandwidth * seconds));
  }
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct QosBudget {
  double t_max = kUnbounded;  ///< s
  double e_max = kUnbounded;  ///< J
  double q_min = 0.0;
};

enum class Paradigm { on_cloud, on_iaa, co_inference };
enum class Objective { max_quality, min_delay, min_energy };

inline std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::on_cloud: return "ON_CLOUD";
    case Paradigm::on_iaa: return "ON_IAA";
    case Paradigm::co_inference: return "CO_INFERENCE";
  }
  return "?";
}

inline std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::max_quality: return "MAX_QUALITY";
    case Objective::min_delay: return "MIN_DELAY";
    case Objective::min_energy: return "MIN_ENERGY";
  }
  return "?";
}

struct QosTriple {
  double quality = 0.0;
  double delay = 0.0;   ///< s
  double energy = 0.0;  ///< J
};

struct ExecutionPlan {
  Paradigm paradigm = Paradigm::co_inference;
  int split = 0;
  double rho = 0.0;
  double p = 0.0;  ///< W
  double f = 0.0;  ///< Hz
  QosTriple achieved;
  bool feasible = true;
  std::string infeasible_reason;  ///< binding constraint per paradigm when infeasible
};

inline double quality_of(const InferenceModelProfile& profile, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("quality_of: rho must lie in [0, 1)");
  const auto& t = profile.quality_table;
  if (t.empty()) return profile.q_max * std::pow(1.0 - rho, profile.gamma);
  if (rho >= t.back().rho) return t.back().quality;
  const auto hi = std::upper_bound(t.begin(), t.end(), rho, [](double r, const QualityPoint& q) { return r < q.rho; });
  const auto lo = hi - 1;
  const double w = (rho - lo->rho) / (hi->rho - lo->rho);
  return lo->quality + w * (hi->quality - lo->quality);
}

/// Workload split implied by (s, rho).
struct SplitCost {
  double iaa_cycles = 0.0;
  double upload_bits = 0.0;
  double cloud_seconds = 0.0;
};

inline SplitCost split_cost(const InferenceModelProfile& profile, const LinkProfile& link, int split, double rho) {
  SplitCost c;
  c.iaa_cycles = link.cycles_per_flop * (1.0 - rho) * profile.flops_before(split);
  c.upload_bits = profile.activation_bits[static_cast<std::size_t>(split)];
  const double cloud_cycles = link.cloud_cycles_per_flop * profile.flops_after(split);
  c.cloud_seconds = cloud_cycles > 0.0 ? cloud_cycles / link.f_cloud : 0.0;
  return c;
}

inline double transmit_seconds(const LinkProfile& link, double bits, double p) {
  if (bits <= 0.0) return 0.0;
  const double r = link.rate(p);
  return r > 0.0 ? bits / r : std::numeric_limits<double>::infinity();
}

namespace detail {
inline void check_plan_bounds(const ExecutionPlan& plan, const InferenceModelProfile& profile, const LinkProfile& link) {
  if (plan.split < 0 || plan.split > profile.layer_count) throw DomainError("plan: split outside [0, L]");
  if (!(plan.rho >= 0.0 && plan.rho < 1.0)) throw DomainError("plan: rho outside [0, 1)");
  const double tol = 1e-12;
  if (!(plan.p >= link.p_min * (1 - tol) && plan.p <= link.p_max * (1 + tol))) throw DomainError("plan: p outside bounds");
  if (!(plan.f >= link.f_min * (1 - tol) && plan.f <= link.f_max * (1 + tol))) throw DomainError("plan: f outside bounds");
}
}  // namespace detail

/// End-to-end delay in seconds; +inf flags a dead link with data to send.
inline double delay_of(const ExecutionPlan& plan, const InferenceModelProfile& profile, const LinkProfile& link) {
  detail::check_plan_bounds(plan, profile, link);
  const SplitCost c = split_cost(profile, link, plan.split, plan.rho);
  const double compute = c.iaa_cycles > 0.0 ? c.iaa_cycles / plan.f : 0.0;
  return compute + transmit_seconds(link, c.upload_bits, plan.p) + c.cloud_seconds;
}

/// IAA-side energy in joules (compute plus uplink); +inf on a dead link.
inline double energy_of(const ExecutionPlan& plan, const InferenceModelProfile& profile, const LinkProfile& link) {
  detail::check_plan_bounds(plan, profile, link);
  const SplitCost c = split_cost(profile, link, plan.split, plan.rho);
  const double compute = link.kappa * c.iaa_cycles * plan.f * plan.f;
  const double tx_time = transmit_seconds(link, c.upload_bits, plan.p);
  return compute + (c.upload_bits > 0.0 ? plan.p * tx_time : 0.0);
}

inline QosTriple evaluate_plan(const ExecutionPlan& plan, const InferenceModelProfile& profile, const LinkProfile& link) {
  return {quality_of(profile, plan.rho), delay_of(plan, profile, link), energy_of(plan, profile, link)};
}

/// Twelve equal-FLOP layers with shrinking activations; the raw input is the
/// largest payload and the final result is negligible.
inline InferenceModelProfile default_profile() {
  InferenceModelProfile p;
  p.layer_count = 12;
  p.flops_per_layer.assign(12, 5e8);
  p.activation_bits.resize(13);
  for (int s = 0; s <= 12; ++s) p.activation_bits[static_cast<std::size_t>(s)] = 8e6 * std::pow(0.75, s);
  p.activation_bits[12] = 0.0;
  return p;
}

/// Large raw input, wide early activations and a narrow bottleneck after
/// layer 4; favours a mid-network split.
inline InferenceModelProfile bottleneck_profile() {
  InferenceModelProfile p;
  p.layer_count = 12;
  p.flops_per_layer.assign(12, 5e8);
  p.activation_bits = {8e6, 1.2e7, 1.0e7, 6e6, 2e4, 4e6, 4e6, 4e6, 4e6, 4e6, 4e6, 4e6, 0.0};
  return p;
}

}  // namespace skyplan
