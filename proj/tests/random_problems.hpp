#pragma once

// Seeded random co-inference instances shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "skyplan/coinference/model.hpp"

namespace skyplan::testing {

struct RandomInstance {
  InferenceModelProfile profile;
  LinkProfile link;
  QosBudget budget;  ///< all three caps finite; relax one per mode
};

inline RandomInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double a, double b) { return a * std::pow(b / a, u(rng)); };

  RandomInstance r;
  auto& p = r.profile;
  p.layer_count = 4 + static_cast<int>(u(rng) * 13);
  p.flops_per_layer.clear();
  p.activation_bits.clear();
  for (int i = 0; i < p.layer_count; ++i) p.flops_per_layer.push_back(log_uniform(1e8, 2e9));
  for (int i = 0; i <= p.layer_count; ++i) p.activation_bits.push_back(log_uniform(1e4, 2e7));
  p.activation_bits.back() = log_uniform(1e2, 1e4);
  p.q_max = 0.3 + 0.3 * u(rng);
  p.gamma = 0.5 + 2.5 * u(rng);
  r.link.channel_gain = log_uniform(1e-13, 1e-9);
  r.budget = {0.2 + 2.8 * u(rng), 0.1 + 4.9 * u(rng), 0.5 * p.q_max * u(rng)};
  return r;
}

/// The budget with the optimized metric relaxed.
inline QosBudget relaxed_for(Objective mode, QosBudget b) {
  switch (mode) {
    case Objective::max_quality: b.q_min = 0.0; break;
    case Objective::min_delay: b.t_max = kUnbounded; break;
    case Objective::min_energy: b.e_max = kUnbounded; break;
  }
  return b;
}

}  // namespace skyplan::testing
