#pragma once

#include <optional>
#include <string>

#include "skyplan/llm_gateway.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

inline constexpr int kLlmPlacementAttempts = 3;

/// Asks the gateway for coordinates, validates them and scores them on the
/// map. Parse or feasibility failures are retried; after three failed
/// attempts the last error is raised (llm_infeasible for bad coordinates).
inline PlacementSolution llm_placement(const PlacementProblem& problem, const CoverageMap& map, LlmGateway& gateway,
                                       double digest_stride = 10.0) {
  problem.validate();
  const PlacementPrompt prompt = build_prompt(problem, map, digest_stride);
  std::optional<LlmError> last;
  for (int attempt = 1; attempt <= kLlmPlacementAttempts; ++attempt) {
    std::vector<XY> coords;
    try {
      coords = gateway.request_placement(prompt, problem.uav_count);
    } catch (const LlmError& e) {
      if (e.code() == LlmError::Code::transport || e.code() == LlmError::Code::http) throw;
      last = e;
      continue;
    }
    try {
      for (const auto& p : coords)
        if (!map.contains(p.x, p.y)) throw ConstraintError("coordinate outside the map");
      check_feasible(coords, problem);
    } catch (const ConstraintError& e) {
      last = LlmError(LlmError::Code::infeasible, e.what());
      continue;
    }
    PlacementSolution sol = evaluate_on_map(coords, problem, map, PlacementMethod::llm);
    sol.iterations = attempt;
    return sol;
  }
  throw *last;
}

}  // namespace skyplan
