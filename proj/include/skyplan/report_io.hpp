#pragma once

// JSON and CSV renderings of placement solutions, paradigm comparisons and
// scenario reports. Numbers use shortest round-trip formatting, so equal
// inputs give byte-identical files.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyplan/coinference/optimizer.hpp"
#include "skyplan/map_io.hpp"
#include "skyplan/pipeline.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

using ordered_json = nlohmann::ordered_json;

/// CSV cell: shortest round-trip decimal, `NaN`/`inf` spelled out.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_exact(v);
}

inline ordered_json to_json(const std::vector<XY>& positions) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : positions) arr.push_back({p.x, p.y});
  return arr;
}

inline ordered_json to_json(const PlacementSolution& s) {
  ordered_json j;
  j["method"] = std::string(to_string(s.method));
  j["uav_count"] = s.positions.size();
  j["positions"] = to_json(s.positions);
  j["serving_beam"] = s.serving_beam;
  j["sinr"] = s.sinr;
  j["per_uav_rate"] = s.per_uav_rate;
  j["sum_rate"] = s.sum_rate;
  j["iterations"] = s.iterations;
  j["max_iter_reached"] = s.max_iter_reached;
  j["objective_trace"] = s.objective_trace;
  return j;
}

inline ordered_json to_json(const ExecutionPlan& p) {
  ordered_json j;
  j["paradigm"] = std::string(to_string(p.paradigm));
  j["feasible"] = p.feasible;
  j["split"] = p.split;
  j["rho"] = p.rho;
  j["p"] = p.p;
  j["f"] = p.f;
  j["quality"] = p.achieved.quality;
  j["delay"] = p.achieved.delay;
  j["energy"] = p.achieved.energy;
  if (!p.feasible) j["infeasible_reason"] = p.infeasible_reason;
  return j;
}

inline ordered_json to_json(const ParadigmComparison& c) {
  ordered_json j;
  j["mode"] = std::string(to_string(c.mode));
  j["plans"] = ordered_json::array();
  for (const auto& p : c.plans) j["plans"].push_back(to_json(p));
  return j;
}

inline ordered_json to_json(const ScenarioReport& r) {
  ordered_json j;
  j["termination"] = r.termination;
  j["rounds_used"] = r.rounds_used;
  j["initial_sum_rate"] = r.initial_sum_rate;
  j["final_sum_rate"] = r.final_sum_rate;
  j["offline"] = to_json(r.offline);
  j["rounds"] = ordered_json::array();
  for (const auto& rec : r.rounds) {
    ordered_json o;
    o["round"] = rec.round;
    o["positions"] = to_json(rec.positions);
    o["serving_beam"] = rec.serving_beam;
    o["per_uav_rate"] = rec.per_uav_rate;
    o["map_sum_rate"] = rec.map_sum_rate;
    o["improvement"] = rec.improvement;  // null for round 0
    o["plan"] = to_json(rec.plan);
    j["rounds"].push_back(std::move(o));
  }
  return j;
}

inline constexpr const char* kComparisonHeader = "mode,paradigm,feasible,s,rho,p,f,quality,delay,energy";
inline constexpr const char* kRoundsHeader = "round,uav_id,x,y,beam,rate";
inline constexpr const char* kSweepHeader = "k,method,sum_rate,iterations";

inline void write_comparison_rows(std::ostream& out, const ParadigmComparison& c) {
  for (const auto& p : c.plans)
    out << to_string(c.mode) << ',' << to_string(p.paradigm) << ',' << (p.feasible ? 1 : 0) << ',' << p.split << ','
        << csv_number(p.rho) << ',' << csv_number(p.p) << ',' << csv_number(p.f) << ','
        << csv_number(p.achieved.quality) << ',' << csv_number(p.achieved.delay) << ','
        << csv_number(p.achieved.energy) << '\n';
}

inline void write_rounds_csv(std::ostream& out, const ScenarioReport& r) {
  out << kRoundsHeader << '\n';
  for (const auto& rec : r.rounds)
    for (std::size_t k = 0; k < rec.positions.size(); ++k)
      out << rec.round << ',' << k << ',' << csv_number(rec.positions[k].x) << ',' << csv_number(rec.positions[k].y)
          << ',' << rec.serving_beam[k] << ',' << csv_number(rec.per_uav_rate[k]) << '\n';
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

/// report.json and rounds.csv in `dir`.
inline void write_scenario_report(const ScenarioReport& r, const std::filesystem::path& dir,
                                  const ordered_json& metadata = {}) {
  std::filesystem::create_directories(dir);
  ordered_json j = to_json(r);
  if (!metadata.is_null()) j["metadata"] = metadata;
  write_text(dir / "report.json", j.dump(2) + "\n");
  std::ostringstream csv;
  write_rounds_csv(csv, r);
  write_text(dir / "rounds.csv", csv.str());
}

}  // namespace skyplan
