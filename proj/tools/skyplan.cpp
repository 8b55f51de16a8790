// skyplan command-line tool: map synthesis, UAV placement, co-inference
// planning and the closed-loop scenario pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skyplan/coinference/optimizer.hpp"
#include "skyplan/config.hpp"
#include "skyplan/http_transport.hpp"
#include "skyplan/map_io.hpp"
#include "skyplan/parallel.hpp"
#include "skyplan/pipeline.hpp"
#include "skyplan/placement/brute_force.hpp"
#include "skyplan/placement/llm_placement.hpp"
#include "skyplan/placement/map_search.hpp"
#include "skyplan/placement/sca.hpp"
#include "skyplan/report_io.hpp"
#include "skyplan/synthesis.hpp"

namespace fs = std::filesystem;
using namespace skyplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

/// Usage/config problems that map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* kSchemas = R"(Output files:
  map CSV      line 1 '# skyplan-map v1'; line 2 '# origin_x,origin_y,resolution,nx,ny,altitude,beam_count';
               line 3 the seven values; then rows 'beam_id,ix,iy,rsrp_dbm' (beam-major, then iy, then ix;
               rsrp_dbm has <= 4 fraction digits or is NaN)
  sweep.csv    k,method,sum_rate,iterations        (sum_rate in bit/s, map-evaluated)
  comparison.csv
               mode,paradigm,feasible,s,rho,p,f,quality,delay,energy
               (p in W, f in Hz, delay in s, energy in J; feasible is 0/1, infeasible rows carry NaN metrics)
  rounds.csv   round,uav_id,x,y,beam,rate          (x, y in m, rate in bit/s; round 0 is the offline placement)
All numbers use shortest round-trip decimals, so files re-read to the same values.
Exit codes: 0 success, 1 internal error, 2 usage or configuration error.)";

RunConfig load_config(const std::string& path) {
  if (path.empty()) return parse_run_config("");
  if (!fs::exists(path)) throw UsageError("config file '" + path + "' does not exist");
  return load_run_config(path);
}

ordered_json metadata(const RunConfig& cfg, bool deterministic) {
  ordered_json m;
  m["seed"] = cfg.seed;
  m["deterministic"] = deterministic;
  return m;
}

std::pair<int, int> parse_uav_range(const std::string& s) {
  auto to_int = [&](const std::string& t) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v < 1)
      throw UsageError("--uavs expects K or K_min..K_max with K >= 1 (got '" + s + "')");
    return v;
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int k = to_int(s);
    return {k, k};
  }
  const int lo = to_int(s.substr(0, dots));
  const int hi = to_int(s.substr(dots + 2));
  if (lo > hi) throw UsageError("--uavs range must be increasing (got '" + s + "')");
  return {lo, hi};
}

void print_map_summary(const CoverageMap& map) {
  const GridSpec& g = map.grid();
  std::printf("grid %d x %d x %d beams, resolution %g m, altitude %g m\n", g.nx, g.ny, g.beam_count, g.resolution,
              g.altitude);
  for (int b = 0; b < g.beam_count; ++b) {
    double lo = kRsrpMax, hi = kRsrpMin;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double v = map.at(b, ix, iy);
        if (is_nodata(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    std::printf("beam %d: rsrp min %.4f dBm, max %.4f dBm\n", b, lo, hi);
  }
}

int cmd_synth_map(const RunConfig& cfg, const std::string& out) {
  const CoverageMap map = synthesize(cfg.map);
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  save_map(map, p);
  // Report the values as stored in the file.
  print_map_summary(quantize_for_csv(map));
  return kExitOk;
}

int cmd_place(const RunConfig& cfg, const std::string& map_path, std::vector<std::string> methods,
              const std::string& uavs, const std::string& out) {
  if (!fs::is_regular_file(map_path)) throw UsageError("map file '" + map_path + "' does not exist");
  const auto [k_lo, k_hi] = parse_uav_range(uavs);
  for (const auto& m : methods)
    if (m != "sca" && m != "search" && m != "llm" && m != "brute")
      throw UsageError("unknown --method '" + m + "' (expected sca, search, llm or brute)");
  const bool uses_llm = std::find(methods.begin(), methods.end(), "llm") != methods.end();
  if (uses_llm && !cfg.llm_configured) throw ConfigError("method llm requires an [llm] section in the config");

  CoverageMap map;
  try {
    map = load_map(map_path);
  } catch (const ParseError& e) {
    throw UsageError("map file '" + map_path + "': " + e.what());
  }

  std::optional<LlmGateway> gateway;
  bool deterministic = true;
  if (uses_llm) {
    GatewayConfig g = cfg.llm;
    if (!g.is_mock()) {
      g.api_key = GatewayConfig::api_key_from_env();
      deterministic = false;
      gateway.emplace(std::move(g), make_http_transport());
    } else {
      gateway.emplace(std::move(g));
    }
  }

  ordered_json solutions = ordered_json::array();
  std::ostringstream sweep;
  sweep << kSweepHeader << '\n';
  for (int k = k_lo; k <= k_hi; ++k) {
    const PlacementProblem problem = cfg.placement_problem(map, k);
    for (const auto& m : methods) {
      PlacementSolution s;
      if (m == "sca") {
        // Optimized on the LoS model, judged on the map.
        const PlacementSolution los = sca_los_placement(problem, cfg.sca);
        s = evaluate_on_map(los.positions, problem, map, PlacementMethod::sca_los);
        s.iterations = los.iterations;
        s.objective_trace = los.objective_trace;
        s.max_iter_reached = los.max_iter_reached;
      } else if (m == "search") {
        s = map_search_placement(problem, map, cfg.search);
      } else if (m == "brute") {
        s = brute_force_placement(problem, map, cfg.brute_stride);
      } else {
        s = llm_placement(problem, map, *gateway, cfg.digest_stride);
      }
      std::printf("K=%d %s sum_rate %.6g bit/s\n", k, std::string(to_string(s.method)).c_str(), s.sum_rate);
      sweep << k << ',' << m << ',' << csv_number(s.sum_rate) << ',' << s.iterations << '\n';
      solutions.push_back(to_json(s));
    }
  }

  fs::create_directories(out);
  ordered_json doc;
  doc["metadata"] = metadata(cfg, deterministic);
  doc["metadata"]["map"] = map_path;
  doc["solutions"] = std::move(solutions);
  write_text(fs::path(out) / "solution.json", doc.dump(2) + "\n");
  if (k_hi > k_lo) write_text(fs::path(out) / "sweep.csv", sweep.str());
  return kExitOk;
}

int cmd_coinfer(const RunConfig& cfg, std::vector<std::string> modes, const std::string& out) {
  std::vector<Objective> objectives;
  if (modes.empty()) objectives.push_back(cfg.mode);
  for (const auto& m : modes) {
    try {
      objectives.push_back(parse_objective(m));
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--mode: ") + e.what());
    }
  }
  std::ostringstream csv;
  csv << kComparisonHeader << '\n';
  ordered_json doc;
  doc["metadata"] = metadata(cfg, true);
  doc["comparisons"] = ordered_json::array();
  for (Objective mode : objectives) {
    const ParadigmComparison c = compare_paradigms(mode, cfg.profile, cfg.link, cfg.budget_for(mode), cfg.rho_max);
    write_comparison_rows(csv, c);
    doc["comparisons"].push_back(to_json(c));
    for (const auto& p : c.plans)
      std::printf("%s %s %s\n", std::string(to_string(mode)).c_str(), std::string(to_string(p.paradigm)).c_str(),
                  p.feasible ? "feasible" : ("infeasible: " + p.infeasible_reason).c_str());
  }
  fs::create_directories(out);
  write_text(fs::path(out) / "comparison.csv", csv.str());
  write_text(fs::path(out) / "comparison.json", doc.dump(2) + "\n");
  return kExitOk;
}

ScenarioConfig scenario_from(const RunConfig& cfg) {
  ScenarioConfig sc;
  sc.true_map = synthesize(cfg.map);
  sc.predicted_channel = cfg.map.channel;
  sc.predicted_channel.shadowing_sigma = 0.0;
  sc.placement_problem = cfg.placement_problem(sc.true_map, cfg.uav_count);
  sc.inference = {cfg.profile, cfg.link, cfg.budget_for(cfg.mode), cfg.mode, cfg.rho_max};
  sc.adaptation = cfg.adaptation;
  sc.sca = cfg.sca;
  return sc;
}

int cmd_pipeline(const RunConfig& cfg, const std::string& out) {
  const ScenarioReport r = run_scenario(scenario_from(cfg));
  write_scenario_report(r, out, metadata(cfg, true));
  std::printf("initial sum rate %.6g bit/s, final %.6g bit/s, %d rounds, %s\n", r.initial_sum_rate, r.final_sum_rate,
              r.rounds_used, r.termination.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skyplan: coverage-map driven UAV placement and co-inference planning"};
  app.footer(kSchemas);
  app.require_subcommand(1);
  std::string config_path;
  unsigned threads = 0;
  app.add_option("--config", config_path, "TOML run configuration (defaults when omitted)");
  app.add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it");

  auto* synth = app.add_subcommand("synth-map", "synthesize a shadowed per-beam RSRP map");
  std::string synth_out;
  synth->add_option("--out", synth_out, "map CSV path")->required();

  auto* place = app.add_subcommand("place", "place UAVs on a map (llm live mode is non-deterministic)");
  std::string map_path, uavs = "1", place_out;
  std::vector<std::string> methods{"search"};
  place->add_option("--map", map_path, "map CSV path")->required();
  place->add_option("--method", methods, "sca, search, llm, brute (comma separated)")->delimiter(',');
  place->add_option("--uavs", uavs, "K or K_min..K_max");
  place->add_option("--out", place_out, "output directory")->required();

  auto* coinfer = app.add_subcommand("coinfer", "compare on-cloud, on-IAA and co-inference plans");
  std::vector<std::string> modes;
  std::string coinfer_out;
  coinfer->add_option("--mode", modes, "quality, delay, energy (comma separated)")->delimiter(',');
  coinfer->add_option("--out", coinfer_out, "output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "run the closed-loop placement + planning scenario");
  std::string pipe_out;
  pipe->add_option("--out", pipe_out, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    parallel::set_thread_count(threads);
    const RunConfig cfg = load_config(config_path);
    if (*synth) return cmd_synth_map(cfg, synth_out);
    if (*place) return cmd_place(cfg, map_path, methods, uavs, place_out);
    if (*coinfer) return cmd_coinfer(cfg, modes, coinfer_out);
    return cmd_pipeline(cfg, pipe_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}
