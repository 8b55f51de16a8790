#pragma once

// Single-file run configuration (TOML). Every section is optional; missing
// keys keep the library defaults and unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "skyplan/coinference/model.hpp"
#include "skyplan/error.hpp"
#include "skyplan/llm_gateway.hpp"
#include "skyplan/map_io.hpp"
#include "skyplan/pipeline.hpp"
#include "skyplan/placement/map_search.hpp"
#include "skyplan/placement/problem.hpp"
#include "skyplan/placement/sca.hpp"
#include "skyplan/synthesis.hpp"

namespace skyplan {

struct BeamLayoutConfig {
  int count = 7;
  double spacing_deg = 15.0;
  double boresight_azimuth_deg = 0.0;
  double uptilt_deg = 20.0;
  BeamPattern shape;  ///< widths and gains shared by every beam

  std::vector<BeamPattern> build() const {
    if (count < 1) throw ConfigError("beams: count must be >= 1");
    auto beams = default_beam_layout(boresight_azimuth_deg, uptilt_deg, count, spacing_deg);
    for (auto& b : beams) {
      b.azimuth_width_3db = shape.azimuth_width_3db;
      b.elevation_width_3db = shape.elevation_width_3db;
      b.peak_gain = shape.peak_gain;
      b.floor_gain = shape.floor_gain;
    }
    return beams;
  }
};

struct RunConfig {
  std::uint64_t seed = 1;
  SynthesisConfig map;  ///< geometry, channel and beams of the synthesized map
  BeamLayoutConfig beams;

  // [placement]
  int uav_count = 3;
  double min_separation = 10.0;
  std::optional<Area> area;  ///< defaults to the map extent
  ScaOptions sca;
  SearchConfig search;
  int brute_stride = 1;  ///< node stride of the exhaustive oracle

  // [coinference]
  InferenceModelProfile profile = default_profile();
  LinkProfile link;
  QosBudget budget{1.0, 1.0, 0.2};
  Objective mode = Objective::min_energy;
  double rho_max = 0.9;

  // [pipeline]
  AdaptationConfig adaptation;

  // [llm]
  GatewayConfig llm;
  bool llm_configured = false;
  double digest_stride = 10.0;

  /// Problem for a given map; area defaults to the whole map.
  PlacementProblem placement_problem(const CoverageMap& m, int k) const {
    PlacementProblem p;
    p.uav_count = k;
    p.area = area.value_or(map_area(m));
    p.altitude = m.grid().altitude;
    p.min_separation = min_separation;
    p.channel = map.channel;
    p.beams = map.beams;
    p.bs_position = map.bs_position;
    return p;
  }

  /// Budget with the optimized metric relaxed.
  QosBudget budget_for(Objective m) const {
    QosBudget b = budget;
    if (m == Objective::max_quality) b.q_min = 0.0;
    if (m == Objective::min_delay) b.t_max = kUnbounded;
    if (m == Objective::min_energy) b.e_max = kUnbounded;
    return b;
  }
};

inline Objective parse_objective(const std::string& s) {
  if (s == "quality") return Objective::max_quality;
  if (s == "delay") return Objective::min_delay;
  if (s == "energy") return Objective::min_energy;
  throw ConfigError("mode must be one of quality, delay, energy (got '" + s + "')");
}

/// Two-column `rho,quality` CSV with a header line.
inline std::vector<QualityPoint> read_quality_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open quality table " + path.string());
  std::vector<QualityPoint> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "rho,quality") throw ParseError(1, "quality table header must be 'rho,quality'");
      continue;
    }
    const auto cols = detail::split_commas(line);
    QualityPoint q;
    if (cols.size() != 2 || !detail::parse_double(detail::trim(cols[0]), q.rho) ||
        !detail::parse_double(detail::trim(cols[1]), q.quality))
      throw ParseError(line_no, "expected 'rho,quality' numbers");
    out.push_back(q);
  }
  return out;
}

namespace detail {

/// Table view that records which keys were read, so leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

  template <class T>
  void get(const char* key, T& out) {
    const toml::node* n = find(key);
    if (!n) return;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer()))
        out = *v;
      else
        fail(key, "a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!n->is_boolean()) fail(key, "a boolean");
      out = *n->value<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!n->is_integer()) fail(key, "an integer");
      const auto v = *n->value<std::int64_t>();
      if constexpr (std::is_unsigned_v<T>)
        if (v < 0) fail(key, "a non-negative integer");
      out = static_cast<T>(v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!n->is_string()) fail(key, "a string");
      out = *n->value<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "an array of numbers");
      out.clear();
      for (const auto& e : *arr) {
        if (!e.is_number()) fail(key, "an array of numbers");
        out.push_back(*e.value<double>());
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *arr) {
        if (!e.is_string()) fail(key, "an array of strings");
        out.push_back(*e.value<std::string>());
      }
    }
  }

  bool has(const char* key) const { return t_ && t_->contains(key); }

  const toml::node* find(const char* key) {
    if (!t_) return nullptr;
    used_.insert(key);
    return t_->get(key);
  }

  void reject_unknown() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!used_.count(std::string(k.str()))) throw ConfigError("unknown key [" + name_ + "]." + std::string(k.str()));
  }

 private:
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("[" + name_ + "]." + key + " must be " + what);
  }

  const toml::table* t_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Parses TOML text; relative paths resolve against `base_dir`.
inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = ".") {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(static_cast<int>(e.source().begin.line), std::string("config: ") + std::string(e.description()));
  }
  static const std::set<std::string> sections{"map", "channel", "beams", "placement", "coinference", "pipeline", "llm"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key == "seed") continue;
    if (!sections.count(key)) throw ConfigError("unknown key or section '" + key + "'");
    if (!v.is_table()) throw ConfigError("[" + key + "] must be a table");
  }

  RunConfig cfg;
  detail::Section top(&root, "");
  top.get("seed", cfg.seed);

  auto section = [&](const char* name) { return detail::Section(root[name].as_table(), name); };

  {
    auto s = section("map");
    auto& m = cfg.map;
    s.get("origin_x", m.origin_x);
    s.get("origin_y", m.origin_y);
    s.get("width", m.width);
    s.get("height", m.height);
    s.get("resolution", m.resolution);
    s.get("altitude", m.altitude);
    s.get("bs_x", m.bs_position.x);
    s.get("bs_y", m.bs_position.y);
    s.get("bs_z", m.bs_position.z);
    if (const auto* n = s.find("blockages")) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError("[map].blockages must be an array of tables");
      for (const auto& e : *arr) {
        const auto* t = e.as_table();
        if (!t) throw ConfigError("[map].blockages must be an array of tables");
        detail::Section b(t, "map.blockages");
        BlockageRect r;
        b.get("x_min", r.x_min);
        b.get("x_max", r.x_max);
        b.get("y_min", r.y_min);
        b.get("y_max", r.y_max);
        b.get("loss_db", r.loss_db);
        b.reject_unknown();
        m.blockages.push_back(r);
      }
    }
    s.reject_unknown();
  }
  {
    auto s = section("channel");
    auto& c = cfg.map.channel;
    s.get("carrier_freq_hz", c.carrier_freq);
    if (!s.has("ref_pathloss_1m_db")) c.ref_pathloss_1m = fspl(1.0, c.carrier_freq);
    s.get("bandwidth_hz", c.bandwidth);
    s.get("noise_power_dbm", c.noise_power);
    s.get("tx_power_per_beam_dbm", c.tx_power_per_beam);
    s.get("pathloss_exponent", c.pathloss_exponent);
    s.get("ref_pathloss_1m_db", c.ref_pathloss_1m);
    s.get("shadowing_sigma_db", c.shadowing_sigma);
    s.get("shadowing_corr_len_m", c.shadowing_corr_len);
    s.reject_unknown();
  }
  {
    auto s = section("beams");
    auto& b = cfg.beams;
    s.get("count", b.count);
    s.get("spacing_deg", b.spacing_deg);
    s.get("boresight_azimuth_deg", b.boresight_azimuth_deg);
    s.get("uptilt_deg", b.uptilt_deg);
    s.get("azimuth_width_3db_deg", b.shape.azimuth_width_3db);
    s.get("elevation_width_3db_deg", b.shape.elevation_width_3db);
    s.get("peak_gain_dbi", b.shape.peak_gain);
    s.get("floor_gain_dbi", b.shape.floor_gain);
    s.reject_unknown();
    cfg.map.beams = b.build();
  }
  {
    auto s = section("placement");
    s.get("uav_count", cfg.uav_count);
    s.get("min_separation_m", cfg.min_separation);
    if (s.has("area")) {
      std::vector<double> a;
      s.get("area", a);
      if (a.size() != 4) throw ConfigError("[placement].area must be [x_min, x_max, y_min, y_max]");
      cfg.area = Area{a[0], a[1], a[2], a[3]};
    }
    s.get("sca_tol", cfg.sca.tol);
    s.get("sca_max_iter", cfg.sca.max_iter);
    s.get("search_restarts", cfg.search.restarts);
    s.get("search_stride_m", cfg.search.stride);
    s.get("search_candidate_pool", cfg.search.candidate_pool);
    s.get("brute_stride", cfg.brute_stride);
    s.reject_unknown();
  }
  {
    auto s = section("coinference");
    std::string preset = "default";
    s.get("profile", preset);
    if (preset == "default")
      cfg.profile = default_profile();
    else if (preset == "bottleneck")
      cfg.profile = bottleneck_profile();
    else
      throw ConfigError("[coinference].profile must be 'default' or 'bottleneck'");
    auto& p = cfg.profile;
    if (s.has("flops_per_layer")) {
      s.get("flops_per_layer", p.flops_per_layer);
      p.layer_count = static_cast<int>(p.flops_per_layer.size());
    }
    s.get("activation_bits", p.activation_bits);
    s.get("q_max", p.q_max);
    s.get("gamma", p.gamma);
    std::string table;
    s.get("quality_table", table);
    if (!table.empty()) {
      std::filesystem::path tp(table);
      p.quality_table = read_quality_table(tp.is_absolute() ? tp : base_dir / tp);
    }
    auto& l = cfg.link;
    s.get("bandwidth_hz", l.bandwidth);
    s.get("channel_gain", l.channel_gain);
    s.get("noise_psd_dbm_hz", l.noise_psd);
    s.get("p_min_w", l.p_min);
    s.get("p_max_w", l.p_max);
    s.get("f_min_hz", l.f_min);
    s.get("f_max_hz", l.f_max);
    s.get("cycles_per_flop", l.cycles_per_flop);
    s.get("kappa", l.kappa);
    s.get("f_cloud_hz", l.f_cloud);
    s.get("cloud_cycles_per_flop", l.cloud_cycles_per_flop);
    s.get("t_max_s", cfg.budget.t_max);
    s.get("e_max_j", cfg.budget.e_max);
    s.get("q_min", cfg.budget.q_min);
    s.get("rho_max", cfg.rho_max);
    std::string mode;
    s.get("mode", mode);
    if (!mode.empty()) cfg.mode = parse_objective(mode);
    s.reject_unknown();
  }
  {
    auto s = section("pipeline");
    auto& a = cfg.adaptation;
    s.get("max_rounds", a.max_rounds);
    s.get("step_m", a.step);
    s.get("epsilon", a.epsilon);
    s.get("sensing_noise_db", a.sensing_noise_db);
    s.reject_unknown();
  }
  {
    auto s = section("llm");
    cfg.llm_configured = root.contains("llm");
    auto& g = cfg.llm;
    s.get("endpoint_url", g.endpoint_url);
    s.get("model", g.model_name);
    s.get("timeout_s", g.timeout_s);
    s.get("max_retries", g.max_retries);
    s.get("digest_stride_m", cfg.digest_stride);
    if (s.has("mock_script")) {
      std::vector<std::string> script;
      s.get("mock_script", script);
      g.mock_script = std::move(script);
    }
    s.reject_unknown();
  }

  cfg.map.seed = cfg.seed;
  cfg.search.seed = cfg.seed;
  cfg.adaptation.seed = cfg.seed;
  cfg.map.validate();
  cfg.profile.validate();
  cfg.link.validate();
  if (cfg.brute_stride < 1) throw ConfigError("[placement].brute_stride must be >= 1");
  if (!(cfg.rho_max >= 0.0 && cfg.rho_max < 1.0)) throw ConfigError("[coinference].rho_max must lie in [0, 1)");
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace skyplan
