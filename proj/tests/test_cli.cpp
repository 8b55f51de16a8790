#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "skyplan/map_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "skyplan_test_cli";
const std::string kScaled = std::string(SKYPLAN_CONFIG_DIR) + "/scaled.toml";

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path o = kWork / "stdout.txt", e = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + SKYPLAN_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

// Scaled map shared by the placement cases.
const fs::path& scaled_map() {
  static const fs::path p = [] {
    const fs::path m = kWork / "scaled_map.csv";
    const CliRun r = run("--config \"" + kScaled + "\" synth-map --out \"" + m.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.err;
    return m;
  }();
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

}  // namespace

TEST(Cli, HelpDocumentsSchemasAndExitCodes) {
  const CliRun r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"k,method,sum_rate,iterations", "mode,paradigm,feasible,s,rho,p,f,quality,delay,energy",
                        "round,uav_id,x,y,beam,rate", "beam_id,ix,iy,rsrp_dbm", "Exit codes"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("--config /nonexistent/run.toml coinfer --out \"" + (kWork / "x").string() + "\"").code, 2);
  const CliRun missing = run("place --map /nonexistent/map.csv --out \"" + (kWork / "x").string() + "\"");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("/nonexistent/map.csv"), std::string::npos);
  const std::string map = "--map \"" + scaled_map().string() + "\" --out \"" + (kWork / "x").string() + "\"";
  EXPECT_EQ(run("--config \"" + kScaled + "\" place " + map + " --method magic").code, 2);
  EXPECT_EQ(run("--config \"" + kScaled + "\" place " + map + " --uavs 3..1").code, 2);
  EXPECT_EQ(run("--config \"" + kScaled + "\" place " + map + " --method llm").code, 2);
  EXPECT_EQ(run("coinfer --mode speed --out \"" + (kWork / "x").string() + "\"").code, 2);
  const fs::path bad = write_config("bad.toml", "[map]\nwidht = 3.0\n");
  EXPECT_EQ(run("--config \"" + bad.string() + "\" coinfer --out \"" + (kWork / "x").string() + "\"").code, 2);
}

TEST(Cli, DefaultSynthesisIsCampaignGrid) {
  const fs::path m = kWork / "campaign.csv";
  const CliRun r = run("synth-map --out \"" + m.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("grid 635 x 302 x 7"), std::string::npos) << r.out;
  const auto map = skyplan::load_map(m);
  EXPECT_EQ(map.grid().nx, 635);
  EXPECT_EQ(map.grid().ny, 302);
  EXPECT_EQ(map.beam_count(), 7);
}

TEST(Cli, SameSeedSameBytes) {
  const fs::path a = kWork / "a.csv", b = kWork / "b.csv", c = kWork / "c.csv";
  ASSERT_EQ(run("--config \"" + kScaled + "\" --threads 1 synth-map --out \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(run("--config \"" + kScaled + "\" --threads 3 synth-map --out \"" + b.string() + "\"").code, 0);
  std::string text = slurp(kScaled);
  text.replace(text.find("seed = 7"), 8, "seed = 8");
  const fs::path other = write_config("other_seed.toml", text);
  ASSERT_EQ(run("--config \"" + other.string() + "\" synth-map --out \"" + c.string() + "\"").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
}

TEST(Cli, BruteAndSearchAgreeForOneUav) {
  const fs::path out = kWork / "place_k1";
  const CliRun r = run("--config \"" + kScaled + "\" place --map \"" + scaled_map().string() +
                    "\" --method brute,search --uavs 1 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(slurp(out / "solution.json"));
  ASSERT_EQ(doc["solutions"].size(), 2u);
  EXPECT_EQ(doc["solutions"][0]["method"], "BRUTE_FORCE");
  EXPECT_EQ(doc["solutions"][1]["method"], "MAP_SEARCH");
  EXPECT_EQ(doc["solutions"][0]["sum_rate"].get<double>(), doc["solutions"][1]["sum_rate"].get<double>());
  EXPECT_EQ(doc["metadata"]["seed"], 7);
  EXPECT_EQ(doc["metadata"]["deterministic"], true);
  EXPECT_FALSE(fs::exists(out / "sweep.csv"));
}

TEST(Cli, SweepSearchNeverBelowSca) {
  const fs::path out = kWork / "sweep";
  const CliRun r = run("--config \"" + kScaled + "\" place --map \"" + scaled_map().string() +
                    "\" --method sca,search --uavs 1..3 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "sweep.csv");
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "method", "sum_rate", "iterations"}));
  std::map<std::string, std::map<std::string, double>> rate;
  for (std::size_t i = 1; i < rows.size(); ++i) rate[rows[i][0]][rows[i][1]] = std::stod(rows[i][2]);
  for (const char* k : {"1", "2", "3"}) EXPECT_GE(rate[k]["search"], rate[k]["sca"]) << "K=" << k;
}

TEST(Cli, MockLlmPlacement) {
  const fs::path out = kWork / "llm";
  const CliRun r = run("--config \"" + std::string(SKYPLAN_CONFIG_DIR) + "/llm_mock.toml\" place --map \"" +
                    scaled_map().string() + "\" --method llm --uavs 2 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(slurp(out / "solution.json"));
  EXPECT_EQ(doc["solutions"][0]["method"], "LLM");
  EXPECT_EQ(doc["solutions"][0]["positions"][1][0], 120.0);
  EXPECT_EQ(doc["metadata"]["deterministic"], true);
}

TEST(Cli, CoinferRowsAndDominance) {
  const fs::path out = kWork / "coinfer";
  const fs::path cfg = write_config("coinfer.toml", "[coinference]\nprofile = \"bottleneck\"\nchannel_gain = 1e-14\n"
                                                    "t_max_s = 2.0\ne_max_j = 5.0\nq_min = 0.2\n");
  const CliRun r = run("--config \"" + cfg.string() + "\" coinfer --mode quality,delay,energy --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "comparison.csv");
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0].size(), 10u);
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& co = rows[1 + 3 * m + 2];
    ASSERT_EQ(co[1], "CO_INFERENCE");
    ASSERT_EQ(co[2], "1");
    const int col = m == 0 ? 7 : (m == 1 ? 8 : 9);
    for (std::size_t p = 0; p < 2; ++p) {
      const auto& other = rows[1 + 3 * m + p];
      if (other[2] != "1") continue;
      const double a = std::stod(co[col]), b = std::stod(other[col]);
      EXPECT_TRUE(m == 0 ? a >= b : a <= b) << co[0] << ' ' << other[1];
    }
  }
  EXPECT_TRUE(json::parse(slurp(out / "comparison.json"))["comparisons"].is_array());
}

TEST(Cli, InfeasibleRowsStillSucceed) {
  const fs::path out = kWork / "coinfer_tight";
  const fs::path cfg = write_config("tight.toml", "[coinference]\nt_max_s = 1e-6\n");
  const CliRun r = run("--config \"" + cfg.string() + "\" coinfer --mode energy --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "comparison.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(rows[i][2], "0");
    EXPECT_EQ(rows[i][9], "NaN");
  }
  EXPECT_NE(r.out.find("infeasible"), std::string::npos);
}

TEST(Cli, PipelineWithoutAdaptation) {
  const fs::path out = kWork / "pipeline";
  std::string text = slurp(kScaled);
  text.replace(text.find("max_rounds = 10"), 15, "max_rounds = 0");
  const fs::path cfg = write_config("pipe0.toml", text);
  const CliRun r = run("--config \"" + cfg.string() + "\" pipeline --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report["termination"], "adaptation_disabled");
  EXPECT_EQ(report["rounds"].size(), 1u);
  EXPECT_EQ(report["initial_sum_rate"], report["final_sum_rate"]);
  const auto rows = read_csv(out / "rounds.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"round", "uav_id", "x", "y", "beam", "rate"}));
}

TEST(Cli, PipelineReportsAreReproducible) {
  const fs::path a = kWork / "pipe_a", b = kWork / "pipe_b";
  ASSERT_EQ(run("--config \"" + kScaled + "\" --threads 1 pipeline --out \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(run("--config \"" + kScaled + "\" --threads 2 pipeline --out \"" + b.string() + "\"").code, 0);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "rounds.csv"), slurp(b / "rounds.csv"));
}
