#pragma once

// Chat-completion client for prompt-driven UAV placement, with a scripted
// mock mode that never touches the network.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyplan/coverage_map.hpp"
#include "skyplan/error.hpp"
#include "skyplan/placement/problem.hpp"

namespace skyplan {

inline constexpr const char* kApiKeyEnv = "SKYPLAN_LLM_API_KEY";
inline constexpr std::size_t kDigestCap = 100 * 1024;

class LlmError : public std::runtime_error {
 public:
  enum class Code { transport, http, parse, arity, infeasible };

  LlmError(Code code, const std::string& what) : std::runtime_error(std::string(tag(code)) + ": " + what), code_(code) {}
  Code code() const noexcept { return code_; }

  static const char* tag(Code c) {
    switch (c) {
      case Code::transport: return "llm_transport";
      case Code::http: return "llm_http";
      case Code::parse: return "llm_parse";
      case Code::arity: return "llm_arity";
      case Code::infeasible: return "llm_infeasible";
    }
    return "llm_error";
  }

 private:
  Code code_;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_s = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Blocking POST. Implementations throw on transport failure or timeout.
using Transport = std::function<HttpResponse(const HttpRequest&)>;

struct GatewayConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key;  ///< never logged or reported
  double timeout_s = 60.0;
  int max_retries = 2;
  std::optional<std::vector<std::string>> mock_script;

  bool is_mock() const { return mock_script.has_value(); }

  void validate() const {
    if (max_retries < 0) throw ConfigError("llm: max_retries must be >= 0");
    if (!(timeout_s > 0.0)) throw ConfigError("llm: timeout must be > 0");
    if (is_mock()) {
      if (mock_script->empty()) throw ConfigError("llm: mock mode requires a non-empty mock_script");
      return;
    }
    if (endpoint_url.empty()) throw ConfigError("llm: live mode requires endpoint_url");
    if (api_key.empty()) throw ConfigError(std::string("llm: live mode requires ") + kApiKeyEnv);
  }

  /// Reads the API key from the environment.
  static std::string api_key_from_env() {
    const char* v = std::getenv(kApiKeyEnv);
    return v ? std::string(v) : std::string();
  }
};

struct PlacementPrompt {
  std::string task_text;
  std::string map_digest;
  std::string response_schema_text;

  std::string text() const { return task_text + "\n\n" + map_digest + "\n" + response_schema_text; }
};

inline constexpr const char* kSystemPrompt =
    "You are a wireless network planning assistant. You place UAVs using measured "
    "per-beam RSRP maps and reply with coordinates in the requested JSON format.";

namespace detail {

inline std::string fmt2(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  std::string s(buf, ptr);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

inline std::string scrub(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
    text.replace(pos, secret.size(), "***");
  return text;
}

}  // namespace detail

/// Deterministic prompt: task description plus the stride-subsampled
/// per-beam RSRP table of the placement area.
inline PlacementPrompt build_prompt(const PlacementProblem& problem, const CoverageMap& map, double stride = 10.0) {
  if (!(stride >= map.resolution() * (1.0 - 1e-12)))
    throw ConfigError("build_prompt: stride must be >= the map resolution");
  const int step = std::max(1, static_cast<int>(std::lround(stride / map.resolution())));
  const Area& a = problem.area;
  const GridSpec& g = map.grid();
  const int ix0 = std::max(0, static_cast<int>(std::ceil((a.x_min - g.origin_x) / g.resolution - 1e-9)));
  const int iy0 = std::max(0, static_cast<int>(std::ceil((a.y_min - g.origin_y) / g.resolution - 1e-9)));
  const int ix1 = std::min(g.nx - 1, static_cast<int>(std::floor((a.x_max - g.origin_x) / g.resolution + 1e-9)));
  const int iy1 = std::min(g.ny - 1, static_cast<int>(std::floor((a.y_max - g.origin_y) / g.resolution + 1e-9)));

  PlacementPrompt prompt;
  std::ostringstream task;
  task << "Task: place " << problem.uav_count << " UAVs to maximize the sum of their downlink rates.\n"
       << "Each UAV is served by the beam with the strongest RSRP at its position; all other beams interfere. "
       << "UAVs served by the same beam share its bandwidth equally.\n"
       << "Area: x in [" << detail::fmt2(a.x_min) << ", " << detail::fmt2(a.x_max) << "] m, y in ["
       << detail::fmt2(a.y_min) << ", " << detail::fmt2(a.y_max) << "] m, altitude "
       << detail::fmt2(problem.altitude) << " m.\n"
       << "Minimum separation between UAVs: " << detail::fmt2(problem.min_separation) << " m.\n"
       << "Bandwidth per beam: " << detail::fmt2(problem.channel.bandwidth / 1e6) << " MHz; noise power "
       << detail::fmt2(problem.channel.noise_power) << " dBm.\n"
       << "The table below lists measured RSRP in dBm per beam every " << detail::fmt2(step * g.resolution)
       << " m (NaN = no measurement).";
  prompt.task_text = task.str();

  std::string digest = "beam,x,y,rsrp_dbm\n";
  for (int b = 0; b < g.beam_count; ++b)
    for (int iy = iy0; iy <= iy1; iy += step)
      for (int ix = ix0; ix <= ix1; ix += step) {
        digest += std::to_string(b);
        digest += ',';
        digest += detail::fmt2(map.x_of(ix));
        digest += ',';
        digest += detail::fmt2(map.y_of(iy));
        digest += ',';
        digest += detail::fmt2(map.at(b, ix, iy));
        digest += '\n';
        if (digest.size() > kDigestCap)
          throw ConfigError("build_prompt: RSRP digest exceeds 100 kB; use a larger stride than " +
                            detail::fmt2(stride) + " m");
      }
  prompt.map_digest = std::move(digest);

  prompt.response_schema_text = "Reply with exactly " + std::to_string(problem.uav_count) +
                                " coordinate pairs as a fenced JSON array, for example:\n```json\n[[x1, y1], ...]\n```";
  return prompt;
}

/// Extracts K (x, y) pairs from the first fenced block holding a JSON array.
inline std::vector<XY> parse_coordinates(std::string_view text, int expected) {
  std::optional<nlohmann::json> array;
  std::size_t pos = 0;
  while (!array) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body_start = open + 3;
    const auto close = text.find("```", body_start);
    if (close == std::string_view::npos) break;
    // Skip an info string such as "json" up to the first bracket or newline.
    while (body_start < close && std::isalpha(static_cast<unsigned char>(text[body_start]))) ++body_start;
    auto parsed = nlohmann::json::parse(text.substr(body_start, close - body_start), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) array = std::move(parsed);
    pos = close + 3;
  }
  if (!array) throw LlmError(LlmError::Code::parse, "no fenced JSON array in response");

  std::vector<XY> out;
  for (const auto& pair : *array) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw LlmError(LlmError::Code::parse, "array entries must be numeric [x, y] pairs");
    out.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  if (static_cast<int>(out.size()) != expected)
    throw LlmError(LlmError::Code::arity,
                   "expected " + std::to_string(expected) + " pairs, got " + std::to_string(out.size()));
  return out;
}

/// One gateway handle: one request in flight at a time.
class LlmGateway {
 public:
  LlmGateway(GatewayConfig cfg, Transport transport = {}) : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    cfg_.validate();
    if (!cfg_.is_mock() && !transport_) throw ConfigError("llm: live mode requires a transport");
  }

  const GatewayConfig& config() const { return cfg_; }
  bool deterministic() const { return cfg_.is_mock(); }

  /// One chat completion; returns choices[0].message.content.
  std::string complete(const std::string& user_text) {
    if (cfg_.is_mock()) {
      const auto& script = *cfg_.mock_script;
      const std::string& reply = script[std::min(cursor_, script.size() - 1)];
      ++cursor_;
      return reply;
    }
    nlohmann::json body = {{"model", cfg_.model_name},
                           {"messages",
                            nlohmann::json::array({{{"role", "system"}, {"content", kSystemPrompt}},
                                                   {{"role", "user"}, {"content", user_text}}})},
                           {"temperature", 0}};
    HttpRequest req{cfg_.endpoint_url,
                    {{"Authorization", "Bearer " + cfg_.api_key}, {"Content-Type", "application/json"}},
                    body.dump(),
                    cfg_.timeout_s};
    HttpResponse resp;
    try {
      resp = transport_(req);
    } catch (const std::exception& e) {
      throw LlmError(LlmError::Code::transport, detail::scrub(e.what(), cfg_.api_key));
    }
    if (resp.status < 200 || resp.status >= 300)
      throw LlmError(LlmError::Code::http, "status " + std::to_string(resp.status));
    const auto json = nlohmann::json::parse(resp.body, nullptr, false);
    if (json.is_discarded() || !json.contains("choices") || !json["choices"].is_array() || json["choices"].empty() ||
        !json["choices"][0].contains("message") || !json["choices"][0]["message"].contains("content") ||
        !json["choices"][0]["message"]["content"].is_string())
      throw LlmError(LlmError::Code::parse, "response lacks choices[0].message.content");
    return json["choices"][0]["message"]["content"].get<std::string>();
  }

  /// Sends the prompt and parses K coordinate pairs, retrying transport and
  /// parse failures up to max_retries times.
  std::vector<XY> request_placement(const PlacementPrompt& prompt, int uav_count) {
    const std::string text = prompt.text();
    std::optional<LlmError> last;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      try {
        return parse_coordinates(complete(text), uav_count);
      } catch (const LlmError& e) {
        if (e.code() == LlmError::Code::http) throw;
        last = e;
      }
    }
    throw *last;
  }

 private:
  GatewayConfig cfg_;
  Transport transport_;
  std::size_t cursor_ = 0;
};

}  // namespace skyplan
