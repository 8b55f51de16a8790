#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "skyplan/llm_gateway.hpp"
#include "skyplan/placement/brute_force.hpp"
#include "skyplan/placement/llm_placement.hpp"

using namespace skyplan;

namespace {

const std::string kSecret = "sk-test-0123456789abcdef";

GatewayConfig mock(std::vector<std::string> script, int retries = 2) {
  GatewayConfig c;
  c.mock_script = std::move(script);
  c.max_retries = retries;
  return c;
}

GatewayConfig live() {
  GatewayConfig c;
  c.endpoint_url = "https://llm.invalid/v1/chat/completions";
  c.model_name = "test-model";
  c.api_key = kSecret;
  c.timeout_s = 5.0;
  return c;
}

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

CoverageMap ramp_map(int nx, int ny, int beams = 1) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.beam_count = beams;
  CoverageMap m(g);
  for (int b = 0; b < beams; ++b)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) m.set(b, ix, iy, -100.0 + 0.05 * ix + 0.025 * iy - 3.0 * b);
  return m;
}

PlacementProblem problem_for(const CoverageMap& m, int k) {
  PlacementProblem p;
  p.uav_count = k;
  p.area = map_area(m);
  p.altitude = m.altitude();
  p.min_separation = 2.0;
  return p;
}

int count_lines(const std::string& s, const std::string& prefix) {
  int n = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto end = s.find('\n', pos);
    if (s.compare(pos, prefix.size(), prefix) == 0) ++n;
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return n;
}

}  // namespace

TEST(Parse, FencedArray) {
  const auto xy = parse_coordinates("```json [[10,20]] ```", 1);
  ASSERT_EQ(xy.size(), 1u);
  EXPECT_EQ(xy[0].x, 10.0);
  EXPECT_EQ(xy[0].y, 20.0);
}

TEST(Parse, IndependentOfProse) {
  const std::string block = "```json\n[[1.5, 2], [3, 4.25]]\n```";
  const std::vector<std::string> wraps = {"%", "Sure! Here you go:\n%\nThese maximize the rate.",
                                         "Reasoning [not json] first.\n\n%", "``` not an array ```\n%"};
  for (const std::string& wrap : wraps) {
    std::string text = wrap;
    text.replace(text.find('%'), 1, block);
    const auto xy = parse_coordinates(text, 2);
    ASSERT_EQ(xy.size(), 2u) << text;
    EXPECT_EQ(xy[1].y, 4.25);
  }
}

TEST(Parse, Failures) {
  try {
    parse_coordinates("I would place them near the center.", 1);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::parse);
  }
  try {
    parse_coordinates("```json [[1,2],[3,4]] ```", 3);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::arity);
  }
  try {
    parse_coordinates("```json [[1,\"a\"]] ```", 1);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::parse);
  }
}

TEST(Gateway, ConfigValidation) {
  EXPECT_THROW(LlmGateway(mock({})), ConfigError);
  EXPECT_THROW(LlmGateway(mock({"x"}, -1)), ConfigError);
  GatewayConfig no_key = live();
  no_key.api_key.clear();
  EXPECT_THROW(LlmGateway(no_key, [](const HttpRequest&) { return HttpResponse{}; }), ConfigError);
  GatewayConfig no_url = live();
  no_url.endpoint_url.clear();
  EXPECT_THROW(LlmGateway(no_url, [](const HttpRequest&) { return HttpResponse{}; }), ConfigError);
  EXPECT_THROW(LlmGateway{live()}, ConfigError);
}

TEST(Gateway, MockMakesNoNetworkCalls) {
  int calls = 0;
  LlmGateway gw(mock({"```json [[10,20]] ```"}), [&](const HttpRequest&) {
    ++calls;
    return HttpResponse{};
  });
  PlacementPrompt prompt{"task", "digest", "schema"};
  const auto xy = gw.request_placement(prompt, 1);
  EXPECT_EQ(xy[0].x, 10.0);
  EXPECT_EQ(calls, 0);
  EXPECT_TRUE(gw.deterministic());
}

TEST(Gateway, MockRetriesThenParseError) {
  LlmGateway gw(mock({"no block here", "still prose", "prose again"}, 2));
  try {
    gw.request_placement({"t", "d", "s"}, 1);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::parse);
  }
}

TEST(Gateway, MockRetryRecovers) {
  LlmGateway gw(mock({"prose", "```json [[5,6]] ```"}, 1));
  const auto xy = gw.request_placement({"t", "d", "s"}, 1);
  EXPECT_EQ(xy[0].y, 6.0);
}

TEST(Gateway, MockArityError) {
  LlmGateway gw(mock({"```json [[1,2],[3,4]] ```"}, 0));
  try {
    gw.request_placement({"t", "d", "s"}, 3);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::arity);
  }
}

TEST(Gateway, LiveRequestShape) {
  std::vector<HttpRequest> seen;
  LlmGateway gw(live(), [&](const HttpRequest& r) {
    seen.push_back(r);
    return HttpResponse{200, completion("```json\n[[7, 8]]\n```")};
  });
  const auto xy = gw.request_placement({"task", "digest", "schema"}, 1);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(xy[0].x, 7.0);
  const auto& r = seen[0];
  EXPECT_EQ(r.url, live().endpoint_url);
  EXPECT_EQ(r.timeout_s, 5.0);
  bool auth = false;
  for (const auto& [k, v] : r.headers)
    if (k == "Authorization") auth = (v == "Bearer " + kSecret);
  EXPECT_TRUE(auth);
  const auto body = nlohmann::json::parse(r.body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["temperature"], 0);
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_EQ(body["messages"][1]["content"], PlacementPrompt({"task", "digest", "schema"}).text());
  EXPECT_EQ(r.body.find(kSecret), std::string::npos);
}

TEST(Gateway, TransportErrorsRetriedAndScrubbed) {
  int calls = 0;
  LlmGateway gw(live(), [&](const HttpRequest&) -> HttpResponse {
    ++calls;
    throw std::runtime_error("connect failed with key " + kSecret);
  });
  try {
    gw.request_placement({"t", "d", "s"}, 1);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::transport);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos) << e.what();
  }
  EXPECT_EQ(calls, 3);
}

TEST(Gateway, HttpStatusNotRetried) {
  int calls = 0;
  LlmGateway gw(live(), [&](const HttpRequest&) {
    ++calls;
    return HttpResponse{401, "{\"error\":\"bad key\"}"};
  });
  try {
    gw.request_placement({"t", "d", "s"}, 1);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::http);
    EXPECT_NE(std::string(e.what()).find("401"), std::string::npos);
  }
  EXPECT_EQ(calls, 1);
}

TEST(Gateway, MalformedEnvelopeIsParseError) {
  LlmGateway gw(live(), [](const HttpRequest&) { return HttpResponse{200, "{\"choices\": []}"}; });
  EXPECT_THROW(gw.complete("x"), LlmError);
}

TEST(Prompt, DigestRowsPerBeam) {
  const CoverageMap m = ramp_map(2, 2, 3);
  const auto prompt = build_prompt(problem_for(m, 1), m, m.resolution());
  for (int b = 0; b < 3; ++b) EXPECT_EQ(count_lines(prompt.map_digest, std::to_string(b) + ","), 4);
}

TEST(Prompt, DeterministicAndTemplated) {
  const CoverageMap m = ramp_map(40, 30, 2);
  const auto p = problem_for(m, 3);
  const auto a = build_prompt(p, m, 5.0), b = build_prompt(p, m, 5.0);
  EXPECT_EQ(a.text(), b.text());
  EXPECT_NE(a.task_text.find("place 3 UAVs"), std::string::npos);
  EXPECT_NE(a.response_schema_text.find("exactly 3 coordinate pairs"), std::string::npos);
  EXPECT_NE(a.task_text.find("separation between UAVs: 2 m"), std::string::npos);
  EXPECT_EQ(count_lines(a.map_digest, "0,"), 8 * 6);
}

TEST(Prompt, TwoFractionDigits) {
  const CoverageMap m = ramp_map(4, 4);
  const auto prompt = build_prompt(problem_for(m, 1), m, 1.0);
  std::size_t pos = 0;
  while ((pos = prompt.text().find('.', pos)) != std::string::npos) {
    int digits = 0;
    for (std::size_t i = pos + 1; i < prompt.text().size() && std::isdigit(static_cast<unsigned char>(prompt.text()[i])); ++i)
      ++digits;
    EXPECT_LE(digits, 2);
    ++pos;
  }
}

TEST(Prompt, StrideRules) {
  const CoverageMap m = ramp_map(400, 300, 7);
  const auto p = problem_for(m, 1);
  EXPECT_THROW(build_prompt(p, m, 0.5), ConfigError);
  EXPECT_THROW(build_prompt(p, m, 1.0), ConfigError);  // digest over the cap
  EXPECT_THROW(build_prompt(p, m, 10.0), ConfigError);
  EXPECT_LE(build_prompt(p, m, 20.0).map_digest.size(), kDigestCap);
}

TEST(LlmPlacement, EchoOfOracleOptimumScoresTheSame) {
  const CoverageMap m = ramp_map(30, 20, 2);
  const auto p = problem_for(m, 1);
  const auto best = brute_force_placement(p, m);
  const std::string reply = "```json [[" + std::to_string(best.positions[0].x) + "," +
                            std::to_string(best.positions[0].y) + "]] ```";
  LlmGateway gw(mock({reply}));
  const auto sol = llm_placement(p, m, gw);
  EXPECT_EQ(sol.method, PlacementMethod::llm);
  EXPECT_EQ(sol.sum_rate, best.sum_rate);
}

TEST(LlmPlacement, SuboptimalAnswerIsScoredNotReplaced) {
  const CoverageMap m = ramp_map(30, 20);
  const auto p = problem_for(m, 1);
  LlmGateway gw(mock({"```json [[0, 0]] ```"}));
  const auto sol = llm_placement(p, m, gw);
  EXPECT_EQ(sol.positions[0].x, 0.0);
  EXPECT_LT(sol.sum_rate, brute_force_placement(p, m).sum_rate);
  EXPECT_EQ(to_string(sol.method), "LLM");
}

TEST(LlmPlacement, OutOfAreaThreeTimesIsInfeasible) {
  const CoverageMap m = ramp_map(30, 20);
  const auto p = problem_for(m, 1);
  LlmGateway gw(mock({"```json [[500, 500]] ```"}));
  try {
    llm_placement(p, m, gw);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.code(), LlmError::Code::infeasible);
  }
}

TEST(LlmPlacement, SeparationViolationRetried) {
  const CoverageMap m = ramp_map(30, 20);
  const auto p = problem_for(m, 2);
  LlmGateway gw(mock({"```json [[5, 5], [5.5, 5]] ```", "```json [[5, 5], [15, 5]] ```"}));
  const auto sol = llm_placement(p, m, gw);
  EXPECT_EQ(sol.positions[1].x, 15.0);
  EXPECT_EQ(sol.iterations, 2);
}
