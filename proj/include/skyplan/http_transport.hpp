#pragma once

// Live HTTP(S) transport for LlmGateway, backed by cpp-httplib. HTTPS needs
// CPPHTTPLIB_OPENSSL_SUPPORT and OpenSSL at link time.

#include <stdexcept>
#include <string>

#include <httplib.h>

#include "skyplan/llm_gateway.hpp"

namespace skyplan {

struct ParsedUrl {
  std::string scheme_host_port;  ///< e.g. https://api.example.com:443
  std::string path;              ///< e.g. /v1/chat/completions
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("llm: endpoint_url must include a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline Transport make_http_transport() {
  return [](const HttpRequest& req) -> HttpResponse {
    const ParsedUrl u = split_url(req.url);
    httplib::Client client(u.scheme_host_port);
    const auto secs = static_cast<time_t>(req.timeout_s);
    const auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : req.headers) {
      if (k == "Content-Type")
        content_type = v;
      else
        headers.emplace(k, v);
    }
    auto res = client.Post(u.path, headers, req.body, content_type);
    if (!res) throw std::runtime_error("request to " + u.scheme_host_port + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  };
}

}  // namespace skyplan
