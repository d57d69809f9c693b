#pragma once

// Chat-completion backend over HTTP(S). Kept apart from llm.hpp so that only
// translation units that talk to a server pay for the HTTP client header.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "httplib.h"
#include "tagfeed/config.hpp"
#include "tagfeed/error.hpp"
#include "tagfeed/llm.hpp"

namespace tagfeed {

struct EndpointUrl {
  std::string scheme_host_port;  // e.g. "https://api.openai.com" or "http://127.0.0.1:8080"
  std::string path;              // e.g. "/v1/chat/completions"
};

/// Splits an absolute http(s) URL. Throws Error(InvalidConfig).
inline EndpointUrl split_endpoint_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, "endpoint URL lacks a scheme: " + std::string(url));
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidConfig, "unsupported endpoint scheme: " + std::string(scheme));
  }
  auto path_start = url.find('/', scheme_end + 3);
  EndpointUrl out;
  if (path_start == std::string_view::npos) {
    out.scheme_host_port = std::string(url);
    out.path = "/";
  } else {
    out.scheme_host_port = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  if (out.scheme_host_port.size() <= scheme_end + 3) throw Error(ErrorCode::InvalidConfig, "endpoint URL lacks a host");
  return out;
}

class HttpBackend final : public CompletionBackend {
 public:
  /// Reads the credential from the environment variable named in `settings`.
  /// Throws Error(AuthError) if it is unset or empty.
  explicit HttpBackend(EndpointSettings settings, Sleeper sleeper = real_sleeper())
      : settings_(std::move(settings)),
        url_(split_endpoint_url(settings_.url)),
        sleeper_(std::move(sleeper)),
        limiter_(settings_.requests_per_second) {
    const char* key = std::getenv(settings_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::AuthError, "environment variable " + settings_.api_key_env + " is not set");
    }
    api_key_ = key;
  }

  std::string id() const override { return "http:" + settings_.url; }

  CompletionResult complete(std::string_view prompt, const CompletionParams& params) override {
    if (prompt.empty()) throw Error(ErrorCode::BackendError, "empty prompt");
    const auto body = serialize_request(prompt, params);
    int retries = 0;
    auto result = with_retries([&] { return attempt(body); }, RetryPolicy::from(settings_), sleeper_, retries);
    result.retries = retries;
    return result;
  }

 private:
  CompletionResult attempt(const std::string& body) {
    limiter_.acquire();
    // One client per attempt: httplib clients are not safe for concurrent use.
    httplib::Client client(url_.scheme_host_port);
    client.set_connection_timeout(settings_.timeout_seconds, 0);
    client.set_read_timeout(settings_.timeout_seconds, 0);
    client.set_write_timeout(settings_.timeout_seconds, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(url_.path, headers, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::NetworkError, "request failed: " + httplib::to_string(res.error()));
    }
    const int status = res->status;
    if (status == 200) return parse_response(res->body);
    std::string detail = "HTTP " + std::to_string(status);
    if (status == 401 || status == 403) throw Error(ErrorCode::AuthError, detail);
    if (status == 429) {
      std::optional<std::chrono::milliseconds> hint;
      if (res->has_header("Retry-After")) {
        if (auto secs = text::parse_double(res->get_header_value("Retry-After")); secs && *secs >= 0) {
          hint = std::chrono::milliseconds(static_cast<long long>(*secs * 1000.0));
        }
      }
      throw Error(ErrorCode::RateLimited, detail, hint);
    }
    if (status == 408 || status >= 500) throw Error(ErrorCode::NetworkError, detail);
    throw Error(ErrorCode::BackendError, detail + ": " + res->body.substr(0, 200));
  }

  EndpointSettings settings_;
  EndpointUrl url_;
  Sleeper sleeper_;
  RateLimiter limiter_;
  std::string api_key_;
};

}  // namespace tagfeed
