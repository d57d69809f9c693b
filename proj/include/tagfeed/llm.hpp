#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagfeed/config.hpp"
#include "tagfeed/error.hpp"

namespace tagfeed {

/// Decoding parameters sent with every request.
struct CompletionParams {
  std::string model = "gpt-4";
  double temperature = 0.4;
  int max_tokens = 1000;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;

  friend bool operator==(const CompletionParams&, const CompletionParams&) = default;
};

inline std::vector<std::string> validate_params(const CompletionParams& p) {
  std::vector<std::string> issues;
  if (p.model.empty()) issues.emplace_back("model name is empty");
  if (!(p.temperature >= 0.0 && p.temperature <= 2.0)) issues.emplace_back("temperature must lie in [0, 2]");
  if (p.max_tokens < 1) issues.emplace_back("max_tokens must be at least 1");
  if (!(p.top_p > 0.0 && p.top_p <= 1.0)) issues.emplace_back("top_p must lie in (0, 1]");
  if (!(p.frequency_penalty >= -2.0 && p.frequency_penalty <= 2.0)) issues.emplace_back("frequency_penalty must lie in [-2, 2]");
  if (!(p.presence_penalty >= -2.0 && p.presence_penalty <= 2.0)) issues.emplace_back("presence_penalty must lie in [-2, 2]");
  return issues;
}

inline nlohmann::ordered_json params_to_json(const CompletionParams& p) {
  nlohmann::ordered_json j;
  j["model"] = p.model;
  j["temperature"] = p.temperature;
  j["max_tokens"] = p.max_tokens;
  j["top_p"] = p.top_p;
  j["frequency_penalty"] = p.frequency_penalty;
  j["presence_penalty"] = p.presence_penalty;
  return j;
}

enum class FinishReason { Stop, Length, Error };

inline constexpr std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int total_tokens = 0;
};

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  TokenUsage usage;
  int retries = 0;

  /// The backend stopped at max_tokens; the text may be cut off.
  bool truncated() const { return finish_reason == FinishReason::Length; }
};

/// Chat-completion request body: a single user message carrying the whole prompt.
inline std::string serialize_request(std::string_view prompt, const CompletionParams& p) {
  nlohmann::ordered_json body;
  body["model"] = p.model;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", std::string(prompt)}}});
  body["temperature"] = p.temperature;
  body["max_tokens"] = p.max_tokens;
  body["top_p"] = p.top_p;
  body["frequency_penalty"] = p.frequency_penalty;
  body["presence_penalty"] = p.presence_penalty;
  return body.dump();
}

/// Parses a chat-completion response body. Throws Error(BackendError) on a malformed body.
inline CompletionResult parse_response(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BackendError, "response is not a JSON object");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw Error(ErrorCode::BackendError, "response has no choices");
  }
  const auto& choice = j["choices"][0];
  CompletionResult r;
  if (choice.contains("message") && choice["message"].contains("content") && choice["message"]["content"].is_string()) {
    r.text = choice["message"]["content"].get<std::string>();
  }
  std::string finish = choice.value("finish_reason", std::string("stop"));
  if (choice.contains("finish_reason") && choice["finish_reason"].is_null()) finish = "stop";
  if (finish == "stop") r.finish_reason = FinishReason::Stop;
  else if (finish == "length") r.finish_reason = FinishReason::Length;
  else r.finish_reason = FinishReason::Error;
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    r.usage.prompt_tokens = u.value("prompt_tokens", 0);
    r.usage.completion_tokens = u.value("completion_tokens", 0);
    r.usage.total_tokens = u.value("total_tokens", r.usage.prompt_tokens + r.usage.completion_tokens);
  }
  return r;
}

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Identifier recorded in report metadata, e.g. "mock" or "http:<url>".
  virtual std::string id() const = 0;

  /// Returns a result or throws tagfeed::Error. Must be safe to call concurrently.
  virtual CompletionResult complete(std::string_view prompt, const CompletionParams& params) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

/// Exponential backoff with a cap per delay and a cap on total waiting.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{16000};
  std::chrono::milliseconds max_total_wait{60000};

  static RetryPolicy from(const EndpointSettings& ep) {
    return {ep.max_attempts, std::chrono::milliseconds(ep.initial_backoff_ms),
            std::chrono::milliseconds(ep.max_backoff_ms), std::chrono::milliseconds(ep.max_total_wait_ms)};
  }

  /// Delay before retry number `retry` (1-based), honouring a server hint up to max_backoff.
  std::chrono::milliseconds delay(int retry, std::optional<std::chrono::milliseconds> hint = std::nullopt) const {
    auto d = initial_backoff;
    for (int i = 1; i < retry && d < max_backoff; ++i) d *= 2;
    if (hint && *hint > d) d = *hint;
    return std::min(d, max_backoff);
  }
};

/// Calls `attempt` until it succeeds, a non-retryable Error is thrown, the attempt
/// budget is spent, or the next wait would exceed the total-wait bound. The number
/// of retries performed is written to `retries`.
template <typename Attempt>
auto with_retries(Attempt&& attempt, const RetryPolicy& policy, const Sleeper& sleep, int& retries)
    -> decltype(attempt()) {
  retries = 0;
  std::chrono::milliseconds waited{0};
  for (int n = 1;; ++n) {
    try {
      return attempt();
    } catch (const Error& e) {
      if (!e.retryable() || n >= policy.max_attempts) throw;
      auto d = policy.delay(n, e.retry_after());
      if (waited + d > policy.max_total_wait) throw;
      sleep(d);
      waited += d;
      ++retries;
    }
  }
}

/// Spaces request starts at least 1/rate seconds apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second = 0.0) : rate_(requests_per_second) {}

  void acquire() {
    if (rate_ <= 0.0) return;
    using clock = std::chrono::steady_clock;
    auto interval = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate_));
    clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      auto now = clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  double rate_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

/// 64-bit FNV-1a; stable across platforms and runs.
inline std::uint64_t stable_digest(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

/// Offline backend. Produces a six-section pseudo-report that depends only on the
/// prompt text: section titles and tag lines are taken from the prompt and the
/// phrasing is chosen by a digest of the prompt.
class MockBackend final : public CompletionBackend {
 public:
  std::string id() const override { return "mock"; }

  CompletionResult complete(std::string_view prompt, const CompletionParams& params) override {
    if (prompt.empty()) throw Error(ErrorCode::BackendError, "empty prompt");
    const auto digest = stable_digest(prompt);
    auto sections = parse_sections(prompt);

    static constexpr std::array<std::string_view, 4> openers{
        "You have been working steadily, and it shows.",
        "Well done on the effort you have put into your practice.",
        "Your practice this period gives a clear picture of how you learn.",
        "Thank you for the time you have spent practising mathematics."};
    static constexpr std::array<std::string_view, 4> closers{
        "Keep going: every question you try helps you grow.",
        "With steady practice you will keep improving.",
        "Be proud of your progress and keep asking questions.",
        "Small steps each day will take you far."};

    std::ostringstream out;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      const auto& s = sections[i];
      out << "## " << s.title << "\n\n";
      if (i == 0) out << openers[digest % openers.size()] << "\n";
      if (s.items.empty()) {
        out << (s.no_data ? "There is not enough information yet for a detailed picture here; more practice will help."
                          : "This section builds on what you have shown so far.")
            << "\n";
      } else {
        for (const auto& item : s.items) out << "- You: " << item << "\n";
      }
      if (i + 1 == sections.size()) out << closers[(digest >> 8) % closers.size()] << "\n";
      out << "\n";
    }
    out << "_Offline draft (prompt digest " << hex64(digest) << ")._\n";

    CompletionResult r;
    r.text = out.str();
    r.finish_reason = FinishReason::Stop;
    r.usage.prompt_tokens = static_cast<int>(count_words(prompt));
    r.usage.completion_tokens = static_cast<int>(count_words(r.text));
    if (r.usage.completion_tokens > params.max_tokens) {
      r.usage.completion_tokens = params.max_tokens;
      r.finish_reason = FinishReason::Length;
    }
    r.usage.total_tokens = r.usage.prompt_tokens + r.usage.completion_tokens;
    return r;
  }

 private:
  struct Section {
    std::string title;
    std::vector<std::string> items;
    bool no_data = false;
  };

  static std::size_t count_words(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
      bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
      if (!ws && !in_word) ++n;
      in_word = !ws;
    }
    return n;
  }

  // Sections are "## <n>. <title>" lines; tag lines start with "- ".
  static std::vector<Section> parse_sections(std::string_view prompt) {
    std::vector<Section> out;
    std::size_t pos = 0;
    while (pos < prompt.size()) {
      auto nl = prompt.find('\n', pos);
      auto line = prompt.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? prompt.size() : nl + 1;
      if (line.rfind("## ", 0) == 0) {
        auto title = line.substr(3);
        if (auto dot = title.find(". "); dot != std::string_view::npos) title = title.substr(dot + 2);
        out.push_back({std::string(title), {}, false});
      } else if (!out.empty() && line.rfind("- ", 0) == 0) {
        out.back().items.emplace_back(line.substr(2));
      } else if (!out.empty() && (line.find("insufficient data") != std::string_view::npos ||
                                  line.find("No learning characteristics") != std::string_view::npos)) {
        out.back().no_data = true;
      }
    }
    if (out.empty()) out.push_back({"Report", {}, true});
    return out;
  }
};

struct CompletionRequest {
  std::size_t id = 0;
  std::string prompt;
};

struct CompletionOutcome {
  std::size_t id = 0;
  std::optional<CompletionResult> result;
  std::optional<ErrorCode> error;
  std::string error_message;

  bool ok() const { return result.has_value(); }
};

/// Runs requests with at most `max_concurrency` in flight. Outcomes are returned in
/// request order, each tagged with its request id.
inline std::vector<CompletionOutcome> complete_all(CompletionBackend& backend, const std::vector<CompletionRequest>& requests,
                                                   const CompletionParams& params, int max_concurrency) {
  std::vector<CompletionOutcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      auto& o = outcomes[i];
      o.id = requests[i].id;
      try {
        o.result = backend.complete(requests[i].prompt, params);
      } catch (const Error& e) {
        o.error = e.code();
        o.error_message = e.what();
      } catch (const std::exception& e) {
        o.error = ErrorCode::BackendError;
        o.error_message = e.what();
      }
    }
  };
  auto threads = static_cast<std::size_t>(std::max(1, max_concurrency));
  threads = std::min(threads, requests.size());
  if (threads <= 1) {
    worker();
    return outcomes;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace tagfeed
