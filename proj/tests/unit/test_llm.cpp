#include <cstdlib>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/stub_server.hpp"
#include "tagfeed/http_backend.hpp"
#include "tagfeed/prompt.hpp"

using namespace tagfeed;
using std::chrono::milliseconds;

namespace {

EndpointSettings stub_settings(const testsupport::StubServer& stub) {
  ::setenv("TAGFEED_TEST_KEY", "test-secret", 1);
  EndpointSettings ep;
  ep.url = stub.url();
  ep.api_key_env = "TAGFEED_TEST_KEY";
  ep.timeout_seconds = 5;
  return ep;
}

struct RecordingSleeper {
  std::shared_ptr<std::vector<milliseconds>> waits = std::make_shared<std::vector<milliseconds>>();
  Sleeper fn() {
    auto w = waits;
    return [w](milliseconds d) { w->push_back(d); };
  }
};

}  // namespace

TEST(Mock, Deterministic) {
  MockBackend mock;
  auto prompt = render_prompt(TagSet{}, default_template());
  auto a = mock.complete(prompt, {});
  auto b = mock.complete(prompt, {});
  EXPECT_EQ(a.text, b.text);
  EXPECT_FALSE(a.truncated());
}

TEST(Mock, DifferentPromptsDiffer) {
  MockBackend mock;
  TagSet t;
  t.set(*TagId::parse("Tag_3_3"));
  auto tmpl = default_template();
  EXPECT_NE(mock.complete(render_prompt(TagSet{}, tmpl), {}).text, mock.complete(render_prompt(t, tmpl), {}).text);
  EXPECT_NE(mock.complete("a", {}).text, mock.complete("b", {}).text);
}

TEST(Mock, ReportsTruncationAtTokenLimit) {
  MockBackend mock;
  CompletionParams p;
  p.max_tokens = 5;
  auto r = mock.complete(render_prompt(TagSet{}, default_template()), p);
  EXPECT_TRUE(r.truncated());
  EXPECT_EQ(r.usage.completion_tokens, 5);
}

TEST(Wire, DefaultRequestBody) {
  CompletionParams p;
  auto body = serialize_request("hello", p);
  EXPECT_EQ(body,
            R"({"model":"gpt-4","messages":[{"role":"user","content":"hello"}],"temperature":0.4,)"
            R"("max_tokens":1000,"top_p":1.0,"frequency_penalty":0.0,"presence_penalty":0.0})");
  auto j = nlohmann::json::parse(body);
  EXPECT_EQ(j["temperature"].get<double>(), 0.4);
  EXPECT_EQ(j["max_tokens"].get<int>(), 1000);
}

TEST(Wire, ParsesResponse) {
  auto r = parse_response(testsupport::completion_body("hi", "length"));
  EXPECT_EQ(r.text, "hi");
  EXPECT_TRUE(r.truncated());
  EXPECT_EQ(r.usage.total_tokens, 18);
  EXPECT_THROW(parse_response("{}"), Error);
  EXPECT_THROW(parse_response("not json"), Error);
}

TEST(Params, Validation) {
  EXPECT_TRUE(validate_params({}).empty());
  CompletionParams p;
  p.temperature = 3.0;
  p.max_tokens = 0;
  EXPECT_EQ(validate_params(p).size(), 2u);
}

TEST(Retry, BackoffBounds) {
  RetryPolicy policy{5, milliseconds(100), milliseconds(350), milliseconds(1000)};
  EXPECT_EQ(policy.delay(1), milliseconds(100));
  EXPECT_EQ(policy.delay(2), milliseconds(200));
  EXPECT_EQ(policy.delay(3), milliseconds(350));
  EXPECT_EQ(policy.delay(9), milliseconds(350));
  EXPECT_EQ(policy.delay(1, milliseconds(300)), milliseconds(300));
  EXPECT_EQ(policy.delay(1, milliseconds(5000)), milliseconds(350));
}

TEST(Retry, StopsAtMaxAttempts) {
  RetryPolicy policy;  // 3 attempts
  RecordingSleeper sleeper;
  int calls = 0, retries = -1;
  auto always_fail = [&]() -> int {
    ++calls;
    throw Error(ErrorCode::NetworkError, "down");
  };
  EXPECT_THROW(with_retries(always_fail, policy, sleeper.fn(), retries), Error);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(retries, 2);
  EXPECT_EQ(*sleeper.waits, (std::vector<milliseconds>{milliseconds(1000), milliseconds(2000)}));
}

TEST(Retry, StopsAtTotalWait) {
  RetryPolicy policy{10, milliseconds(400), milliseconds(400), milliseconds(1000)};
  RecordingSleeper sleeper;
  int calls = 0, retries = 0;
  auto always_fail = [&]() -> int {
    ++calls;
    throw Error(ErrorCode::RateLimited, "slow down");
  };
  EXPECT_THROW(with_retries(always_fail, policy, sleeper.fn(), retries), Error);
  EXPECT_EQ(calls, 3);
  milliseconds total{0};
  for (auto w : *sleeper.waits) total += w;
  EXPECT_LE(total, policy.max_total_wait);
}

TEST(Retry, NonRetryableFailsFast) {
  RecordingSleeper sleeper;
  int calls = 0, retries = 0;
  auto auth = [&]() -> int {
    ++calls;
    throw Error(ErrorCode::AuthError, "no");
  };
  EXPECT_THROW(with_retries(auth, RetryPolicy{}, sleeper.fn(), retries), Error);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(sleeper.waits->empty());
}

TEST(Http, RateLimitedThenSuccess) {
  testsupport::StubServer stub;
  stub.push({429, R"({"error":"busy"})", "0"});
  stub.push({200, testsupport::completion_body("report text"), ""});
  RecordingSleeper sleeper;
  HttpBackend backend(stub_settings(stub), sleeper.fn());
  auto r = backend.complete("prompt", {});
  EXPECT_EQ(r.text, "report text");
  EXPECT_EQ(r.retries, 1);
  EXPECT_EQ(sleeper.waits->size(), 1u);
  auto bodies = stub.bodies();
  ASSERT_EQ(bodies.size(), 2u);
  EXPECT_EQ(bodies[0], bodies[1]);
  EXPECT_EQ(stub.auth_headers()[0], "Bearer test-secret");
}

TEST(Http, CapturedBodyCarriesDefaults) {
  testsupport::StubServer stub;
  HttpBackend backend(stub_settings(stub), [](milliseconds) {});
  backend.complete("Hello \"quoted\"", CompletionParams{});
  auto j = nlohmann::json::parse(stub.bodies().at(0));
  EXPECT_EQ(j["model"], "gpt-4");
  EXPECT_EQ(j["temperature"].get<double>(), 0.4);
  EXPECT_EQ(j["max_tokens"].get<int>(), 1000);
  EXPECT_EQ(j["top_p"].get<double>(), 1.0);
  EXPECT_EQ(j["frequency_penalty"].get<double>(), 0.0);
  EXPECT_EQ(j["presence_penalty"].get<double>(), 0.0);
  ASSERT_EQ(j["messages"].size(), 1u);
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"], "Hello \"quoted\"");
}

TEST(Http, StatusMapping) {
  testsupport::StubServer stub;
  auto settings = stub_settings(stub);
  settings.max_attempts = 1;
  HttpBackend backend(settings, [](milliseconds) {});
  auto code_for = [&](int status) {
    stub.push({status, "{}", ""});
    try {
      backend.complete("p", {});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::EmptyInput;
  };
  EXPECT_EQ(code_for(401), ErrorCode::AuthError);
  EXPECT_EQ(code_for(403), ErrorCode::AuthError);
  EXPECT_EQ(code_for(429), ErrorCode::RateLimited);
  EXPECT_EQ(code_for(503), ErrorCode::NetworkError);
  EXPECT_EQ(code_for(400), ErrorCode::BackendError);
}

TEST(Http, MissingCredential) {
  ::unsetenv("TAGFEED_ABSENT_KEY");
  EndpointSettings ep;
  ep.api_key_env = "TAGFEED_ABSENT_KEY";
  try {
    HttpBackend backend(ep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuthError);
  }
}

TEST(Http, UnreachableEndpointIsNetworkError) {
  ::setenv("TAGFEED_TEST_KEY", "k", 1);
  EndpointSettings ep;
  ep.url = "http://127.0.0.1:1/v1/chat/completions";
  ep.api_key_env = "TAGFEED_TEST_KEY";
  ep.timeout_seconds = 2;
  RecordingSleeper sleeper;
  HttpBackend backend(ep, sleeper.fn());
  try {
    backend.complete("p", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NetworkError);
  }
  EXPECT_EQ(sleeper.waits->size(), 2u);
}

TEST(Gateway, CompleteAllKeepsRequestOrder) {
  MockBackend mock;
  std::vector<CompletionRequest> reqs;
  for (std::size_t i = 0; i < 20; ++i) reqs.push_back({i * 10, "prompt " + std::to_string(i)});
  reqs.push_back({999, ""});
  auto out = complete_all(mock, reqs, {}, 4);
  ASSERT_EQ(out.size(), reqs.size());
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(out[i].id, i * 10);
    ASSERT_TRUE(out[i].ok());
    EXPECT_EQ(out[i].result->text, mock.complete(reqs[i].prompt, {}).text);
  }
  EXPECT_FALSE(out.back().ok());
}

TEST(Endpoint, UrlSplit) {
  auto u = split_endpoint_url("https://api.example.com/v1/chat/completions");
  EXPECT_EQ(u.scheme_host_port, "https://api.example.com");
  EXPECT_EQ(u.path, "/v1/chat/completions");
  EXPECT_THROW(split_endpoint_url("ftp://x/y"), Error);
}
