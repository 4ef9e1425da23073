#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "rolekit/cache.hpp"
#include "rolekit/error.hpp"
#include "rolekit/gateway.hpp"
#include "rolekit/http_backend.hpp"
#include "rolekit/mock_backend.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

using namespace std::chrono_literals;

std::shared_ptr<CallbackBackend> echo_backend() {
  return std::make_shared<CallbackBackend>("cb", "m1", [](const ChatRequest& r) { return "echo:" + r.messages[0].content; });
}

TEST(SamplingParams, PresetsAndValidation) {
  auto g = SamplingParams::generation();
  EXPECT_DOUBLE_EQ(g.temperature, 0.5);
  EXPECT_DOUBLE_EQ(g.top_p, 0.7);
  auto j = SamplingParams::judging();
  EXPECT_DOUBLE_EQ(j.temperature, 0.2);
  EXPECT_DOUBLE_EQ(j.top_p, 0.95);

  SamplingParams bad;
  bad.temperature = 2.5;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = {};
  bad.top_p = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = {};
  bad.max_tokens = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Gateway, RejectsEmptyMessagesBeforeCallingTheBackend) {
  auto backend = echo_backend();
  Gateway gw(backend);
  EXPECT_THROW(gw.complete({}, SamplingParams::generation()), ValidationError);
  EXPECT_THROW(gw.complete(as_user_message(""), SamplingParams::generation()), ValidationError);
  EXPECT_EQ(backend->log().size(), 0u);
}

TEST(Gateway, CacheHitMakesNoBackendCall) {
  testing::TempDir tmp;
  auto backend = echo_backend();
  GatewayOptions opts;
  opts.cache = std::make_shared<ResponseCache>(tmp.path());
  Gateway gw(backend, opts);
  auto first = gw.complete(as_user_message("hello"), SamplingParams::generation());
  EXPECT_EQ(backend->log().size(), 1u);

  Gateway again(backend, opts);
  EXPECT_EQ(again.complete(as_user_message("hello"), SamplingParams::generation()), first);
  EXPECT_EQ(backend->log().size(), 1u);
  EXPECT_EQ(again.backend_calls(), 0u);
  EXPECT_EQ(again.cache_hits(), 1u);

  // Any sampling difference is a different key.
  auto seeded = SamplingParams::generation();
  seeded.seed = 3;
  again.complete(as_user_message("hello"), seeded);
  EXPECT_EQ(backend->log().size(), 2u);
}

TEST(Gateway, CacheKeyCoversEveryInput) {
  auto msgs = as_user_message("x");
  auto p = SamplingParams::generation();
  auto base = cache_key("b", "m", msgs, p);
  EXPECT_EQ(base.size(), 64u);
  EXPECT_EQ(base, cache_key("b", "m", msgs, p));
  EXPECT_NE(base, cache_key("b2", "m", msgs, p));
  EXPECT_NE(base, cache_key("b", "m2", msgs, p));
  EXPECT_NE(base, cache_key("b", "m", as_user_message("y"), p));
  auto q = p;
  q.top_p = 0.71;
  EXPECT_NE(base, cache_key("b", "m", msgs, q));
  q = p;
  q.max_tokens = 10;
  EXPECT_NE(base, cache_key("b", "m", msgs, q));
}

TEST(Gateway, RetriesRetryableFailuresWithGrowingBackoff) {
  std::atomic<int> calls{0};
  auto backend = std::make_shared<CallbackBackend>("cb", "m", [&](const ChatRequest&) -> std::string {
    if (++calls <= 2) throw TransportError("boom", true, 503);
    return "ok";
  });
  std::vector<std::chrono::milliseconds> sleeps;
  GatewayOptions opts;
  opts.backoff_base = 100ms;
  opts.sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  Gateway gw(backend, opts);
  EXPECT_EQ(gw.complete(as_user_message("q"), SamplingParams::generation()), "ok");
  EXPECT_EQ(calls.load(), 3);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_LE(sleeps[0], 100ms);
  EXPECT_LE(sleeps[1], 200ms);
}

TEST(Gateway, NonRetryableFailureIsNotRetried) {
  std::atomic<int> calls{0};
  auto backend = std::make_shared<CallbackBackend>("cb", "m", [&](const ChatRequest&) -> std::string {
    ++calls;
    throw TransportError("bad request", false, 400);
  });
  GatewayOptions opts;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(backend, opts);
  EXPECT_THROW(gw.complete(as_user_message("q"), SamplingParams::generation()), TransportError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(Gateway, RetriesAreBounded) {
  std::atomic<int> calls{0};
  auto backend = std::make_shared<CallbackBackend>("cb", "m", [&](const ChatRequest&) -> std::string {
    ++calls;
    throw TransportError("down", true);
  });
  GatewayOptions opts;
  opts.max_retries = 2;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(backend, opts);
  try {
    gw.complete(as_user_message("q"), SamplingParams::generation());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.exit_code(), 2);
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(Gateway, EmptyCompletionIsAProtocolError) {
  auto backend = std::make_shared<CallbackBackend>("cb", "m", [](const ChatRequest&) { return std::string("  "); });
  Gateway gw(backend);
  EXPECT_THROW(gw.complete(as_user_message("q"), SamplingParams::generation()), ProtocolError);
}

TEST(RequestBody, CarriesSamplingParamsAndSeedOnlyWhenSet) {
  ChatRequest r{"m", as_user_message("hi"), SamplingParams::judging()};
  auto body = build_request_body(r);
  EXPECT_EQ(body["model"], "m");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(body["top_p"].get<double>(), 0.95);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_FALSE(body.contains("seed"));
  r.params.seed = 9;
  EXPECT_EQ(build_request_body(r)["seed"], 9);
}

TEST(ResponseBody, ParsesChoicesAndRejectsOtherShapes) {
  EXPECT_EQ(parse_response_body(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_THROW(parse_response_body("{}"), ProtocolError);
  EXPECT_THROW(parse_response_body("not json"), ProtocolError);
}

TEST(BackendConfig, FromJsonAndValidation) {
  auto c = BackendConfig::from_json({{"backend_id", "local"},
                                     {"base_url", "http://127.0.0.1:1"},
                                     {"model_id", "llama"},
                                     {"api_key_env_var", "KEY"},
                                     {"timeout_seconds", 5},
                                     {"max_retries", 1}});
  EXPECT_EQ(c.request_timeout, 5000ms);
  EXPECT_NO_THROW(c.validate());
  c.api_key_env_var.clear();
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(MockBackend, FirstMatchingRuleWinsAndRequestsAreLogged) {
  auto mock = MockBackend::from_json({{"rules", {{{"match", "alpha"}, {"response", "A"}}, {{"match", "al"}, {"response", "B"}}}},
                                      {"default", "D"}});
  Gateway gw(mock);
  EXPECT_EQ(gw.complete(as_user_message("xx alpha"), SamplingParams::generation()), "A");
  EXPECT_EQ(gw.complete(as_user_message("xx also"), SamplingParams::judging()), "B");
  EXPECT_EQ(gw.complete(as_user_message("none"), SamplingParams::generation()), "D");
  auto reqs = mock->log().requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_DOUBLE_EQ(reqs[1].params.temperature, 0.2);
  EXPECT_NE(mock->model_id(), MockBackend({}, "other").model_id());
}

class FlakyServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      bodies_.push_back(req.body);
      auth_ = req.get_header_value("Authorization");
      int n = ++hits_;
      if (n <= failures_) {
        res.status = status_;
        res.set_content("err", "text/plain");
        return;
      }
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"served"}}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  BackendConfig config() const {
    BackendConfig c;
    c.backend_id = "local";
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model_id = "test-model";
    c.api_key_env_var = "ROLEKIT_TEST_API_KEY";
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  int failures_ = 2;
  int status_ = 500;
  std::vector<std::string> bodies_;
  std::string auth_;
};

TEST_F(FlakyServer, TwoServerErrorsThenSuccess) {
  ::setenv("ROLEKIT_TEST_API_KEY", "secret", 1);
  GatewayOptions opts;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(std::make_shared<HttpBackend>(config()), opts);
  EXPECT_EQ(gw.complete(as_user_message("hello"), SamplingParams::generation()), "served");
  EXPECT_EQ(hits_.load(), 3);
  EXPECT_EQ(auth_, "Bearer secret");
  auto body = nlohmann::json::parse(bodies_.back());
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(body["top_p"].get<double>(), 0.7);
  ::unsetenv("ROLEKIT_TEST_API_KEY");
}

TEST_F(FlakyServer, ClientErrorIsNotRetried) {
  status_ = 401;
  GatewayOptions opts;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(std::make_shared<HttpBackend>(config()), opts);
  try {
    gw.complete(as_user_message("hello"), SamplingParams::generation());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_FALSE(e.retryable());
  }
  EXPECT_EQ(hits_.load(), 1);
}

TEST_F(FlakyServer, RateLimitIsRetried) {
  status_ = 429;
  failures_ = 1;
  GatewayOptions opts;
  opts.sleeper = [](std::chrono::milliseconds) {};
  Gateway gw(std::make_shared<HttpBackend>(config()), opts);
  EXPECT_EQ(gw.complete(as_user_message("hello"), SamplingParams::generation()), "served");
  EXPECT_EQ(hits_.load(), 2);
}

TEST(HttpBackend, UnreachableHostIsARetryableTransportError) {
  BackendConfig c;
  c.backend_id = "dead";
  c.base_url = "http://127.0.0.1:1";
  c.model_id = "m";
  c.api_key_env_var = "UNUSED";
  c.request_timeout = 500ms;
  HttpBackend b(c);
  try {
    b.send({"m", as_user_message("x"), SamplingParams::generation()});
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

}  // namespace
}  // namespace rolekit
