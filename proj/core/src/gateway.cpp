#include "rolekit/gateway.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "rolekit/digest.hpp"
#include "rolekit/error.hpp"
#include "rolekit/text.hpp"

using nlohmann::json;

namespace rolekit {

SamplingParams SamplingParams::generation() { return SamplingParams{0.5, 0.7, 2048, std::nullopt}; }

SamplingParams SamplingParams::judging() { return SamplingParams{0.2, 0.95, 2048, std::nullopt}; }

void SamplingParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ValidationError("temperature must be in [0,2], got " + std::to_string(temperature));
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw ValidationError("top_p must be in (0,1], got " + std::to_string(top_p));
  }
  if (max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

std::string to_string(MessageRole role) {
  switch (role) {
    case MessageRole::system: return "system";
    case MessageRole::user: return "user";
    case MessageRole::assistant: return "assistant";
  }
  return "user";
}

MessageRole message_role_from_string(std::string_view s) {
  if (s == "system") return MessageRole::system;
  if (s == "user") return MessageRole::user;
  if (s == "assistant") return MessageRole::assistant;
  throw ValidationError("unknown message role '" + std::string(s) + "'");
}

std::vector<ChatMessage> as_user_message(std::string content) {
  return {ChatMessage{MessageRole::user, std::move(content)}};
}

void BackendConfig::validate() const {
  if (backend_id.empty()) throw ValidationError("backend_id is empty");
  if (model_id.empty()) throw ValidationError("backend " + backend_id + ": model_id is empty");
  if (max_retries < 0) throw ValidationError("backend " + backend_id + ": max_retries must be >= 0");
  if (base_url && api_key_env_var.empty()) {
    throw ValidationError("backend " + backend_id + ": live backends need api_key_env_var");
  }
  if (request_timeout.count() <= 0) throw ValidationError("backend " + backend_id + ": timeout must be positive");
}

BackendConfig BackendConfig::from_json(const json& j) {
  BackendConfig c;
  try {
    c.backend_id = j.at("backend_id").get<std::string>();
    if (j.contains("base_url") && !j.at("base_url").is_null()) c.base_url = j.at("base_url").get<std::string>();
    c.model_id = j.value("model_id", std::string("gpt-4o"));
    c.api_key_env_var = j.value("api_key_env_var", std::string{});
    auto seconds = j.value("timeout_seconds", 60.0);
    c.request_timeout = std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
    c.max_retries = j.value("max_retries", 3);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("backend config: ") + e.what());
  }
  c.validate();
  return c;
}

json build_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body = {{"model", request.model_id},
               {"messages", std::move(messages)},
               {"temperature", request.params.temperature},
               {"top_p", request.params.top_p},
               {"max_tokens", request.params.max_tokens}};
  if (request.params.seed) body["seed"] = *request.params.seed;
  return body;
}

std::string parse_response_body(std::string_view body) {
  try {
    auto j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string cache_key(std::string_view backend_id, std::string_view model_id,
                      const std::vector<ChatMessage>& messages, const SamplingParams& params) {
  json messages_json = json::array();
  for (const auto& m : messages) messages_json.push_back({to_string(m.role), m.content});
  json material = {{"backend_id", backend_id},
                   {"model_id", model_id},
                   {"messages", std::move(messages_json)},
                   {"temperature", params.temperature},
                   {"top_p", params.top_p},
                   {"max_tokens", params.max_tokens},
                   {"seed", params.seed ? json(*params.seed) : json(nullptr)}};
  return sha256_hex(material.dump());
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)), jitter_state_(std::random_device{}()) {
  if (!backend_) throw ValidationError("gateway needs a backend");
  if (options_.max_retries < 0) throw ValidationError("max_retries must be >= 0");
  auto slots = std::clamp(options_.max_in_flight, 1, 256);
  in_flight_ = std::make_unique<std::counting_semaphore<256>>(slots);
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::string Gateway::complete(const std::vector<ChatMessage>& messages, const SamplingParams& params) {
  if (messages.empty()) throw ValidationError("complete: messages must not be empty");
  for (const auto& m : messages) {
    if (m.content.empty()) throw ValidationError("complete: message content must not be empty");
  }
  params.validate();

  std::string key;
  if (options_.cache) {
    key = cache_key(backend_->backend_id(), backend_->model_id(), messages, params);
    if (auto hit = options_.cache->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }

  ChatRequest request{backend_->model_id(), messages, params};
  auto text = send_with_retry(request);
  if (text::trim(text).empty()) {
    throw ProtocolError("backend " + backend_->backend_id() + " returned an empty completion");
  }
  if (options_.cache) options_.cache->put(key, text);
  return text;
}

std::string Gateway::send_with_retry(const ChatRequest& request) {
  for (int attempt = 0;; ++attempt) {
    try {
      ++backend_calls_;
      if (backend_->is_live()) {
        in_flight_->acquire();
        struct Release {
          std::counting_semaphore<256>& s;
          ~Release() { s.release(); }
        } release{*in_flight_};
        return backend_->send(request);
      }
      return backend_->send(request);
    } catch (const TransportError& e) {
      if (!e.retryable()) throw;
      if (attempt >= options_.max_retries) {
        throw TransportError("backend " + backend_->backend_id() + ": retries exhausted after " +
                                 std::to_string(attempt + 1) + " attempts: " + e.what(),
                             false, e.status());
      }
      auto delay = backoff_delay(attempt);
      spdlog::warn("backend {} attempt {} failed ({}); retrying in {} ms", backend_->backend_id(),
                   attempt + 1, e.what(), delay.count());
      options_.sleeper(delay);
    }
  }
}

std::chrono::milliseconds Gateway::backoff_delay(int attempt) {
  double cap = static_cast<double>(options_.backoff_base.count()) * std::pow(2.0, attempt);
  std::lock_guard lock(jitter_mutex_);
  std::mt19937_64 rng(jitter_state_++);
  std::uniform_real_distribution<double> dist(0.0, cap);
  return std::chrono::milliseconds(static_cast<long long>(dist(rng)));
}

}  // namespace rolekit
