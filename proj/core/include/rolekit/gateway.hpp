#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/cache.hpp"

namespace rolekit {

struct SamplingParams {
  double temperature = 0.5;
  double top_p = 0.7;
  int max_tokens = 2048;
  std::optional<std::int64_t> seed;

  /// Generation and agent-inference defaults: temperature 0.5, top_p 0.7.
  static SamplingParams generation();
  /// Judge defaults: temperature 0.2, top_p 0.95.
  static SamplingParams judging();

  /// temperature in [0,2], top_p in (0,1], max_tokens > 0.
  void validate() const;

  bool operator==(const SamplingParams&) const = default;
};

enum class MessageRole { system, user, assistant };

std::string to_string(MessageRole role);
MessageRole message_role_from_string(std::string_view s);

struct ChatMessage {
  MessageRole role = MessageRole::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

/// Every prompt in the pipeline travels as one user message.
std::vector<ChatMessage> as_user_message(std::string content);

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  SamplingParams params;
};

struct BackendConfig {
  std::string backend_id;
  std::optional<std::string> base_url;
  std::string model_id;
  std::string api_key_env_var;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;

  /// max_retries >= 0; a config with a base_url also needs a key variable name.
  void validate() const;

  /// Keys: backend_id, base_url, model_id, api_key_env_var,
  /// timeout_seconds, max_retries.
  static BackendConfig from_json(const nlohmann::json& j);
};

/// Request body for POST {base_url}/chat/completions: model, messages,
/// temperature, top_p, max_tokens, plus seed when set.
nlohmann::json build_request_body(const ChatRequest& request);

/// Extracts choices[0].message.content; throws ProtocolError on any other shape.
std::string parse_response_body(std::string_view body);

/// SHA-256 over the canonical JSON of (backend_id, model_id, messages,
/// every sampling parameter).
std::string cache_key(std::string_view backend_id, std::string_view model_id,
                      const std::vector<ChatMessage>& messages, const SamplingParams& params);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual const std::string& backend_id() const = 0;
  virtual const std::string& model_id() const = 0;
  /// Live backends go through the in-flight request semaphore.
  virtual bool is_live() const { return false; }

  /// One attempt. Throws TransportError (retryable or not) on failure.
  virtual std::string send(const ChatRequest& request) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct GatewayOptions {
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::shared_ptr<ResponseCache> cache;
  int max_in_flight = 4;
  /// Defaults to std::this_thread::sleep_for.
  Sleeper sleeper;
};

/// Uniform chat-completion entry point: validation, cache lookup, bounded
/// concurrency, retry with exponential backoff (base x2 per attempt, full
/// jitter). Shareable across threads.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  std::string complete(const std::vector<ChatMessage>& messages, const SamplingParams& params);

  Backend& backend() const noexcept { return *backend_; }
  const GatewayOptions& options() const noexcept { return options_; }

  std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::string send_with_retry(const ChatRequest& request);
  std::chrono::milliseconds backoff_delay(int attempt);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  std::unique_ptr<std::counting_semaphore<256>> in_flight_;
  std::mutex jitter_mutex_;
  std::uint64_t jitter_state_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace rolekit
