#pragma once

#include <string>

#include "rolekit/gateway.hpp"

namespace rolekit {

/// OpenAI-compatible chat-completions client.
///
/// POSTs build_request_body() to {base_url}/chat/completions with a bearer
/// token read from the configured environment variable. Connection
/// failures, 408, 429 and 5xx are retryable; other 4xx are not.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);

  const std::string& backend_id() const override { return config_.backend_id; }
  const std::string& model_id() const override { return config_.model_id; }
  bool is_live() const override { return true; }
  std::string send(const ChatRequest& request) override;

  const BackendConfig& config() const noexcept { return config_; }

 private:
  BackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_prefix_;
};

}  // namespace rolekit
