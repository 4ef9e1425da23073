#include "rolekit/http_backend.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "rolekit/error.hpp"

namespace rolekit {

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!config_.base_url) throw ValidationError("backend " + config_.backend_id + ": base_url is required");
  const std::string& url = *config_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("backend " + config_.backend_id + ": base_url needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpBackend::send(const ChatRequest& request) {
  httplib::Client client(origin_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  } else {
    spdlog::debug("backend {}: {} not set; sending without Authorization", config_.backend_id,
                  config_.api_key_env_var);
  }

  auto body = build_request_body(request).dump();
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    throw TransportError("backend " + config_.backend_id + ": " + httplib::to_string(res.error()), true);
  }
  int status = res->status;
  if (status >= 200 && status < 300) return parse_response_body(res->body);
  bool retryable = status == 408 || status == 429 || status >= 500;
  throw TransportError("backend " + config_.backend_id + ": HTTP " + std::to_string(status), retryable, status);
}

}  // namespace rolekit
