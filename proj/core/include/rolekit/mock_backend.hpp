#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/gateway.hpp"

namespace rolekit {

/// Records every request a test backend receives, in arrival order.
class RequestLog {
 public:
  void record(const ChatRequest& request);
  std::vector<ChatRequest> requests() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

struct MockRule {
  std::string pattern;
  std::string response;
};

/// Deterministic offline backend. The prompt text (all message contents
/// joined by '\n') is matched against each rule's pattern as a substring, in
/// declaration order; the first match wins and the default answers
/// everything else. Reentrant.
class MockBackend final : public Backend {
 public:
  MockBackend(std::vector<MockRule> rules, std::string default_response, std::string backend_id = "mock");

  /// {"rules": [{"match": ..., "response": ...}], "default": ...}
  static std::shared_ptr<MockBackend> from_json(const nlohmann::json& j);
  static std::shared_ptr<MockBackend> load(const std::filesystem::path& path);

  const std::string& backend_id() const override { return backend_id_; }
  /// "mock-" plus a digest of the rule table, so cache keys change with the rules.
  const std::string& model_id() const override { return model_id_; }
  std::string send(const ChatRequest& request) override;

  /// The response the table gives for `prompt`, without recording.
  const std::string& lookup(std::string_view prompt) const;

  const RequestLog& log() const noexcept { return log_; }

 private:
  std::vector<MockRule> rules_;
  std::string default_response_;
  std::string backend_id_;
  std::string model_id_;
  RequestLog log_;
};

std::shared_ptr<MockBackend> mock_rule_table(std::vector<MockRule> rules, std::string default_response);

/// Backend driven by a callable; used for scripted judges, interrogators and
/// fault injection. The callable may throw TransportError.
class CallbackBackend final : public Backend {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;

  CallbackBackend(std::string backend_id, std::string model_id, Handler handler);

  const std::string& backend_id() const override { return backend_id_; }
  const std::string& model_id() const override { return model_id_; }
  std::string send(const ChatRequest& request) override;

  const RequestLog& log() const noexcept { return log_; }

 private:
  std::string backend_id_;
  std::string model_id_;
  Handler handler_;
  RequestLog log_;
};

/// Concatenated message contents, as matched by the mock rule table.
std::string prompt_text(const ChatRequest& request);

}  // namespace rolekit
