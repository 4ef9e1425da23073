#include "rolekit/mock_backend.hpp"

#include "rolekit/digest.hpp"
#include "rolekit/error.hpp"
#include "rolekit/workspace.hpp"

using nlohmann::json;

namespace rolekit {

void RequestLog::record(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
}

std::vector<ChatRequest> RequestLog::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::string prompt_text(const ChatRequest& request) {
  std::string out;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i) out.push_back('\n');
    out += request.messages[i].content;
  }
  return out;
}

MockBackend::MockBackend(std::vector<MockRule> rules, std::string default_response, std::string backend_id)
    : rules_(std::move(rules)), default_response_(std::move(default_response)), backend_id_(std::move(backend_id)) {
  json table = json::array();
  for (const auto& r : rules_) table.push_back({r.pattern, r.response});
  table.push_back(default_response_);
  model_id_ = "mock-" + sha256_hex(table.dump()).substr(0, 16);
}

std::shared_ptr<MockBackend> MockBackend::from_json(const json& j) {
  std::vector<MockRule> rules;
  try {
    for (const auto& r : j.value("rules", json::array())) {
      rules.push_back({r.at("match").get<std::string>(), r.at("response").get<std::string>()});
    }
    return std::make_shared<MockBackend>(std::move(rules), j.at("default").get<std::string>(),
                                         j.value("backend_id", std::string("mock")));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mock rule table: ") + e.what());
  }
}

std::shared_ptr<MockBackend> MockBackend::load(const std::filesystem::path& path) {
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ValidationError("mock rule table " + path.string() + ": " + e.what());
  }
}

const std::string& MockBackend::lookup(std::string_view prompt) const {
  for (const auto& r : rules_) {
    if (prompt.find(r.pattern) != std::string_view::npos) return r.response;
  }
  return default_response_;
}

std::string MockBackend::send(const ChatRequest& request) {
  log_.record(request);
  return lookup(prompt_text(request));
}

std::shared_ptr<MockBackend> mock_rule_table(std::vector<MockRule> rules, std::string default_response) {
  return std::make_shared<MockBackend>(std::move(rules), std::move(default_response));
}

CallbackBackend::CallbackBackend(std::string backend_id, std::string model_id, Handler handler)
    : backend_id_(std::move(backend_id)), model_id_(std::move(model_id)), handler_(std::move(handler)) {}

std::string CallbackBackend::send(const ChatRequest& request) {
  log_.record(request);
  return handler_(request);
}

}  // namespace rolekit
