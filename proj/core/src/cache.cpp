#include "rolekit/cache.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rolekit/error.hpp"
#include "rolekit/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rolekit {

namespace {

bool is_hex_key(std::string_view key) {
  if (key.size() < 16) return false;
  for (char c : key) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
}

fs::path ResponseCache::file_for(std::string_view key) const {
  if (!is_hex_key(key)) throw ValidationError("cache key must be a hex digest");
  return dir_ / (std::string(key) + ".json");
}

std::optional<CacheEntry> ResponseCache::entry(std::string_view key) const {
  auto path = file_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  try {
    auto j = json::parse(os.str());
    CacheEntry e{j.at("key").get<std::string>(), j.at("value").get<std::string>(),
                 j.value("created_at", std::string{})};
    if (e.key != key) {
      spdlog::warn("cache entry {} holds key {}; ignoring", path.string(), e.key);
      return std::nullopt;
    }
    return e;
  } catch (const json::exception& e) {
    spdlog::warn("corrupt cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

std::optional<std::string> ResponseCache::get(std::string_view key) const {
  if (auto e = entry(key)) return std::move(e->value);
  return std::nullopt;
}

void ResponseCache::put(std::string_view key, std::string_view value) {
  json j = {{"key", key}, {"value", value}, {"created_at", utc_now()}};
  write_file_atomic(file_for(key), j.dump());
}

}  // namespace rolekit
