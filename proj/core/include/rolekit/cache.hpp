#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace rolekit {

struct CacheEntry {
  std::string key;
  std::string value;
  std::string created_at;
};

/// Content-addressed store of raw completions, one JSON file per key.
///
/// Keys must be lower-case hex digests. Readers may run concurrently;
/// writes replace the entry file atomically. A file that fails to decode
/// or whose stored key disagrees with its name reads as absent.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(std::string_view key) const;
  std::optional<CacheEntry> entry(std::string_view key) const;
  void put(std::string_view key, std::string_view value);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path file_for(std::string_view key) const;

  std::filesystem::path dir_;
};

}  // namespace rolekit
