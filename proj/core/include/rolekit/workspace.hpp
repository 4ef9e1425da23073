#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rolekit {

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Leaves the file untouched when it already holds exactly `content`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Reads a whole file; throws ValidationError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Per-role directory tree:
///
///   <root>/<role_id>/
///     manifest.json   artifact counts and SHA-256 digests
///     profile/ segments/ scenes/ dialogues/ pairs/ probes/
///     trainset/ eval/ cache/
///
/// Record files are line-delimited JSON, profile sections are plain text.
/// Every write through this class refreshes the artifact's manifest entry.
/// A Workspace instance is single-writer.
class Workspace {
 public:
  static constexpr const char* kManifestFile = "manifest.json";
  static const std::vector<std::string>& stage_dirs();

  /// Creates the tree and an empty manifest. Idempotent.
  static Workspace init(const std::filesystem::path& root, std::string_view role_id);

  /// Opens an existing tree; throws PreconditionError if it was never initialized.
  static Workspace open(const std::filesystem::path& root, std::string_view role_id);

  const std::string& role_id() const noexcept { return role_id_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path path(std::string_view relative) const { return dir_ / relative; }
  std::filesystem::path cache_dir() const { return dir_ / "cache"; }

  bool exists(std::string_view relative) const;

  void write_text(std::string_view relative, std::string_view content);
  std::string read_text(std::string_view relative) const;

  /// One JSON object per line, '\n' terminated.
  void write_records(std::string_view relative, const std::vector<nlohmann::json>& records);
  std::vector<nlohmann::json> read_records(std::string_view relative) const;

  template <typename T>
  void save(std::string_view relative, const std::vector<T>& values) {
    std::vector<nlohmann::json> records;
    records.reserve(values.size());
    for (const auto& v : values) records.emplace_back(v);
    write_records(relative, records);
  }

  template <typename T>
  std::vector<T> load(std::string_view relative) const {
    std::vector<T> out;
    for (const auto& r : read_records(relative)) out.push_back(r.get<T>());
    return out;
  }

  /// Removes a file and its manifest entry, if present.
  void remove(std::string_view relative);

  nlohmann::json manifest() const;

 private:
  Workspace(std::filesystem::path dir, std::string role_id);
  void update_manifest(std::string_view relative, std::size_t count, const std::string& digest);

  std::filesystem::path dir_;
  std::string role_id_;
};

}  // namespace rolekit
