#include "rolekit/workspace.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include "rolekit/digest.hpp"
#include "rolekit/error.hpp"
#include "rolekit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rolekit {

namespace {

std::string temp_suffix() {
  static std::atomic<unsigned> counter{0};
  std::ostringstream os;
  os << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
  return os.str();
}

std::string dump_manifest(const json& m) { return m.dump(2) + "\n"; }

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (fs::exists(path, ec)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream existing;
    existing << in.rdbuf();
    if (in && existing.str() == content) return;
  }
  fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ValidationError("cannot replace " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::vector<std::string>& Workspace::stage_dirs() {
  static const std::vector<std::string> dirs = {"profile", "segments", "scenes", "dialogues", "pairs",
                                                "probes",  "trainset", "eval",   "cache"};
  return dirs;
}

Workspace::Workspace(fs::path dir, std::string role_id) : dir_(std::move(dir)), role_id_(std::move(role_id)) {}

Workspace Workspace::init(const fs::path& root, std::string_view role_id) {
  validate_role_id(role_id);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw ValidationError("path not writable: " + root.string());
  Workspace ws(root / std::string(role_id), std::string(role_id));
  for (const auto& d : stage_dirs()) {
    fs::create_directories(ws.dir_ / d, ec);
    if (ec) throw ValidationError("path not writable: " + (ws.dir_ / d).string());
  }
  auto probe = ws.dir_ / ".write-check";
  {
    std::ofstream out(probe);
    if (!out) throw ValidationError("path not writable: " + ws.dir_.string());
  }
  fs::remove(probe, ec);
  if (!fs::exists(ws.dir_ / kManifestFile)) {
    json m = {{"role_id", ws.role_id_}, {"artifacts", json::object()}};
    write_file_atomic(ws.dir_ / kManifestFile, dump_manifest(m));
  }
  return ws;
}

Workspace Workspace::open(const fs::path& root, std::string_view role_id) {
  validate_role_id(role_id);
  Workspace ws(root / std::string(role_id), std::string(role_id));
  if (!fs::exists(ws.dir_ / kManifestFile)) {
    throw PreconditionError("workspace for role '" + std::string(role_id) + "' not initialized under " +
                            root.string() + " (run ingest first)");
  }
  return ws;
}

bool Workspace::exists(std::string_view relative) const { return fs::exists(path(relative)); }

void Workspace::write_text(std::string_view relative, std::string_view content) {
  write_file_atomic(path(relative), content);
  update_manifest(relative, 1, sha256_hex(content));
}

std::string Workspace::read_text(std::string_view relative) const { return read_file(path(relative)); }

void Workspace::write_records(std::string_view relative, const std::vector<json>& records) {
  std::string content;
  for (const auto& r : records) {
    content += r.dump();
    content.push_back('\n');
  }
  write_file_atomic(path(relative), content);
  update_manifest(relative, records.size(), sha256_hex(content));
}

std::vector<json> Workspace::read_records(std::string_view relative) const {
  auto content = read_text(relative);
  std::vector<json> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string(relative) + ":" + std::to_string(line_no) + ": " + e.what(), line);
    }
  }
  return out;
}

void Workspace::remove(std::string_view relative) {
  std::error_code ec;
  fs::remove(path(relative), ec);
  auto m = manifest();
  if (m["artifacts"].erase(std::string(relative)) > 0) {
    write_file_atomic(dir_ / kManifestFile, dump_manifest(m));
  }
}

json Workspace::manifest() const { return json::parse(read_file(dir_ / kManifestFile)); }

void Workspace::update_manifest(std::string_view relative, std::size_t count, const std::string& digest) {
  auto m = manifest();
  m["artifacts"][std::string(relative)] = {{"count", count}, {"digest", digest}};
  write_file_atomic(dir_ / kManifestFile, dump_manifest(m));
}

}  // namespace rolekit
