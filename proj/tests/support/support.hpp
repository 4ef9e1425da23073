#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rolekit/types.hpp"

namespace rolekit::testing {

std::filesystem::path fixtures_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

/// Runs the CLI in-process; `args` excludes the program name.
CliResult run_cli(const std::vector<std::string>& args);

/// Mock-backed CLI call against `workspace` using the fixture rule table.
CliResult run_mock_cli(const std::filesystem::path& workspace, std::vector<std::string> args);

/// ingest, gen-scenes, gen-dialogues, gen-thoughts, gen-probes and
/// build-trainset against the fixture profile. Stops at the first failing
/// step and returns its result, else the build-trainset result.
CliResult run_golden_pipeline(const std::filesystem::path& workspace, int seed = 7);

/// Profile with a short summary and a life-experience section.
RoleProfile sample_profile(std::string role_id = "beethoven", std::string name = "Ludwig van Beethoven");

struct SyntheticScript {
  std::string role_name;
  std::vector<Turn> turns;
};

/// Valid script with `turns` turns in [3, 30] and 2-4 speakers: a non-role
/// opener, role runs that may start with a thinking turn, unique texts.
SyntheticScript random_script(std::mt19937_64& rng);

/// "Name (action): text" lines.
std::string render_synthetic(const SyntheticScript& script);

/// Straight scan for training pairs. A pair starts at every role turn whose
/// predecessor is not the role; the role's consecutive turns form its
/// thought and response.
std::vector<DialoguePair> oracle_pairs(const std::vector<Turn>& turns, const std::string& role_name,
                                       const std::string& dialogue_id, const std::string& scene_ref);

/// Sentence count by direct character scan: a sentence ends at a run of
/// terminal punctuation, and a trailing unterminated piece counts when it
/// holds a letter or digit.
std::size_t oracle_sentence_count(const std::string& s);

}  // namespace rolekit::testing
