#include "support.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

#include "rolekit/cli/app.hpp"

namespace fs = std::filesystem;

namespace rolekit::testing {

fs::path fixtures_dir() { return ROLEKIT_FIXTURES_DIR; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("rolekit-test-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"rolekit"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(argv, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

CliResult run_mock_cli(const fs::path& workspace, std::vector<std::string> args) {
  std::vector<std::string> full{"--workspace", workspace.string(), "--mock", "--mock-rules",
                                (fixtures_dir() / "mock_rules.json").string()};
  full.insert(full.end(), args.begin(), args.end());
  return run_cli(full);
}

CliResult run_golden_pipeline(const fs::path& workspace, int seed) {
  const auto fx = fixtures_dir();
  const std::vector<std::vector<std::string>> steps{
      {"ingest", "--role", "beethoven", "--profile-dir", (fx / "beethoven").string()},
      {"gen-scenes", "--role", "beethoven", "--count", "3"},
      {"gen-dialogues", "--role", "beethoven"},
      {"gen-thoughts", "--role", "beethoven"},
      {"gen-probes", "--role", "beethoven", "--topics", (fx / "topics.tsv").string()},
      {"build-trainset", "--role", "beethoven", "--seed", std::to_string(seed)},
  };
  CliResult last;
  for (const auto& step : steps) {
    last = run_mock_cli(workspace, step);
    if (last.code != 0) return last;
  }
  return last;
}

RoleProfile sample_profile(std::string role_id, std::string name) {
  RoleProfile p;
  p.role_id = std::move(role_id);
  p.name = name;
  p.summary = name + " was a composer who lived in Vienna and wrote nine symphonies.";
  p.sections = {{"Life Experience", "Born in Bonn in 1770.\n\nMoved to Vienna in 1792."}};
  return p;
}

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

SyntheticScript random_script(std::mt19937_64& rng) {
  static const std::vector<std::string> kOthers{"Karl", "Schindler", "Countess Erdody", "Haydn"};
  SyntheticScript s;
  s.role_name = "Ludwig";
  const auto others = uniform(rng, 1, 3);
  const auto target = uniform(rng, 3, 30);
  std::size_t serial = 0;
  auto text = [&] { return "line " + std::to_string(++serial) + " says something."; };
  auto other = [&] { return kOthers[uniform(rng, 0, others - 1)]; };

  s.turns.push_back({other(), Action::speaking, text()});
  bool role_spoke = false;
  while (s.turns.size() < target) {
    const auto left = target - s.turns.size();
    bool role_turn = uniform(rng, 0, 1) == 1 || (!role_spoke && left <= 2);
    if (!role_turn) {
      s.turns.push_back({other(), Action::speaking, text()});
      continue;
    }
    if (left >= 2 && uniform(rng, 0, 2) == 0) {
      s.turns.push_back({s.role_name, Action::thinking, text()});
    }
    s.turns.push_back({s.role_name, Action::speaking, text()});
    role_spoke = true;
  }
  return s;
}

std::string render_synthetic(const SyntheticScript& script) {
  std::string out;
  for (const auto& t : script.turns) {
    out += t.speaker + (t.action == Action::thinking ? " (thinking): " : " (speaking): ") + t.text + "\n";
  }
  return out;
}

std::vector<DialoguePair> oracle_pairs(const std::vector<Turn>& turns, const std::string& role_name,
                                       const std::string& dialogue_id, const std::string& scene_ref) {
  std::vector<DialoguePair> pairs;
  DialoguePair* open = nullptr;
  std::vector<std::string> thinking, speaking;
  auto close = [&](const Turn* next) {
    if (!open) return;
    if (!thinking.empty()) {
      std::string joined;
      for (std::size_t i = 0; i < thinking.size(); ++i) joined += (i ? "\n" : "") + thinking[i];
      open->thought = Turn{role_name, Action::thinking, joined};
    }
    std::string joined;
    for (std::size_t i = 0; i < speaking.size(); ++i) joined += (i ? "\n" : "") + speaking[i];
    open->response = Turn{role_name, Action::speaking, joined};
    if (next) open->continuation = *next;
    thinking.clear();
    speaking.clear();
    open = nullptr;
  };
  for (std::size_t k = 0; k < turns.size(); ++k) {
    const bool role = turns[k].speaker == role_name;
    if (!role) {
      close(&turns[k]);
      continue;
    }
    if (!open) {
      DialoguePair p;
      char id[16];
      std::snprintf(id, sizeof id, "-p%02zu", pairs.size() + 1);
      p.pair_id = dialogue_id + id;
      p.dialogue_ref = dialogue_id;
      p.scene_ref = scene_ref;
      p.role_name = role_name;
      for (std::size_t c = 0; c + 1 < k; ++c) p.context.push_back(turns[c]);
      p.trigger = turns[k - 1];
      pairs.push_back(std::move(p));
      open = &pairs.back();
    }
    (turns[k].action == Action::thinking ? thinking : speaking).push_back(turns[k].text);
  }
  close(nullptr);
  return pairs;
}

std::size_t oracle_sentence_count(const std::string& s) {
  auto terminal_at = [&](std::size_t i) -> std::size_t {
    auto c = static_cast<unsigned char>(s[i]);
    if (c == '.' || c == '!' || c == '?') return 1;
    // Full-width forms: U+3002, U+FF01, U+FF1F.
    if (i + 3 <= s.size()) {
      std::string_view v(s.data() + i, 3);
      if (v == "\xE3\x80\x82" || v == "\xEF\xBC\x81" || v == "\xEF\xBC\x9F") return 3;
    }
    return 0;
  };
  std::size_t count = 0;
  bool content = false;
  std::size_t i = 0;
  while (i < s.size()) {
    if (auto n = terminal_at(i)) {
      while (i < s.size() && (n = terminal_at(i))) i += n;
      if (content) ++count;
      content = false;
      continue;
    }
    auto c = static_cast<unsigned char>(s[i]);
    if (std::isalnum(c) || c >= 0x80) content = true;
    ++i;
  }
  if (content) ++count;
  return count;
}

}  // namespace rolekit::testing
