#include "rolekit/cli/app.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>

#include "rolekit/cache.hpp"
#include "rolekit/dialogue.hpp"
#include "rolekit/error.hpp"
#include "rolekit/gateway.hpp"
#include "rolekit/hallucination.hpp"
#include "rolekit/http_backend.hpp"
#include "rolekit/judge.hpp"
#include "rolekit/mock_backend.hpp"
#include "rolekit/parallel.hpp"
#include "rolekit/profile.hpp"
#include "rolekit/question_bank.hpp"
#include "rolekit/report.hpp"
#include "rolekit/rubrics.hpp"
#include "rolekit/scenario.hpp"
#include "rolekit/segmenter.hpp"
#include "rolekit/serialization.hpp"
#include "rolekit/text.hpp"
#include "rolekit/thought.hpp"
#include "rolekit/trainset.hpp"
#include "rolekit/transcripts.hpp"
#include "rolekit/workspace.hpp"

namespace fs = std::filesystem;

namespace rolekit::cli {

namespace {

// Workspace-relative artifact paths.
constexpr const char* kProfileFile = "profile/profile.jsonl";
constexpr const char* kSegmentsFile = "segments/segments.jsonl";
constexpr const char* kSegmentScenesFile = "scenes/segment_scenes.jsonl";
constexpr const char* kRealScenesFile = "scenes/real_scenes.jsonl";
constexpr const char* kAuthenticFile = "dialogues/authentic.jsonl";
constexpr const char* kMimicFile = "dialogues/mimic.jsonl";
constexpr const char* kMimicPairsFile = "pairs/mimic.jsonl";
constexpr const char* kAuthenticPairsFile = "pairs/authentic.jsonl";
constexpr const char* kProbesFile = "probes/probes.jsonl";
constexpr const char* kTopicsFile = "probes/topics.tsv";
constexpr const char* kTrainManifestFile = "trainset/manifest.json";

std::string trainset_file(std::string_view role_id) { return "trainset/" + std::string(role_id) + ".jsonl"; }
std::string transcripts_file(TranscriptMode m) { return "eval/transcripts_" + to_string(m) + ".jsonl"; }
std::string skipped_file(TranscriptMode m) { return "eval/skipped_" + to_string(m) + ".jsonl"; }
std::string verdicts_file(TranscriptMode m) { return "eval/verdicts_" + to_string(m) + ".jsonl"; }
std::string unjudged_file(TranscriptMode m) { return "eval/unjudged_" + to_string(m) + ".jsonl"; }
std::string report_file(TranscriptMode m) { return "eval/report_" + to_string(m) + ".json"; }

struct GlobalOptions {
  std::string workspace = "workspace";
  std::string backend_config;
  bool mock = false;
  std::string mock_rules;
  std::string mock_log;
  std::size_t concurrency = 4;
  bool verbose = false;
};

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

std::string error_text(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "unknown error";
}

/// Shared state of one subcommand invocation.
class Session {
 public:
  Session(const GlobalOptions& g, std::string role_id, std::ostream& out) : g_(g), role_id_(std::move(role_id)), out_(out) {}
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() {
    try {
      write_mock_log();
    } catch (const std::exception& e) {
      spdlog::error("cannot write {}: {}", g_.mock_log, e.what());
    }
  }

  Workspace& workspace() {
    if (!ws_) ws_ = Workspace::open(g_.workspace, role_id_);
    return *ws_;
  }
  void set_workspace(Workspace ws) { ws_ = std::move(ws); }

  std::ostream& out() { return out_; }
  std::size_t concurrency() const { return std::max<std::size_t>(g_.concurrency, 1); }

  RoleProfile profile() {
    auto& ws = workspace();
    if (!ws.exists(kProfileFile)) throw PreconditionError("no profile in the workspace; run ingest first");
    auto profiles = ws.load<RoleProfile>(kProfileFile);
    if (profiles.size() != 1) throw ValidationError(std::string(kProfileFile) + " must hold exactly one profile");
    return profiles.front();
  }

  /// `spec` is "mock", a backend config file, or empty for the global
  /// --backend-config. --mock overrides everything.
  std::shared_ptr<Gateway> gateway(const std::string& spec = {}) {
    std::string key = g_.mock ? "mock" : spec.empty() ? g_.backend_config : spec;
    if (auto it = gateways_.find(key); it != gateways_.end()) return it->second;

    std::shared_ptr<Backend> backend;
    int retries = 3;
    if (key == "mock") {
      if (g_.mock_rules.empty()) throw PreconditionError("the mock backend needs --mock-rules <file>");
      mock_ = MockBackend::load(g_.mock_rules);
      backend = mock_;
    } else if (key.empty()) {
      throw PreconditionError("no backend configured; pass --backend-config <file> or --mock");
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(key));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(key + ": " + e.what());
      }
      auto config = BackendConfig::from_json(j);
      config.validate();
      retries = config.max_retries;
      backend = std::make_shared<HttpBackend>(config);
    }
    GatewayOptions options;
    options.max_retries = retries;
    options.cache = std::make_shared<ResponseCache>(workspace().cache_dir());
    options.max_in_flight = static_cast<int>(concurrency());
    auto gw = std::make_shared<Gateway>(std::move(backend), std::move(options));
    gateways_.emplace(key, gw);
    return gw;
  }

 private:
  // One JSON line per request that reached the mock backend (cache hits
  // never do), appended so a whole pipeline accumulates in one file.
  void write_mock_log() {
    if (g_.mock_log.empty() || !mock_) return;
    std::ofstream log(g_.mock_log, std::ios::app);
    if (!log) throw std::runtime_error("cannot open for appending");
    for (const auto& r : mock_->log().requests()) {
      nlohmann::json j{{"prompt_head", prompt_text(r).substr(0, 80)},
                       {"temperature", r.params.temperature},
                       {"top_p", r.params.top_p},
                       {"max_tokens", r.params.max_tokens},
                       {"seed", r.params.seed ? nlohmann::json(*r.params.seed) : nlohmann::json(nullptr)}};
      log << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
    }
  }

  const GlobalOptions& g_;
  std::string role_id_;
  std::ostream& out_;
  std::optional<Workspace> ws_;
  std::map<std::string, std::shared_ptr<Gateway>> gateways_;
  std::shared_ptr<MockBackend> mock_;
};

std::vector<Scene> all_scenes(Workspace& ws) {
  std::vector<Scene> scenes;
  for (const char* f : {kSegmentScenesFile, kRealScenesFile}) {
    if (ws.exists(f)) {
      auto s = ws.load<Scene>(f);
      scenes.insert(scenes.end(), s.begin(), s.end());
    }
  }
  return scenes;
}

std::map<std::string, Scene> scenes_by_id(Workspace& ws) {
  std::map<std::string, Scene> out;
  for (auto& s : all_scenes(ws)) out.emplace(s.scene_id, std::move(s));
  return out;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string profile_dir;
  double summary_budget = kDefaultSummaryTokenBudget;
  std::size_t segment_chars = 1500;
};

void cmd_ingest(Session& s, const std::string& role_id, const IngestArgs& a, const GlobalOptions& g) {
  auto ws = Workspace::init(g.workspace, role_id);
  s.set_workspace(ws);
  auto peek = read_profile_dir(a.profile_dir, role_id);
  Gateway* gw = peek.summary_supplied ? nullptr : s.gateway().get();
  auto source = ingest_profile(a.profile_dir, role_id, gw, a.summary_budget);
  const auto& profile = source.profile;

  auto segments = segment_life_experience(profile, a.segment_chars);

  std::vector<Dialogue> authentic;
  for (std::size_t i = 0; i < source.authentic_scripts.size(); ++i) {
    const auto& script = source.authentic_scripts[i];
    ScriptParseOptions opts;
    opts.dialogue_id = role_id + "-auth" + two_digits(i + 1);
    opts.role_id = role_id;
    opts.origin = DialogueOrigin::authentic;
    opts.aliases = profile.aliases;
    opts.min_words = 0;
    try {
      authentic.push_back(parse_script(script.text, profile.name, opts).dialogue);
    } catch (const Error& e) {
      throw Error(e.kind(), "authentic script " + script.source_name + ": " + e.what());
    }
  }

  ws.save(kProfileFile, std::vector<RoleProfile>{profile});
  for (std::size_t i = 0; i < profile.sections.size(); ++i) {
    ws.write_text("profile/sections/" + two_digits(i + 1) + ".txt",
                  "## " + profile.sections[i].title + "\n\n" + profile.sections[i].body + "\n");
  }
  ws.save(kSegmentsFile, segments);
  if (!authentic.empty()) ws.save(kAuthenticFile, authentic);
  s.out() << "ingest: " << profile.name << ", " << profile.sections.size() << " sections, " << segments.size()
          << " life segments, " << authentic.size() << " authentic dialogues\n";
}

// ------------------------------------------------------------ gen-scenes

void cmd_gen_scenes(Session& s, int count) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  if (!ws.exists(kSegmentsFile)) throw PreconditionError("no life segments; run ingest first");
  auto segments = ws.load<LifeSegment>(kSegmentsFile);
  auto gw = s.gateway();

  auto outcomes = parallel_map(segments.size(), s.concurrency(), [&](std::size_t i) {
    const auto& seg = segments[i];
    auto completion = gw->complete(build_segment_scene_prompt(profile, seg, count), SamplingParams::generation());
    SceneParseOptions opts;
    opts.role_id = profile.role_id;
    opts.origin = SceneOrigin::segment_derived;
    opts.segment_ref = seg.segment_index;
    opts.id_prefix = profile.role_id + "-seg" + two_digits(static_cast<std::size_t>(seg.segment_index));
    opts.expected_count = static_cast<std::size_t>(count);
    return parse_scenes(completion, opts);
  });

  std::vector<Scene> scenes;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) std::rethrow_exception(outcomes[i].error);
    auto& r = *outcomes[i].value;
    for (const auto& w : r.warnings) spdlog::warn("segment {}: {}", i, w);
    dropped += r.warnings.size();
    scenes.insert(scenes.end(), r.scenes.begin(), r.scenes.end());
  }
  ws.save(kSegmentScenesFile, scenes);
  s.out() << "gen-scenes: " << scenes.size() << " scenes from " << segments.size() << " segments, " << dropped
          << " warnings\n";
}

// --------------------------------------------------------- gen-dialogues

void cmd_gen_dialogues(Session& s, std::size_t exemplar_count, bool drop_short) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  if (!ws.exists(kSegmentScenesFile)) throw PreconditionError("no scenes; run gen-scenes first");
  auto scenes = ws.load<Scene>(kSegmentScenesFile);
  std::vector<Dialogue> exemplars;
  if (ws.exists(kAuthenticFile)) exemplars = ws.load<Dialogue>(kAuthenticFile);
  std::map<int, std::string> footage;
  if (ws.exists(kSegmentsFile)) {
    for (const auto& seg : ws.load<LifeSegment>(kSegmentsFile)) footage[seg.segment_index] = seg.narrative;
  }
  auto gw = s.gateway();

  DialoguePromptOptions base;
  base.max_exemplars = exemplar_count;
  auto outcomes = parallel_map(scenes.size(), s.concurrency(), [&](std::size_t i) {
    const auto& scene = scenes[i];
    auto options = base;
    if (scene.segment_ref && footage.contains(*scene.segment_ref)) options.footage = footage[*scene.segment_ref];
    auto completion =
        gw->complete(build_dialogue_prompt(profile, scene, exemplars, options), SamplingParams::generation());
    ScriptParseOptions opts;
    opts.dialogue_id = scene.scene_id + "-dlg";
    opts.role_id = profile.role_id;
    opts.scene_ref = scene.scene_id;
    opts.origin = DialogueOrigin::mimic;
    opts.aliases = profile.aliases;
    return parse_script(completion, profile.name, opts);
  });

  std::vector<Dialogue> dialogues;
  std::vector<DialoguePair> pairs;
  std::size_t failed = 0, short_scripts = 0;
  std::optional<ErrorKind> last_kind;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) {
      try {
        std::rethrow_exception(outcomes[i].error);
      } catch (const Error& e) {
        last_kind = e.kind();
        spdlog::warn("scene {}: script rejected: {}", scenes[i].scene_id, e.what());
      }
      ++failed;
      continue;
    }
    auto& parsed = *outcomes[i].value;
    if (parsed.short_script) {
      ++short_scripts;
      if (drop_short) continue;
    }
    auto p = extract_pairs(parsed.dialogue);
    pairs.insert(pairs.end(), p.begin(), p.end());
    dialogues.push_back(std::move(parsed.dialogue));
  }
  if (dialogues.empty()) {
    throw Error(last_kind.value_or(ErrorKind::validation), "no usable script among " + std::to_string(scenes.size()) + " scenes");
  }
  ws.save(kMimicFile, dialogues);
  ws.save(kMimicPairsFile, pairs);
  s.out() << "gen-dialogues: " << dialogues.size() << " dialogues, " << pairs.size() << " pairs, " << short_scripts
          << " short, " << failed << " rejected\n";
}

// ------------------------------------------------------- gen-real-scenes

void cmd_gen_real_scenes(Session& s) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  if (!ws.exists(kAuthenticFile)) {
    throw PreconditionError("no authentic dialogues; add authentic/*.txt to the profile directory and run ingest");
  }
  auto dialogues = ws.load<Dialogue>(kAuthenticFile);
  auto gw = s.gateway();

  auto outcomes = parallel_map(dialogues.size(), s.concurrency(), [&](std::size_t i) {
    const auto& d = dialogues[i];
    auto completion = gw->complete(build_real_dialogue_scene_prompt(profile, d), SamplingParams::generation());
    SceneParseOptions opts;
    opts.role_id = profile.role_id;
    opts.origin = SceneOrigin::real_dialogue_derived;
    opts.id_prefix = d.dialogue_id();
    opts.expected_count = 1;
    return parse_scenes(completion, opts).scenes.front();
  });

  std::vector<Scene> scenes;
  std::vector<Dialogue> updated;
  std::vector<DialoguePair> pairs;
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& d = dialogues[i];
    if (!outcomes[i].ok()) {
      spdlog::warn("{}: no scene: {}", d.dialogue_id(), error_text(outcomes[i].error));
      ++rejected;
      updated.push_back(d);
      continue;
    }
    auto& scene = *outcomes[i].value;
    auto check = validate_scene_against_dialogue(scene, d);
    if (!check.passed) {
      for (const auto& r : check.reasons) spdlog::warn("{}: scene rejected: {}", d.dialogue_id(), r);
      ++rejected;
      updated.push_back(d);
      continue;
    }
    auto linked = d.with_scene_ref(scene.scene_id);
    auto p = extract_pairs(linked);
    pairs.insert(pairs.end(), p.begin(), p.end());
    scenes.push_back(std::move(scene));
    updated.push_back(std::move(linked));
  }
  if (scenes.empty()) throw ValidationError("no authentic dialogue received a valid scene");
  ws.save(kRealScenesFile, scenes);
  ws.save(kAuthenticFile, updated);
  ws.save(kAuthenticPairsFile, pairs);
  s.out() << "gen-real-scenes: " << scenes.size() << " scenes, " << pairs.size() << " pairs, " << rejected
          << " rejected\n";
}

// ---------------------------------------------------------- gen-thoughts

void cmd_gen_thoughts(Session& s) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  std::vector<std::string> files;
  for (const char* f : {kMimicPairsFile, kAuthenticPairsFile}) {
    if (ws.exists(f)) files.emplace_back(f);
  }
  if (files.empty()) throw PreconditionError("no dialogue pairs; run gen-dialogues (or gen-real-scenes) first");
  auto scenes = scenes_by_id(ws);
  auto gw = s.gateway();

  std::size_t annotated = 0, failed = 0, already = 0;
  for (const auto& file : files) {
    auto pairs = ws.load<DialoguePair>(file);
    auto outcomes = parallel_map(pairs.size(), s.concurrency(), [&](std::size_t i) -> DialoguePair {
      const auto& p = pairs[i];
      if (p.thought) return p;
      auto it = scenes.find(p.scene_ref);
      if (it == scenes.end()) throw PreconditionError("pair " + p.pair_id + " refers to unknown scene " + p.scene_ref);
      auto completion = gw->complete(build_thought_prompt(profile, it->second, p), SamplingParams::generation());
      return annotate_pair(p, parse_thought(completion, profile.name));
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].thought) {
        ++already;
        continue;
      }
      if (!outcomes[i].ok()) {
        spdlog::warn("{}: no thought: {}", pairs[i].pair_id, error_text(outcomes[i].error));
        ++failed;
        continue;
      }
      pairs[i] = std::move(*outcomes[i].value);
      ++annotated;
    }
    ws.save(file, pairs);
  }
  s.out() << "gen-thoughts: " << annotated << " annotated, " << already << " already annotated, " << failed
          << " failed\n";
  if (failed > 0 && annotated + already == 0) throw ParseError("no pair could be annotated");
}

// ----------------------------------------------------------- gen-probes

void cmd_gen_probes(Session& s, const std::string& topics_path, int count, bool rationale) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  auto lexicon_text = read_file(topics_path);
  auto lexicon = parse_topic_lexicon(lexicon_text);
  auto gw = s.gateway();

  auto completion = gw->complete(build_probe_prompt(profile, lexicon.names(), count), SamplingParams::generation());
  auto parsed = parse_probes(completion, profile, lexicon, {rationale});
  std::size_t failing = 0;
  for (const auto& p : parsed.probes) {
    const auto* topic = lexicon.find(p.anachronism_topic);
    auto check = validate_refusal(p.refusal, topic ? topic->terms : std::vector<std::string>{});
    for (const auto& r : check.reasons) spdlog::warn("{}: {}", p.probe_id, r);
    if (!check.passed) ++failing;
  }
  if (failing > 0) throw ValidationError(std::to_string(failing) + " refusals failed validation");
  ws.write_text(kTopicsFile, lexicon_text);
  ws.save(kProbesFile, parsed.probes);
  s.out() << "gen-probes: " << parsed.probes.size() << " probes, " << parsed.direct_ids.size()
          << " direct questions flagged\n";
}

// ------------------------------------------------------- build-trainset

struct TrainsetArgs {
  std::uint64_t seed = 0;
  std::string separator;
  double probe_cap = kDefaultProbeShareCap;
  std::string overrides_file;
  std::vector<std::string> sets;
};

nlohmann::json collect_overrides(const TrainsetArgs& a) {
  nlohmann::json overrides = nlohmann::json::object();
  if (!a.overrides_file.empty()) {
    try {
      overrides = nlohmann::json::parse(read_file(a.overrides_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(a.overrides_file + ": " + e.what());
    }
  }
  for (const auto& kv : a.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    auto key = text::trim(kv.substr(0, eq));
    auto value = kv.substr(eq + 1);
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    overrides[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
  }
  if (!a.separator.empty()) overrides["separator_token"] = a.separator;
  return overrides;
}

void cmd_build_trainset(Session& s, const TrainsetArgs& a) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  auto manifest = make_manifest(collect_overrides(a));
  manifest.shuffle_seed = a.seed;

  std::vector<DialoguePair> pairs;
  for (const char* f : {kMimicPairsFile, kAuthenticPairsFile}) {
    if (ws.exists(f)) {
      auto p = ws.load<DialoguePair>(f);
      pairs.insert(pairs.end(), p.begin(), p.end());
    }
  }
  if (pairs.empty()) throw PreconditionError("no dialogue pairs; run gen-dialogues first");
  if (auto missing = unannotated_pairs(pairs); !missing.empty()) {
    throw PreconditionError(std::to_string(missing.size()) + " pairs lack a thought (first: " + missing.front() +
                            "); run gen-thoughts first");
  }
  auto scenes = scenes_by_id(ws);

  RecordOptions options;
  options.separator = manifest.separator_token;
  options.max_sequence_length = static_cast<std::size_t>(manifest.max_sequence_length);

  std::vector<TrainRecord> records;
  for (const auto& p : pairs) {
    auto it = scenes.find(p.scene_ref);
    if (it == scenes.end()) throw PreconditionError("pair " + p.pair_id + " refers to unknown scene " + p.scene_ref);
    records.push_back(assemble_record(p, profile, it->second, options));
  }
  const auto dialogue_records = records.size();
  std::size_t probe_records = 0;
  if (ws.exists(kProbesFile)) {
    auto probes = ws.load<HallucinationProbe>(kProbesFile);
    auto kept = cap_probes(probes, dialogue_records, a.probe_cap);
    if (kept.size() < probes.size()) {
      spdlog::info("probe cap {} keeps {} of {} probes", a.probe_cap, kept.size(), probes.size());
    }
    for (const auto& p : kept) records.push_back(assemble_record(p, profile, options));
    probe_records = kept.size();
  }

  auto path = ws.path(trainset_file(profile.role_id));
  manifest.stats = emit_trainset(records, path, a.seed, options.separator);
  manifest.record_counts = {{"dialogue", dialogue_records}, {"probe", probe_records}};

  // Round-trip audit over the file as written.
  std::size_t bad = 0;
  for (const auto& r : read_trainset(path)) {
    for (const auto& v : audit_record(r, profile, options.separator)) {
      spdlog::error("{}: {}", r.record_id, v);
      ++bad;
    }
  }
  if (bad > 0) throw ValidationError(std::to_string(bad) + " format violations in the emitted training file");

  ws.write_text(trainset_file(profile.role_id), read_file(path));
  ws.write_text(kTrainManifestFile, manifest.to_json().dump(2) + "\n");
  s.out() << "build-trainset: " << records.size() << " records (" << dialogue_records << " dialogue, "
          << probe_records << " probe), " << manifest.stats.sentences << " sentences -> "
          << path.string() << "\n";
}

// ------------------------------------------------------------------ eval

struct EvalRunArgs {
  std::string agent;
  std::string interrogator;
  std::string mode = "single";
  int rounds = kDefaultRounds;
  std::string questions;
  std::string categories;
  std::size_t limit = 0;
};

void cmd_eval_run(Session& s, const EvalRunArgs& a) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  auto mode = transcript_mode_from_string(a.mode);
  if (a.questions.empty()) throw PreconditionError("eval run needs --questions <bank.jsonl>");
  auto categories = a.categories.empty() ? default_categories() : load_category_list(a.categories);
  auto bank = load_question_bank(a.questions, categories);
  auto questions = questions_for_role(bank, profile.role_id);
  if (a.limit > 0 && questions.size() > a.limit) questions.resize(a.limit);

  auto agent_gw = s.gateway(a.agent);
  Agent agent(*agent_gw, profile);
  std::vector<Transcript> transcripts;
  if (mode == TranscriptMode::single_turn) {
    auto run = run_single_turn(agent, questions, s.concurrency());
    transcripts = std::move(run.transcripts);
    std::vector<nlohmann::json> skips;
    for (const auto& k : run.skipped) skips.push_back({{"question_id", k.question_id}, {"reason", k.reason}});
    ws.write_records(skipped_file(mode), skips);
    s.out() << "eval run: " << transcripts.size() << " single-turn transcripts, " << run.skipped.size()
            << " skipped\n";
  } else {
    if (questions.empty()) throw ValidationError("no questions to ask");
    auto interrogator = s.gateway(a.interrogator);
    auto outcomes = parallel_map(questions.size(), s.concurrency(), [&](std::size_t i) {
      return run_multi_turn(agent, *interrogator, profile.role_id + "-mt-" + questions[i].question_id,
                            questions[i].text, a.rounds);
    });
    std::size_t incomplete = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].ok()) std::rethrow_exception(outcomes[i].error);
      auto t = std::move(*outcomes[i].value);
      t.question_ref = questions[i].question_id;
      if (t.incomplete) ++incomplete;
      transcripts.push_back(std::move(t));
    }
    s.out() << "eval run: " << transcripts.size() << " multi-turn transcripts (" << a.rounds << " rounds), "
            << incomplete << " incomplete\n";
  }
  ws.save(transcripts_file(mode), transcripts);
}

struct EvalJudgeArgs {
  std::string judge;
  std::string metrics = "all";
  std::string rubric_dir;
  std::string mode = "all";
};

std::vector<TranscriptMode> selected_modes(const std::string& mode) {
  if (mode == "all") return {TranscriptMode::single_turn, TranscriptMode::multi_turn};
  return {transcript_mode_from_string(mode)};
}

void cmd_eval_judge(Session& s, const EvalJudgeArgs& a) {
  auto profile = s.profile();
  auto& ws = s.workspace();
  auto metrics = resolve_metrics(a.metrics, a.rubric_dir);
  bool any = false;
  for (auto mode : selected_modes(a.mode)) {
    if (!ws.exists(transcripts_file(mode))) continue;
    any = true;
    auto transcripts = ws.load<Transcript>(transcripts_file(mode));
    if (transcripts.empty()) continue;
    auto gw = s.gateway(a.judge);
    auto run = judge_transcripts(*gw, metrics, profile, transcripts, SamplingParams::judging(), s.concurrency());
    ws.save(verdicts_file(mode), run.verdicts);
    std::vector<nlohmann::json> unjudged;
    for (const auto& u : run.unjudged) {
      unjudged.push_back({{"transcript_ref", u.transcript_ref}, {"metric_id", u.metric_id}, {"reason", u.reason}});
    }
    ws.write_records(unjudged_file(mode), unjudged);
    s.out() << "eval judge: " << to_string(mode) << ": " << run.verdicts.size() << " verdicts, "
            << run.unjudged.size() << " unjudged\n";
  }
  if (!any) throw PreconditionError("no transcripts; run eval run first");
}

void cmd_eval_report(Session& s, const std::string& mode_arg) {
  auto& ws = s.workspace();
  bool any = false;
  for (auto mode : selected_modes(mode_arg)) {
    if (!ws.exists(verdicts_file(mode))) continue;
    auto verdicts = ws.load<JudgeVerdict>(verdicts_file(mode));
    if (verdicts.empty()) continue;
    any = true;
    std::set<std::string> models;
    if (ws.exists(transcripts_file(mode))) {
      for (const auto& t : ws.load<Transcript>(transcripts_file(mode))) models.insert(t.agent_backend);
    }
    std::string model;
    for (const auto& m : models) model += (model.empty() ? "" : ",") + m;
    auto report = aggregate(verdicts, model.empty() ? "unknown" : model);
    ws.write_text(report_file(mode), report_to_json(report).dump(2) + "\n");
    s.out() << to_string(mode) << "\n" << render_report_table(report);
  }
  if (!any) throw PreconditionError("no verdicts to report; run eval judge first");
}

// ----------------------------------------------------------------- audit

template <typename T, typename Check>
void audit_records(Workspace& ws, const char* file, std::vector<std::string>& problems, Check check) {
  if (!ws.exists(file)) return;
  std::vector<T> values;
  try {
    values = ws.load<T>(file);
  } catch (const std::exception& e) {
    problems.push_back(std::string(file) + ": " + e.what());
    return;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (const auto& v : check(values[i])) problems.push_back(std::string(file) + " record " + std::to_string(i + 1) + ": " + v);
  }
}

void cmd_audit(Session& s) {
  auto& ws = s.workspace();
  std::vector<std::string> problems;
  std::optional<RoleProfile> profile;
  try {
    profile = s.profile();
    for (const auto& v : invariant_violations(*profile)) problems.push_back(std::string(kProfileFile) + ": " + v);
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }

  if (ws.exists(kSegmentsFile)) {
    try {
      for (const auto& v : invariant_violations(ws.load<LifeSegment>(kSegmentsFile))) {
        problems.push_back(std::string(kSegmentsFile) + ": " + v);
      }
    } catch (const std::exception& e) {
      problems.push_back(std::string(kSegmentsFile) + ": " + e.what());
    }
  }
  for (const char* f : {kSegmentScenesFile, kRealScenesFile}) {
    audit_records<Scene>(ws, f, problems, [](const Scene& sc) { return invariant_violations(sc); });
  }
  // Dialogue invariants are enforced on load.
  for (const char* f : {kAuthenticFile, kMimicFile}) {
    audit_records<Dialogue>(ws, f, problems, [](const Dialogue&) { return std::vector<std::string>{}; });
  }
  for (const char* f : {kMimicPairsFile, kAuthenticPairsFile}) {
    audit_records<DialoguePair>(ws, f, problems, [](const DialoguePair& p) { return invariant_violations(p); });
  }
  std::optional<TopicLexicon> lexicon;
  if (ws.exists(kTopicsFile)) lexicon = parse_topic_lexicon(ws.read_text(kTopicsFile));
  audit_records<HallucinationProbe>(ws, kProbesFile, problems, [&](const HallucinationProbe& p) {
    auto v = invariant_violations(p);
    const auto* topic = lexicon ? lexicon->find(p.anachronism_topic) : nullptr;
    auto check = validate_refusal(p.refusal, topic ? topic->terms : std::vector<std::string>{});
    v.insert(v.end(), check.reasons.begin(), check.reasons.end());
    return v;
  });

  if (profile && ws.exists(trainset_file(profile->role_id))) {
    std::string separator = kDefaultSeparator;
    if (ws.exists(kTrainManifestFile)) {
      try {
        auto m = TrainManifest::from_json(nlohmann::json::parse(ws.read_text(kTrainManifestFile)));
        separator = m.separator_token;
        if (m.batch_size <= 0 || m.epochs <= 0 || !(m.learning_rate > 0) || m.adapter_rank <= 0 ||
            m.adapter_alpha <= 0 || m.max_sequence_length <= 0) {
          problems.emplace_back(std::string(kTrainManifestFile) + ": non-positive hyperparameter");
        }
      } catch (const std::exception& e) {
        problems.push_back(std::string(kTrainManifestFile) + ": " + e.what());
      }
    }
    try {
      for (const auto& r : read_trainset(ws.path(trainset_file(profile->role_id)))) {
        for (const auto& v : audit_record(r, *profile, separator)) problems.push_back(trainset_file(profile->role_id) + " " + r.record_id + ": " + v);
      }
    } catch (const std::exception& e) {
      problems.push_back(trainset_file(profile->role_id) + ": " + e.what());
    }
  }
  for (auto mode : {TranscriptMode::single_turn, TranscriptMode::multi_turn}) {
    audit_records<Transcript>(ws, transcripts_file(mode).c_str(), problems,
                              [](const Transcript& t) { return invariant_violations(t); });
    audit_records<JudgeVerdict>(ws, verdicts_file(mode).c_str(), problems,
                                [](const JudgeVerdict&) { return std::vector<std::string>{}; });
  }

  for (const auto& p : problems) s.out() << "violation: " << p << "\n";
  s.out() << "audit: " << problems.size() << " violations\n";
  if (!problems.empty()) throw ValidationError("audit found " + std::to_string(problems.size()) + " violations");
}

class StreamLogger {
 public:
  StreamLogger(std::ostream& err, bool verbose) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    sink->set_pattern("[%l] %v");
    auto logger = std::make_shared<spdlog::logger>("rolekit", sink);
    logger->set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
    spdlog::set_default_logger(logger);
  }
  ~StreamLogger() { spdlog::set_default_logger(previous_); }

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  GlobalOptions g;
  CLI::App app{"Role-play dataset construction and evaluation toolkit", "rolekit"};
  app.require_subcommand(1);
  app.add_option("--workspace", g.workspace, "Workspace root directory");
  app.add_option("--backend-config", g.backend_config, "Backend config JSON for generation");
  app.add_flag("--mock", g.mock, "Use the offline rule-table backend for every call");
  app.add_option("--mock-rules", g.mock_rules, "Rule table for the mock backend")->check(CLI::ExistingFile);
  app.add_option("--mock-log", g.mock_log, "Append every mock request's sampling parameters to this JSONL file");
  app.add_option("--concurrency", g.concurrency, "Parallel requests")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  std::string role;
  auto add_role = [&](CLI::App* sub) { sub->add_option("--role", role, "Role id")->required(); };

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Read a profile directory into the workspace");
  add_role(c_ingest);
  c_ingest->add_option("--profile-dir", ingest.profile_dir, "Profile directory")->required()->check(CLI::ExistingDirectory);
  c_ingest->add_option("--summary-budget", ingest.summary_budget, "Summary token budget");
  c_ingest->add_option("--segment-chars", ingest.segment_chars, "Maximum characters per life segment");

  int scene_count = kDefaultSceneCount;
  auto* c_scenes = app.add_subcommand("gen-scenes", "Design scenes for every life segment");
  add_role(c_scenes);
  c_scenes->add_option("--count", scene_count, "Scenes per segment")->check(CLI::PositiveNumber);

  std::size_t exemplars = kDefaultExemplars;
  bool drop_short = false;
  auto* c_dialogues = app.add_subcommand("gen-dialogues", "Write a mimic dialogue per scene and extract pairs");
  add_role(c_dialogues);
  c_dialogues->add_option("--exemplars", exemplars, "Authentic exemplars per prompt");
  c_dialogues->add_flag("--drop-short", drop_short, "Discard scripts under the word minimum");

  auto* c_real = app.add_subcommand("gen-real-scenes", "Write a scenario for every authentic dialogue");
  add_role(c_real);

  auto* c_thoughts = app.add_subcommand("gen-thoughts", "Annotate pairs with the role's thinking");
  add_role(c_thoughts);

  std::string topics;
  int probe_count = kDefaultProbeCount;
  bool no_rationale = false;
  auto* c_probes = app.add_subcommand("gen-probes", "Generate out-of-knowledge probes and refusals");
  add_role(c_probes);
  c_probes->add_option("--topics", topics, "Topic lexicon (topic<TAB>term,term)")->required()->check(CLI::ExistingFile);
  c_probes->add_option("--count", probe_count, "Questions to request")->check(CLI::PositiveNumber);
  c_probes->add_flag("--no-rationale", no_rationale, "Emit refusals without a thinking line");

  TrainsetArgs trainset;
  auto* c_train = app.add_subcommand("build-trainset", "Emit the training file and hyperparameter manifest");
  add_role(c_train);
  c_train->add_option("--seed", trainset.seed, "Shuffle seed")->required();
  c_train->add_option("--separator", trainset.separator, "End-of-unit separator token");
  c_train->add_option("--probe-cap", trainset.probe_cap, "Maximum probe share of all records");
  c_train->add_option("--overrides", trainset.overrides_file, "JSON object of manifest overrides")->check(CLI::ExistingFile);
  c_train->add_option("--set", trainset.sets, "Manifest override key=value (repeatable)");

  auto* c_eval = app.add_subcommand("eval", "Evaluate a role-play agent");
  c_eval->require_subcommand(1);

  EvalRunArgs eval_run;
  auto* c_run = c_eval->add_subcommand("run", "Collect transcripts");
  add_role(c_run);
  c_run->add_option("--agent", eval_run.agent, "Agent backend: config file or 'mock'")->required();
  c_run->add_option("--interrogator", eval_run.interrogator, "Interrogator backend for multi-turn runs");
  c_run->add_option("--mode", eval_run.mode, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  c_run->add_option("--rounds", eval_run.rounds, "Rounds per multi-turn transcript")->check(CLI::PositiveNumber);
  c_run->add_option("--questions", eval_run.questions, "Question bank (JSONL)")->required()->check(CLI::ExistingFile);
  c_run->add_option("--categories", eval_run.categories, "Category list replacing the built-in 28")->check(CLI::ExistingFile);
  c_run->add_option("--limit", eval_run.limit, "Ask at most this many questions");

  EvalJudgeArgs eval_judge;
  auto* c_judge = c_eval->add_subcommand("judge", "Score transcripts with the rubrics");
  add_role(c_judge);
  c_judge->add_option("--judge", eval_judge.judge, "Judge backend: config file or 'mock'")->required();
  c_judge->add_option("--metrics", eval_judge.metrics, "'all' or comma-separated metric ids");
  c_judge->add_option("--rubric-dir", eval_judge.rubric_dir, "Directory of <metric>.txt rubrics");
  c_judge->add_option("--mode", eval_judge.mode, "single, multi or all")->check(CLI::IsMember({"single", "multi", "all"}));

  std::string report_mode = "all";
  auto* c_report = c_eval->add_subcommand("report", "Aggregate verdicts into a report");
  add_role(c_report);
  c_report->add_option("--mode", report_mode, "single, multi or all")->check(CLI::IsMember({"single", "multi", "all"}));

  auto* c_audit = app.add_subcommand("audit", "Check every persisted record against its invariants");
  add_role(c_audit);

  std::vector<std::string> argv_tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  StreamLogger logger(err, g.verbose);
  std::string stage = "rolekit";
  try {
    Session s(g, role, out);
    if (*c_ingest) {
      stage = "ingest";
      cmd_ingest(s, role, ingest, g);
    } else if (*c_scenes) {
      stage = "gen-scenes";
      cmd_gen_scenes(s, scene_count);
    } else if (*c_dialogues) {
      stage = "gen-dialogues";
      cmd_gen_dialogues(s, exemplars, drop_short);
    } else if (*c_real) {
      stage = "gen-real-scenes";
      cmd_gen_real_scenes(s);
    } else if (*c_thoughts) {
      stage = "gen-thoughts";
      cmd_gen_thoughts(s);
    } else if (*c_probes) {
      stage = "gen-probes";
      cmd_gen_probes(s, topics, probe_count, !no_rationale);
    } else if (*c_train) {
      stage = "build-trainset";
      cmd_build_trainset(s, trainset);
    } else if (*c_run) {
      stage = "eval run";
      cmd_eval_run(s, eval_run);
    } else if (*c_judge) {
      stage = "eval judge";
      cmd_eval_judge(s, eval_judge);
    } else if (*c_report) {
      stage = "eval report";
      cmd_eval_report(s, report_mode);
    } else if (*c_audit) {
      stage = "audit";
      cmd_audit(s);
    }
  } catch (const Error& e) {
    err << stage << ": " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << stage << ": malformed record: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::parse);
  } catch (const std::exception& e) {
    err << stage << ": " << e.what() << "\n";
    return static_cast<int>(ErrorKind::validation);
  }
  return 0;
}

}  // namespace rolekit::cli
