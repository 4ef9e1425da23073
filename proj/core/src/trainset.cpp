#include "rolekit/trainset.hpp"

#include <algorithm>
#include <random>

#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/scenario.hpp"
#include "rolekit/text.hpp"
#include "rolekit/workspace.hpp"

namespace rolekit {

namespace {

constexpr const char* kPreamble =
    "I want you to act like {agent_name}, I want you to respond and answer like {agent_name}. Using the "
    "tone, manner and vocabulary {agent_name} would use. You must know all of the knowledge of {agent_name}.";
constexpr const char* kScenarioHeader = "The scenario is as follows:";
constexpr const char* kDirectives =
    "I want you to respond by first thinking about the character relationships and exporting your "
    "thoughts in a way that '{agent_name} (thinking):' then generates dialogue responses based on those "
    "thoughts. If you think the current dialogue is beyond {agent_name}'s knowledge, please say that you "
    "are unfamiliar with the thing.";
constexpr const char* kThinkingDirective = "I want you to respond by first thinking";
constexpr const char* kUnfamiliarDirective = "please say that you are unfamiliar with the thing";
constexpr const char* kInteractionsHeader = "The interactions are as follows:";
constexpr const char* kProbeScenario =
    "{agent_name} is talking with a visitor who has come to ask them some questions.";

std::string render_unit(std::string_view speaker, Action action, std::string_view content) {
  return std::string(speaker) + " (" + to_string(action) + "):'" + text::normalize_whitespace(content) + "'";
}

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t range) {
  // Rejects the low 2^64 mod range values so every residue is equally likely.
  const std::uint64_t threshold = (0 - range) % range;
  std::uint64_t x;
  do {
    x = engine();
  } while (x < threshold);
  return x % range;
}

std::int64_t positive_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ValidationError("manifest override '" + key + "' must be an integer");
  }
  auto n = v.get<std::int64_t>();
  if (n <= 0) throw ValidationError("manifest override '" + key + "' must be positive");
  return n;
}

std::string non_empty_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string() || text::trim(v.get<std::string>()).empty()) {
    throw ValidationError("manifest override '" + key + "' must be a non-empty string");
  }
  return v.get<std::string>();
}

}  // namespace

std::string to_string(RecordKind kind) { return kind == RecordKind::dialogue ? "dialogue" : "probe"; }

std::string render_interactions(const std::vector<Turn>& turns) {
  std::vector<std::string> lines;
  lines.reserve(turns.size());
  for (const auto& t : turns) {
    lines.push_back(t.speaker + " (" + to_string(t.action) + "): '" + text::normalize_whitespace(t.text) + "'");
  }
  return text::join(lines, "\n");
}

std::string assemble_instruction(const RoleProfile& profile, std::string_view scenario,
                                 const std::vector<Turn>& interactions, double token_budget) {
  SlotValues name{{"agent_name", profile.name}};
  std::string fixed = render_template(kPreamble, name) + "\n" + profile.summary + "\n" + kScenarioHeader + "\n" +
                      text::trim(scenario) + "\n" + render_template(kDirectives, name) + "\n" +
                      kInteractionsHeader;
  if (interactions.empty()) {
    if (text::estimate_tokens(fixed) > token_budget) {
      throw ValidationError("instruction for " + profile.name + " exceeds the token budget");
    }
    return fixed;
  }
  for (std::size_t first = 0; first < interactions.size(); ++first) {
    std::vector<Turn> kept(interactions.begin() + static_cast<std::ptrdiff_t>(first), interactions.end());
    auto candidate = fixed + "\n" + render_interactions(kept);
    if (text::estimate_tokens(candidate) <= token_budget) return candidate;
  }
  throw ValidationError("instruction for " + profile.name + " exceeds the token budget even with the trigger alone");
}

std::string assemble_instruction(const RoleProfile& profile, const Scene& scene,
                                 const std::vector<Turn>& interactions, double token_budget) {
  if (scene.role_id != profile.role_id) {
    throw PreconditionError("scene " + scene.scene_id + " belongs to role '" + scene.role_id + "'");
  }
  return assemble_instruction(profile, render_scene(scene), interactions, token_budget);
}

std::string probe_scenario(const RoleProfile& profile) {
  return render_template(kProbeScenario, {{"agent_name", profile.name}});
}

namespace {

double instruction_budget(const RecordOptions& options, std::string_view output, std::string_view id) {
  auto budget = static_cast<double>(options.max_sequence_length) - text::estimate_tokens(output);
  if (budget <= 0) throw ValidationError("record " + std::string(id) + ": output alone exceeds the sequence length");
  return budget;
}

}  // namespace

TrainRecord assemble_record(const DialoguePair& pair, const RoleProfile& profile, const Scene& scene,
                            const RecordOptions& options) {
  if (!pair.thought) throw PreconditionError("pair " + pair.pair_id + " has no thought; run gen-thoughts first");
  if (!same_speaker(pair.role_name, profile.name)) {
    throw PreconditionError("pair " + pair.pair_id + " belongs to " + pair.role_name + ", not " + profile.name);
  }
  std::string output = render_unit(profile.name, Action::thinking, pair.thought->text) + "\n" +
                       render_unit(profile.name, Action::speaking, pair.response.text) + options.separator;
  if (pair.continuation) {
    output += "\n" + render_unit(pair.continuation->speaker, Action::speaking, pair.continuation->text) +
              options.separator;
  }
  std::vector<Turn> interactions;
  for (const auto& t : pair.context) {
    if (t.action == Action::speaking) interactions.push_back(t);
  }
  interactions.push_back(pair.trigger);
  auto budget = instruction_budget(options, output, pair.pair_id);
  return {pair.pair_id, RecordKind::dialogue, assemble_instruction(profile, scene, interactions, budget), "",
          std::move(output)};
}

TrainRecord assemble_record(const HallucinationProbe& probe, const RoleProfile& profile,
                            const RecordOptions& options) {
  if (probe.role_id != profile.role_id) {
    throw PreconditionError("probe " + probe.probe_id + " belongs to role '" + probe.role_id + "'");
  }
  throw_if_violated("probe " + probe.probe_id, invariant_violations(probe));
  std::string output;
  if (probe.rationale) output = render_unit(profile.name, Action::thinking, *probe.rationale) + "\n";
  output += render_unit(profile.name, Action::speaking, probe.refusal) + options.separator;
  auto budget = instruction_budget(options, output, probe.probe_id);
  std::vector<Turn> interactions{{kProbeAskerName, Action::speaking, probe.question}};
  return {probe.probe_id, RecordKind::probe,
          assemble_instruction(profile, probe_scenario(profile), interactions, budget), "", std::move(output)};
}

std::vector<OutputUnit> parse_output_units(std::string_view output, std::string_view separator) {
  std::vector<OutputUnit> units;
  for (auto line : text::split_lines(output)) {
    OutputUnit unit;
    if (!separator.empty() && line.size() >= separator.size() &&
        line.compare(line.size() - separator.size(), separator.size(), separator) == 0) {
      unit.separated = true;
      line.resize(line.size() - separator.size());
    }
    auto think = line.find(" (thinking):'");
    auto speak = line.find(" (speaking):'");
    auto head = std::min(think, speak);
    if (head == std::string::npos || head == 0 || line.size() < head + 14 || line.back() != '\'') {
      throw ParseError("output line is not a \"Name (action):'text'\" unit", line);
    }
    unit.speaker = line.substr(0, head);
    unit.action = head == think ? Action::thinking : Action::speaking;
    unit.text = line.substr(head + 13, line.size() - head - 14);
    units.push_back(std::move(unit));
  }
  return units;
}

std::vector<std::string> audit_record(const TrainRecord& record, const RoleProfile& profile,
                                      std::string_view separator) {
  std::vector<std::string> v;
  if (!record.input.empty()) v.emplace_back("input is not empty");

  SlotValues name{{"agent_name", profile.name}};
  const std::string preamble = render_template(kPreamble, name);
  if (!record.instruction.starts_with(preamble)) v.emplace_back("instruction does not open with the act-like preamble");
  std::size_t pos = 0;
  for (const std::string& block : {preamble, profile.summary, std::string(kScenarioHeader),
                                   std::string(kThinkingDirective), std::string(kUnfamiliarDirective),
                                   std::string(kInteractionsHeader)}) {
    auto at = record.instruction.find(block, pos);
    if (at == std::string::npos) {
      v.push_back("instruction block missing or out of order: " + block.substr(0, 40));
      pos = std::string::npos;
      break;
    }
    pos = at + block.size();
  }
  if (pos != std::string::npos && record.instruction.find(" (speaking): ", pos) == std::string::npos) {
    v.emplace_back("instruction has no interaction turn");
  }

  std::vector<OutputUnit> units;
  try {
    units = parse_output_units(record.output, separator);
  } catch (const ParseError& e) {
    v.push_back(std::string("output: ") + e.what());
    return v;
  }
  if (units.empty()) {
    v.emplace_back("output is empty");
    return v;
  }
  if (!record.output.ends_with(separator)) v.emplace_back("output does not end with the separator");

  std::size_t role_speaking = 0;
  std::size_t speaking = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    bool is_role = same_speaker(u.speaker, profile.name);
    if (text::trim(u.text).empty()) v.push_back("unit " + std::to_string(i) + " is empty");
    if (u.action == Action::thinking) {
      if (!is_role) v.push_back("unit " + std::to_string(i) + ": thinking by " + u.speaker);
      if (u.separated) v.push_back("unit " + std::to_string(i) + ": separator after a thinking unit");
      if (i + 1 >= units.size() || units[i + 1].action != Action::speaking ||
          !same_speaker(units[i + 1].speaker, profile.name)) {
        v.push_back("unit " + std::to_string(i) + ": thinking is not followed by the role speaking");
      }
    } else {
      ++speaking;
      if (is_role) ++role_speaking;
      if (!u.separated) v.push_back("unit " + std::to_string(i) + ": speaking unit lacks the separator");
    }
  }
  const auto& first = units.front();
  bool thinking_first = first.action == Action::thinking && same_speaker(first.speaker, profile.name);
  bool bare_refusal = first.action == Action::speaking && same_speaker(first.speaker, profile.name) &&
                      contains_unfamiliarity_statement(first.text);
  if (!thinking_first && !bare_refusal) v.emplace_back("output does not begin with the role thinking");
  if (role_speaking != 1) {
    v.push_back("output has " + std::to_string(role_speaking) + " role speaking units (expected 1)");
  }
  if (count_occurrences(record.output, separator) != speaking) {
    v.emplace_back("separator count does not match the speaking units");
  }
  return v;
}

TrainsetStats compute_stats(const std::vector<TrainRecord>& records, std::string_view separator) {
  TrainsetStats stats;
  stats.records = records.size();
  std::size_t words = 0;
  for (const auto& r : records) {
    std::vector<std::string> texts;
    try {
      for (auto& u : parse_output_units(r.output, separator)) texts.push_back(std::move(u.text));
    } catch (const ParseError&) {
      texts = {text::replace_all(r.output, separator, " ")};
    }
    for (const auto& t : texts) {
      stats.sentences += text::count_sentences(t);
      words += text::word_count(t);
    }
  }
  if (stats.sentences > 0) stats.avg_words_per_sentence = static_cast<double>(words) / stats.sentences;
  return stats;
}

std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(bounded(engine, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<TrainRecord> order_records(std::vector<TrainRecord> records, std::uint64_t seed) {
  std::sort(records.begin(), records.end(),
            [](const TrainRecord& a, const TrainRecord& b) { return a.record_id < b.record_id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].record_id == records[i - 1].record_id) {
      throw ValidationError("duplicate record id " + records[i].record_id);
    }
  }
  std::vector<TrainRecord> ordered;
  ordered.reserve(records.size());
  for (auto i : shuffle_order(records.size(), seed)) ordered.push_back(std::move(records[i]));
  return ordered;
}

std::string serialize_trainset(const std::vector<TrainRecord>& ordered) {
  std::string out;
  for (const auto& r : ordered) {
    nlohmann::ordered_json j;
    j["instruction"] = r.instruction;
    j["input"] = r.input;
    j["output"] = r.output;
    out += j.dump() + "\n";
  }
  return out;
}

TrainsetStats emit_trainset(const std::vector<TrainRecord>& records, const std::filesystem::path& path,
                            std::uint64_t seed, std::string_view separator) {
  if (records.empty()) throw ValidationError("no training records to emit");
  write_file_atomic(path, serialize_trainset(order_records(records, seed)));
  return compute_stats(records, separator);
}

std::vector<TrainRecord> read_trainset(const std::filesystem::path& path) {
  std::vector<TrainRecord> records;
  auto lines = text::split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    auto where = path.string() + " line " + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what(), lines[i]);
    }
    if (!j.is_object() || j.size() != 3) throw ParseError(where + ": expected exactly instruction, input, output", lines[i]);
    TrainRecord r;
    r.record_id = "line-" + std::to_string(i + 1);
    for (auto [key, field] : {std::pair{"instruction", &r.instruction}, std::pair{"input", &r.input},
                              std::pair{"output", &r.output}}) {
      if (!j.contains(key) || !j[key].is_string()) throw ParseError(where + ": '" + key + "' must be a string", lines[i]);
      *field = j[key].get<std::string>();
    }
    records.push_back(std::move(r));
  }
  return records;
}

nlohmann::ordered_json TrainManifest::to_json() const {
  nlohmann::ordered_json j;
  j["base_model_hint"] = base_model_hint;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["max_sequence_length"] = max_sequence_length;
  j["adapter_rank"] = adapter_rank;
  j["adapter_alpha"] = adapter_alpha;
  j["optimizer_name"] = optimizer_name;
  j["separator_token"] = separator_token;
  j["shuffle_seed"] = shuffle_seed;
  j["record_counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, n] : record_counts) j["record_counts"][k] = n;
  j["stats"] = {{"records", stats.records},
                {"sentences", stats.sentences},
                {"avg_words_per_sentence", stats.avg_words_per_sentence}};
  j["overridden"] = overridden;
  return j;
}

TrainManifest TrainManifest::from_json(const nlohmann::json& j) {
  TrainManifest m;
  try {
    m.base_model_hint = j.at("base_model_hint").get<std::string>();
    m.batch_size = j.at("batch_size").get<std::int64_t>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.epochs = j.at("epochs").get<std::int64_t>();
    m.max_sequence_length = j.at("max_sequence_length").get<std::int64_t>();
    m.adapter_rank = j.at("adapter_rank").get<std::int64_t>();
    m.adapter_alpha = j.at("adapter_alpha").get<std::int64_t>();
    m.optimizer_name = j.at("optimizer_name").get<std::string>();
    m.separator_token = j.value("separator_token", std::string(kDefaultSeparator));
    m.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
    if (j.contains("record_counts")) m.record_counts = j["record_counts"].get<std::map<std::string, std::size_t>>();
    if (j.contains("overridden")) m.overridden = j["overridden"].get<std::vector<std::string>>();
    if (j.contains("stats")) {
      const auto& s = j["stats"];
      m.stats = {s.at("records").get<std::size_t>(), s.at("sentences").get<std::size_t>(),
                 s.at("avg_words_per_sentence").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed training manifest: ") + e.what());
  }
  return m;
}

TrainManifest make_manifest(const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw ValidationError("manifest overrides must be a JSON object");
  TrainManifest m;
  for (const auto& [key, v] : overrides.items()) {
    if (key == "base_model_hint") {
      m.base_model_hint = non_empty_string(v, key);
    } else if (key == "optimizer_name") {
      m.optimizer_name = non_empty_string(v, key);
    } else if (key == "separator_token") {
      m.separator_token = non_empty_string(v, key);
    } else if (key == "learning_rate") {
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ValidationError("manifest override 'learning_rate' must be positive");
      m.learning_rate = v.get<double>();
    } else if (key == "batch_size") {
      m.batch_size = positive_int(v, key);
    } else if (key == "epochs") {
      m.epochs = positive_int(v, key);
    } else if (key == "max_sequence_length") {
      m.max_sequence_length = positive_int(v, key);
    } else if (key == "adapter_rank") {
      m.adapter_rank = positive_int(v, key);
    } else if (key == "adapter_alpha") {
      m.adapter_alpha = positive_int(v, key);
    } else {
      throw ValidationError("unknown manifest override '" + key + "'");
    }
    m.overridden.push_back(key);
  }
  return m;
}

}  // namespace rolekit
