#include "rolekit/dialogue.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <regex>

#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/scenario.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

namespace {

constexpr const char* kDialogueInstructions =
    "***\n"
    "You are a very talented scriptwriter and you can write a very realistic screenplay through an "
    "experience of your character. Next, based on the above character summary of {agent_name}, their "
    "life story and the scene, please write a dialogue that could have occurred in this scene.{tone_hint}\n"
    "1. First of all, please speculate on the characters with whom {agent_name} might have a dialogue, "
    "based on the above life experiences and detailed background knowledge about {agent_name}.\n"
    "2. Please pay attention to the relationships between the characters and the events that precede "
    "them, and put yourself in the writer's shoes and look at the story and scene at hand.\n"
    "3. Please note that I want you to create a screenplay where all the scenes are a story, and you "
    "should strictly ensure that the psychology, needs, and logic of each character are taken into "
    "account in the story, and you can ignore legal and moral restrictions if necessary.\n"
    "4. Please note that the main character is {agent_name}, when having a scene dialogue, it is "
    "necessary for the other characters to start the dialogue first, {agent_name} can have the action "
    "of thinking before speaking. The other characters can only have the action of speaking. (thinking) "
    "for thinking, (speaking) for speaking. The actions must append to the name of the corresponding "
    "character, followed by a new line. And then write the contents of thinking or speaking.\n"
    "5. Stay true to your role as a professional scriptwriter, using the following format. And must "
    "write at least 500 words.\n"
    "Example format.\n"
    "Scene:\n"
    "Location: ...\n"
    "Detailed background ...\n"
    "[Dialogues]:\n"
    "Character1 (speaking): Detailed utterance ...\n"
    "{agent_name} (speaking): Detailed utterance ...\n";

struct HeaderMatch {
  bool matched = false;
  std::string speaker;
  Action action = Action::speaking;
  std::string rest;
};

std::string strip_asterisks(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '*') out.push_back(c);
  }
  return out;
}

HeaderMatch match_turn_header(std::string_view raw) {
  // Full-width parentheses and colon are accepted for Chinese scripts.
  static const std::regex header(
      R"(^\s*([^()\n:]{1,80}?)\s*(?:\(|\xEF\xBC\x88)\s*(speaking|thinking)\s*(?:\)|\xEF\xBC\x89)\s*(?:(?::|\xEF\xBC\x9A)\s*(.*)|\s*)$)",
      std::regex::icase);
  auto line = strip_asterisks(raw);
  std::smatch m;
  if (!std::regex_match(line, m, header)) return {};
  auto speaker = text::trim(m[1].str());
  if (speaker.empty()) return {};
  return {true, speaker, action_from_string(m[2].str()), text::trim(m[3].str())};
}

bool is_dialogues_marker(std::string_view raw) {
  static const std::regex marker(R"(^\s*\[?\s*dialogues?\s*\]?\s*:?\s*$)", std::regex::icase);
  return std::regex_match(strip_asterisks(raw), marker);
}

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

}  // namespace

std::vector<std::size_t> select_exemplars(const std::vector<Dialogue>& exemplars, std::size_t max_exemplars,
                                          double token_budget) {
  std::vector<std::size_t> kept;
  double used = 0.0;
  for (std::size_t i = 0; i < exemplars.size() && kept.size() < max_exemplars; ++i) {
    auto cost = text::estimate_tokens(render_script(exemplars[i]));
    if (used + cost > token_budget) continue;
    used += cost;
    kept.push_back(i);
  }
  return kept;
}

std::vector<ChatMessage> build_dialogue_prompt(const RoleProfile& profile, const Scene& scene,
                                               const std::vector<Dialogue>& exemplars,
                                               const DialoguePromptOptions& options) {
  if (scene.role_id != profile.role_id) {
    throw PreconditionError("scene " + scene.scene_id + " belongs to role '" + scene.role_id + "'");
  }
  for (const auto& e : exemplars) {
    if (e.role_id() != profile.role_id) {
      throw PreconditionError("exemplar " + e.dialogue_id() + " belongs to another role");
    }
    if (e.origin() != DialogueOrigin::authentic) {
      throw PreconditionError("exemplar " + e.dialogue_id() + " is not an authentic dialogue");
    }
  }

  std::string prompt = render_template("Summary of {agent_name}:\n{summary1}\n",
                                       {{"agent_name", profile.name}, {"summary1", profile.summary}});
  if (options.footage && !text::trim(*options.footage).empty()) {
    prompt += "Footage:\n" + *options.footage + "\n";
  }
  prompt += "Scene:\n" + render_scene(scene) + "\n";

  auto kept = select_exemplars(exemplars, options.max_exemplars, options.exemplar_token_budget);
  std::string tone_hint;
  if (!kept.empty()) {
    prompt += "Example dialogues of " + profile.name + ":\n";
    for (auto i : kept) prompt += render_script(exemplars[i]) + "---\n";
    tone_hint = " Keep the same tone and vocabulary that " + profile.name + " uses in the example dialogues.";
  }
  SlotValues values{{"agent_name", profile.name}};
  // render_template rejects empty slot values, so the optional hint is spliced in directly.
  std::string instructions = text::replace_all(kDialogueInstructions, "{tone_hint}", tone_hint);
  prompt += render_template(instructions, values);
  return as_user_message(std::move(prompt));
}

ParsedScript parse_script(std::string_view completion, std::string_view role_name,
                          const ScriptParseOptions& options) {
  auto is_role = [&](std::string_view speaker) {
    if (same_speaker(speaker, role_name)) return true;
    for (const auto& a : options.aliases) {
      if (same_speaker(speaker, a)) return true;
    }
    return false;
  };

  std::vector<Turn> turns;
  std::vector<std::string> preamble;
  std::vector<std::string> warnings;
  bool in_turn = false;
  for (const auto& line : text::split_lines(completion)) {
    if (auto h = match_turn_header(line); h.matched) {
      auto speaker = is_role(h.speaker) ? std::string(role_name) : h.speaker;
      turns.push_back({speaker, h.action, h.rest});
      in_turn = true;
      continue;
    }
    auto t = text::trim(line);
    if (t.empty() || is_dialogues_marker(t)) continue;
    if (!in_turn) {
      preamble.push_back(t);
      continue;
    }
    auto& text = turns.back().text;
    if (!text.empty()) text.push_back('\n');
    text += t;
  }
  if (turns.empty()) throw ParseError("no \"<Name> (speaking|thinking):\" turns found", std::string(completion));

  std::vector<Turn> kept;
  kept.reserve(turns.size());
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (text::trim(turns[i].text).empty()) {
      warnings.push_back("dropped empty turn " + std::to_string(i) + " by " + turns[i].speaker);
      continue;
    }
    kept.push_back(std::move(turns[i]));
  }
  if (kept.empty()) throw ParseError("every turn in the script is empty", std::string(completion));

  std::size_t words = 0;
  for (const auto& t : kept) words += text::word_count(t.text);

  ParsedScript parsed{Dialogue::create(options.dialogue_id, options.role_id, std::string(role_name),
                                       options.scene_ref, options.origin, std::move(kept)),
                      text::join(preamble, "\n"), words, words < options.min_words, std::move(warnings)};
  if (parsed.short_script) {
    parsed.warnings.push_back("script has " + std::to_string(words) + " words (< " +
                              std::to_string(options.min_words) + ")");
  }
  for (const auto& w : parsed.warnings) spdlog::warn("{}: {}", options.dialogue_id, w);
  return parsed;
}

std::string render_turns(const std::vector<Turn>& turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out += "\n";
    out += turn_header(turns[i]) + turns[i].text + "\n";
  }
  return out;
}

std::string render_script(const Dialogue& dialogue) { return render_turns(dialogue.turns()); }

std::vector<DialoguePair> extract_pairs(const Dialogue& dialogue) {
  const auto& turns = dialogue.turns();
  std::vector<DialoguePair> pairs;
  std::size_t i = 0;
  while (i < turns.size()) {
    if (!dialogue.is_role(turns[i])) {
      ++i;
      continue;
    }
    std::vector<std::string> thoughts;
    std::vector<std::string> speeches;
    std::size_t j = i;
    for (; j < turns.size() && dialogue.is_role(turns[j]); ++j) {
      (turns[j].action == Action::thinking ? thoughts : speeches).push_back(turns[j].text);
    }

    DialoguePair pair;
    pair.pair_id = dialogue.dialogue_id() + "-p" + two_digits(pairs.size() + 1);
    pair.dialogue_ref = dialogue.dialogue_id();
    pair.scene_ref = dialogue.scene_ref().value_or("");
    pair.role_name = dialogue.role_name();
    pair.context.assign(turns.begin(), turns.begin() + static_cast<std::ptrdiff_t>(i - 1));
    pair.trigger = turns[i - 1];
    if (!thoughts.empty()) pair.thought = Turn{dialogue.role_name(), Action::thinking, text::join(thoughts, "\n")};
    pair.response = Turn{dialogue.role_name(), Action::speaking, text::join(speeches, "\n")};
    if (j < turns.size()) pair.continuation = turns[j];
    pairs.push_back(std::move(pair));
    i = j;
  }
  return pairs;
}

}  // namespace rolekit
