#include "rolekit/thought.hpp"

#include <regex>

#include "rolekit/dialogue.hpp"
#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/scenario.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

namespace {

constexpr const char* kThoughtTemplate =
    "Summary of {agent_name}:\n"
    "{summary1}\n"
    "The current scene is:\n"
    "{scene}\n"
    "{dialogues}\n"
    "Please briefly outline the thought process of {agent_name} as they articulate their current "
    "dialogue. It shouldn't be too long. Pay attention to {agent_name}'s personality and knowledge, and "
    "try to mimic {agent_name}'s tone and character. Also, consider the relationships between the "
    "characters and the relationships mentioned in the dialogue. Based on your understanding of "
    "{agent_name}, speculate on their thought process, keeping character relationships in mind. Please "
    "note that the thought process you give is the key to guiding them in generating the dialogue, and "
    "that their responses depend on the responses you give. Please be as comprehensive as possible, but "
    "keep it short.\n"
    "Begin with {agent_name} (thinking).\n"
    "{agent_name} (thinking):";

std::string strip_quotes(std::string s) {
  auto quoted = [&](char open, char close) {
    return s.size() >= 2 && s.front() == open && s.back() == close;
  };
  while (quoted('\'', '\'') || quoted('"', '"')) s = text::trim(s.substr(1, s.size() - 2));
  return s;
}

}  // namespace

std::vector<ChatMessage> build_thought_prompt(const RoleProfile& profile, const Scene& scene,
                                              const DialoguePair& pair) {
  if (pair.thought) throw PreconditionError("pair " + pair.pair_id + " is already annotated");
  if (!same_speaker(pair.role_name, profile.name)) {
    throw PreconditionError("pair " + pair.pair_id + " belongs to " + pair.role_name + ", not " + profile.name);
  }
  std::vector<Turn> shown;
  for (const auto& t : pair.context) {
    if (t.action == Action::speaking) shown.push_back(t);
  }
  shown.push_back(pair.trigger);
  shown.push_back(pair.response);
  return as_user_message(render_template(kThoughtTemplate, {{"agent_name", profile.name},
                                                            {"summary1", profile.summary},
                                                            {"scene", render_scene(scene)},
                                                            {"dialogues", render_turns(shown)}}));
}

std::string truncate_at_sentence(std::string_view s, std::size_t max_words) {
  if (text::word_count(s) <= max_words) return text::trim(s);
  std::string kept;
  std::size_t words = 0;
  for (const auto& sentence : text::split_sentences(s)) {
    auto n = text::word_count(sentence);
    if (words + n > max_words) break;
    kept += kept.empty() ? sentence : " " + sentence;
    words += n;
  }
  if (kept.empty()) {
    auto all = text::split_words(s);
    all.resize(max_words);
    kept = text::join(all, " ");
  }
  return kept;
}

Turn parse_thought(std::string_view completion, std::string_view role_name, std::size_t max_words) {
  if (text::contains_icase(completion, "(speaking):")) {
    throw ParseError("thought completion answers for the character (speaking marker present)",
                     std::string(completion));
  }
  std::string body;
  for (char c : completion) {
    if (c != '*') body.push_back(c);
  }
  body = text::trim(body);

  // Optional "<name> (thinking):" echo, possibly repeated by the model.
  static const std::regex echo(R"(^\s*([^()\n:]{0,80}?)\s*\(\s*thinking\s*\)\s*:?)", std::regex::icase);
  std::smatch m;
  while (std::regex_search(body, m, echo) &&
         (m[1].str().empty() || same_speaker(m[1].str(), role_name))) {
    body = text::trim(body.substr(static_cast<std::size_t>(m.length(0))));
  }
  body = strip_quotes(text::normalize_whitespace(body));
  if (body.empty()) throw ParseError("thought completion is empty", std::string(completion));
  return Turn{std::string(role_name), Action::thinking, truncate_at_sentence(body, max_words)};
}

DialoguePair annotate_pair(const DialoguePair& pair, const Turn& thought) {
  if (pair.thought) throw PreconditionError("pair " + pair.pair_id + " is already annotated");
  if (thought.action != Action::thinking) throw ValidationError("annotation must be a thinking turn");
  if (thought.speaker != pair.role_name) {
    throw ValidationError("thought by '" + thought.speaker + "' cannot annotate a pair of " + pair.role_name);
  }
  if (text::trim(thought.text).empty()) throw ValidationError("thought text is empty");
  DialoguePair annotated = pair;
  annotated.thought = thought;
  throw_if_violated("pair " + pair.pair_id, invariant_violations(annotated));
  return annotated;
}

std::vector<std::string> unannotated_pairs(const std::vector<DialoguePair>& pairs) {
  std::vector<std::string> missing;
  for (const auto& p : pairs) {
    if (!p.thought) missing.push_back(p.pair_id);
  }
  return missing;
}

}  // namespace rolekit
