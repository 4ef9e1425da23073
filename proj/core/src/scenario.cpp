#include "rolekit/scenario.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <regex>
#include <set>

#include "rolekit/dialogue.hpp"
#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

namespace {

constexpr const char* kSegmentSceneTemplate =
    "Summary of {agent_name}:\n"
    "{summary1}\n"
    "Footage:\n"
    "{footage1}\n"
    "***\n"
    "You are a very talented scene designer and you can design a very realistic scene through an "
    "experience of your character. Next, based on the above character summary of {agent_name} and a "
    "portion of their life story, please design {scene_phrase} that could have occurred during this "
    "experience, please include the appropriate locations, characters, and corresponding settings. "
    "Please do not include any specific dialogue.\n"
    "1. The current scene needs to be relevant to {agent_name}'s experience;\n"
    "2. please be aware that you are designing a scene for a play and that the current scene does not "
    "have to actually happen, but it must certainly look real;\n"
    "3. the main character is {agent_name}, so the scene needs to be designed around {agent_name};\n"
    "4. use your imagination as much as possible, the scene can include all aspects of life.\n"
    "5. Please transport yourself to the time when {agent_name} lived, and design a scene that fits the "
    "historical background of the current era.\n"
    "6. Please note that the present is a story and you need to include the setting, location and "
    "characters. The location needs to be specific to a restaurant, concert hall, coffee shop, etc.\n"
    "7. Stay true to your role as a professional scene designer, using the following format.\n"
    "Example format.\n"
    "Scene 1.\n"
    "Location ...\n"
    "Background.\n"
    "Detailed background ...\n";

constexpr const char* kRealDialogueSceneTemplate =
    "Summary of {agent_name}:\n"
    "{summary1}\n"
    "Dialogues:\n"
    "{Dialogues}\n"
    "***\n"
    "You are a very creative writer, you are familiar with {agent_name}'s life story, and you admire "
    "{agent_name} greatly.\n"
    "Please write a scenario in which the above dialogue might happen, including place, time, and "
    "characters.\n"
    "Please be careful not to cover any of the content of the dialog or include information about the "
    "characters.\n"
    "Stay true to your role as a professional scriptwriter, using the following format.\n"
    "Example format.\n"
    "Scene:\n"
    "Location: ...\n"
    "Detailed background ...\n";

struct Header {
  bool matched = false;
  std::string title;
};

std::string strip_markup(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (char c : line) {
    if (c != '*') out.push_back(c);
  }
  auto t = text::trim(out);
  std::size_t i = 0;
  while (i < t.size() && (t[i] == '#' || t[i] == '>' || t[i] == '-' || t[i] == ' ')) ++i;
  return t.substr(i);
}

Header match_header(std::string_view raw) {
  static const std::regex numbered(R"(^scene\s*(\d+)\s*[.:)\-]?\s*(.*)$)", std::regex::icase);
  static const std::regex bare(R"(^scenes?\s*[.:]?\s*$)", std::regex::icase);
  auto line = strip_markup(raw);
  std::smatch m;
  if (std::regex_match(line, m, numbered)) return {true, text::trim(m[2].str())};
  if (std::regex_match(line, bare)) return {true, {}};
  return {};
}

// Text after a leading keyword, with separators such as ":", "." or "..." removed.
std::string after_keyword(std::string_view line, std::size_t keyword_len) {
  auto rest = line.substr(keyword_len);
  std::size_t i = 0;
  while (i < rest.size() && (rest[i] == ':' || rest[i] == '.' || rest[i] == ' ' || rest[i] == '-' ||
                             rest[i] == '\t')) {
    ++i;
  }
  return text::trim(rest.substr(i));
}

std::vector<std::string> split_participants(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto t = text::trim(current);
    if (!t.empty()) out.push_back(t);
    current.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' || s[i] == ';') {
      flush();
    } else if (s.substr(i, 5) == " and ") {
      flush();
      i += 4;
    } else {
      current.push_back(s[i]);
    }
  }
  flush();
  return out;
}

Scene parse_block(const std::vector<std::string>& lines, const std::string& title) {
  Scene scene;
  std::vector<std::string> background;
  bool expect_location = false;
  for (const auto& raw : lines) {
    auto line = strip_markup(raw);
    if (line.empty()) continue;
    if (expect_location) {
      scene.location = line;
      expect_location = false;
      continue;
    }
    if (text::starts_with_icase(line, "location")) {
      scene.location = after_keyword(line, 8);
      expect_location = scene.location.empty();
    } else if (text::starts_with_icase(line, "detailed background")) {
      if (auto rest = after_keyword(line, 19); !rest.empty()) background.push_back(rest);
    } else if (text::starts_with_icase(line, "background")) {
      if (auto rest = after_keyword(line, 10); !rest.empty()) background.push_back(rest);
    } else if (text::starts_with_icase(line, "characters")) {
      scene.participants = split_participants(after_keyword(line, 10));
    } else if (text::starts_with_icase(line, "participants")) {
      scene.participants = split_participants(after_keyword(line, 12));
    } else {
      background.push_back(line);
    }
  }
  if (scene.location.empty()) scene.location = title;
  scene.background = text::join(background, "\n");
  return scene;
}

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

bool is_edge_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

}  // namespace

std::vector<ChatMessage> build_segment_scene_prompt(const RoleProfile& profile, const LifeSegment& segment,
                                                    int scene_count) {
  if (scene_count < 1) throw ValidationError("scene_count must be >= 1");
  if (segment.role_id != profile.role_id) {
    throw PreconditionError("segment belongs to role '" + segment.role_id + "', not '" + profile.role_id + "'");
  }
  auto phrase = std::to_string(scene_count) + (scene_count == 1 ? " scene" : " scenes");
  return as_user_message(render_template(kSegmentSceneTemplate, {{"agent_name", profile.name},
                                                                 {"summary1", profile.summary},
                                                                 {"footage1", segment.narrative},
                                                                 {"scene_phrase", phrase}}));
}

std::vector<ChatMessage> build_real_dialogue_scene_prompt(const RoleProfile& profile, const Dialogue& dialogue) {
  if (dialogue.origin() != DialogueOrigin::authentic) {
    throw PreconditionError("dialogue " + dialogue.dialogue_id() + " is not authentic");
  }
  if (dialogue.turns().empty()) throw PreconditionError("dialogue " + dialogue.dialogue_id() + " has no turns");
  if (dialogue.role_id() != profile.role_id) {
    throw PreconditionError("dialogue " + dialogue.dialogue_id() + " belongs to another role");
  }
  return as_user_message(render_template(kRealDialogueSceneTemplate, {{"agent_name", profile.name},
                                                                      {"summary1", profile.summary},
                                                                      {"Dialogues", render_script(dialogue)}}));
}

SceneParseResult parse_scenes(std::string_view completion, const SceneParseOptions& options) {
  SceneParseResult result;
  struct Block {
    std::string title;
    std::vector<std::string> lines;
  };
  std::vector<Block> blocks;
  for (auto& line : text::split_lines(completion)) {
    if (auto h = match_header(line); h.matched) {
      blocks.push_back({h.title, {}});
    } else if (!blocks.empty()) {
      blocks.back().lines.push_back(std::move(line));
    }
  }
  if (blocks.empty()) throw ParseError("no \"Scene <n>\" headers in completion", std::string(completion));

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto scene = parse_block(blocks[i].lines, blocks[i].title);
    scene.scene_id = options.id_prefix + "-scene" + two_digits(i + 1);
    scene.role_id = options.role_id;
    scene.origin = options.origin;
    scene.segment_ref = options.origin == SceneOrigin::segment_derived ? options.segment_ref : std::nullopt;
    if (auto problems = invariant_violations(scene); !problems.empty()) {
      auto msg = "dropped " + scene.scene_id + ": " + text::join(problems, "; ");
      spdlog::warn("{}", msg);
      result.warnings.push_back(std::move(msg));
      continue;
    }
    result.scenes.push_back(std::move(scene));
  }
  if (result.scenes.empty()) {
    throw ParseError("no valid scenes in completion (" + std::to_string(blocks.size()) + " blocks dropped)",
                     std::string(completion));
  }
  if (options.expected_count > 0 && result.scenes.size() < options.expected_count) {
    result.shortfall = true;
    auto msg = "parsed " + std::to_string(result.scenes.size()) + " of " + std::to_string(options.expected_count) +
               " expected scenes";
    spdlog::warn("{}", msg);
    result.warnings.push_back(std::move(msg));
  }
  return result;
}

std::vector<std::string> leak_check_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& w : text::split_words(text::casefold(s))) {
    std::size_t b = 0;
    std::size_t e = w.size();
    while (b < e && is_edge_punct(w[b])) ++b;
    while (e > b && is_edge_punct(w[e - 1])) --e;
    if (e > b) out.push_back(w.substr(b, e - b));
  }
  return out;
}

SceneLeakCheck validate_scene_against_dialogue(const Scene& scene, const Dialogue& dialogue) {
  if (scene.role_id != dialogue.role_id()) {
    throw PreconditionError("scene " + scene.scene_id + " and dialogue " + dialogue.dialogue_id() +
                            " belong to different roles");
  }
  SceneLeakCheck check;
  if (auto problems = invariant_violations(scene); !problems.empty()) {
    check.passed = false;
    check.reasons = std::move(problems);
  }

  auto bg = leak_check_tokens(scene.background);
  std::set<std::string> grams;
  for (std::size_t i = 0; i + kLeakWindowWords <= bg.size(); ++i) {
    grams.insert(text::join({bg.begin() + i, bg.begin() + i + kLeakWindowWords}, " "));
  }
  std::set<std::string> seen;
  for (std::size_t t = 0; t < dialogue.turns().size(); ++t) {
    auto words = leak_check_tokens(dialogue.turns()[t].text);
    for (std::size_t i = 0; i + kLeakWindowWords <= words.size(); ++i) {
      auto gram = text::join({words.begin() + i, words.begin() + i + kLeakWindowWords}, " ");
      if (grams.count(gram) && seen.insert(gram).second) {
        check.passed = false;
        check.offending_spans.push_back(gram);
        check.reasons.push_back("background repeats turn " + std::to_string(t) + ": \"" + gram + "\"");
      }
    }
  }
  return check;
}

std::string render_scene(const Scene& scene) {
  std::string out = "Location: " + scene.location + "\n" + scene.background;
  if (!scene.participants.empty()) out += "\nCharacters: " + text::join(scene.participants, ", ");
  return out;
}

}  // namespace rolekit
