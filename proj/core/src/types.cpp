#include "rolekit/types.hpp"

#include <algorithm>
#include <array>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

bool is_life_experience_title(std::string_view title) {
  auto t = text::casefold(title);
  return t.find("life") != std::string::npos || t.find("experience") != std::string::npos ||
         t.find("biography") != std::string::npos;
}

void validate_role_id(std::string_view role_id) {
  if (role_id.empty()) throw ValidationError("invalid role_id: empty");
  if (role_id.find('/') != std::string_view::npos || role_id.find('\\') != std::string_view::npos) {
    throw ValidationError("invalid role_id '" + std::string(role_id) + "': contains a path separator");
  }
  if (role_id == "." || role_id == "..") {
    throw ValidationError("invalid role_id '" + std::string(role_id) + "'");
  }
  for (char c : role_id) {
    if (static_cast<unsigned char>(c) < 0x20) throw ValidationError("invalid role_id: control character");
  }
}

const ProfileSection* RoleProfile::life_experience() const {
  for (const auto& s : sections) {
    if (is_life_experience_title(s.title)) return &s;
  }
  return nullptr;
}

bool RoleProfile::is_role_speaker(std::string_view speaker) const {
  if (same_speaker(speaker, name)) return true;
  return std::any_of(aliases.begin(), aliases.end(),
                     [&](const std::string& a) { return same_speaker(speaker, a); });
}

std::vector<std::string> invariant_violations(const RoleProfile& p, double summary_token_budget) {
  std::vector<std::string> out;
  try {
    validate_role_id(p.role_id);
  } catch (const ValidationError& e) {
    out.emplace_back(e.what());
  }
  if (text::trim(p.name).empty()) {
    out.emplace_back("profile name is empty");
  } else if (p.summary.find(p.name) == std::string::npos) {
    out.emplace_back("summary does not mention '" + p.name + "' verbatim");
  }
  if (p.life_experience() == nullptr) out.emplace_back("no life-experience section");
  if (auto tokens = text::estimate_tokens(p.summary); tokens > summary_token_budget) {
    out.emplace_back("summary exceeds token budget (" + std::to_string(tokens) + " > " +
                     std::to_string(summary_token_budget) + ")");
  }
  return out;
}

std::vector<std::string> invariant_violations(const std::vector<LifeSegment>& segments) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.segment_index != static_cast<int>(i)) {
      out.emplace_back("segment indices not contiguous at position " + std::to_string(i));
    }
    if (text::trim(s.narrative).empty()) {
      out.emplace_back("segment " + std::to_string(s.segment_index) + " has an empty narrative");
    }
    if (i > 0 && s.role_id != segments[0].role_id) out.emplace_back("segments span several roles");
  }
  return out;
}

bool contains_turn_marker(std::string_view s) {
  auto folded = text::casefold(s);
  return folded.find("(speaking):") != std::string::npos ||
         folded.find("(thinking):") != std::string::npos;
}

std::vector<std::string> invariant_violations(const Scene& s) {
  std::vector<std::string> out;
  if (text::trim(s.location).empty()) out.emplace_back("scene " + s.scene_id + ": empty location");
  if (text::trim(s.background).empty()) out.emplace_back("scene " + s.scene_id + ": empty background");
  if (contains_turn_marker(s.background)) {
    out.emplace_back("scene " + s.scene_id + ": background contains a dialogue marker");
  }
  if (s.origin == SceneOrigin::segment_derived && !s.segment_ref) {
    out.emplace_back("scene " + s.scene_id + ": segment-derived scene without segment_ref");
  }
  if (s.origin == SceneOrigin::real_dialogue_derived && s.segment_ref) {
    out.emplace_back("scene " + s.scene_id + ": real-dialogue scene carries a segment_ref");
  }
  return out;
}

std::string turn_header(const Turn& turn) {
  return turn.speaker + " (" + to_string(turn.action) + "): ";
}

bool same_speaker(std::string_view a, std::string_view b) {
  return text::casefold(text::trim(a)) == text::casefold(text::trim(b));
}

Dialogue Dialogue::create(std::string dialogue_id, std::string role_id, std::string role_name,
                          std::optional<std::string> scene_ref, DialogueOrigin origin,
                          std::vector<Turn> turns) {
  throw_if_violated("dialogue " + dialogue_id, violations(role_name, turns));
  Dialogue d;
  d.dialogue_id_ = std::move(dialogue_id);
  d.role_id_ = std::move(role_id);
  d.role_name_ = std::move(role_name);
  d.scene_ref_ = std::move(scene_ref);
  d.origin_ = origin;
  d.turns_ = std::move(turns);
  return d;
}

std::vector<std::string> Dialogue::violations(std::string_view role_name,
                                              const std::vector<Turn>& turns) {
  std::vector<std::string> out;
  if (text::trim(role_name).empty()) out.emplace_back("role name is empty");
  if (turns.empty()) {
    out.emplace_back("dialogue has no turns");
    return out;
  }
  auto is_role = [&](const Turn& t) { return same_speaker(t.speaker, role_name); };
  if (is_role(turns.front())) out.emplace_back("first turn is spoken by the role");
  bool role_speaks = false;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    auto where = "turn " + std::to_string(i);
    if (text::trim(t.text).empty()) out.emplace_back(where + ": empty text");
    if (text::trim(t.speaker).empty()) out.emplace_back(where + ": empty speaker");
    if (t.action == Action::thinking) {
      if (!is_role(t)) {
        out.emplace_back(where + ": thinking by non-role speaker '" + t.speaker + "'");
      } else if (i + 1 >= turns.size() || !is_role(turns[i + 1]) ||
                 turns[i + 1].action != Action::speaking) {
        out.emplace_back(where + ": thinking turn not followed by the role speaking");
      }
    } else if (is_role(t)) {
      role_speaks = true;
    }
  }
  if (!role_speaks) out.emplace_back("the role never speaks");
  return out;
}

Dialogue Dialogue::with_scene_ref(std::string scene_ref) const {
  Dialogue d = *this;
  d.scene_ref_ = std::move(scene_ref);
  return d;
}

std::vector<std::string> invariant_violations(const DialoguePair& p) {
  std::vector<std::string> out;
  auto where = "pair " + p.pair_id + ": ";
  if (p.trigger.action != Action::speaking || same_speaker(p.trigger.speaker, p.role_name)) {
    out.emplace_back(where + "trigger must be a non-role speaking turn");
  }
  if (p.response.action != Action::speaking || p.response.speaker != p.role_name) {
    out.emplace_back(where + "response must be the role speaking");
  }
  if (text::trim(p.trigger.text).empty() || text::trim(p.response.text).empty()) {
    out.emplace_back(where + "empty trigger or response text");
  }
  if (p.thought) {
    auto rendered = turn_header(*p.thought) + p.thought->text;
    if (p.thought->action != Action::thinking ||
        rendered.rfind(p.role_name + " (thinking):", 0) != 0 || text::trim(p.thought->text).empty()) {
      out.emplace_back(where + "thought must be a non-empty thinking turn by " + p.role_name);
    }
  }
  for (const auto& t : p.context) {
    if (t == p.response) out.emplace_back(where + "context contains the response");
  }
  if (p.continuation && same_speaker(p.continuation->speaker, p.role_name)) {
    out.emplace_back(where + "continuation must be a non-role turn");
  }
  return out;
}

bool contains_unfamiliarity_statement(std::string_view s) {
  static constexpr std::array<std::string_view, 16> kMarkers = {
      "unfamiliar",      "not familiar",     "never heard",    "never seen",
      "never taken",     "do not know",      "don't know",     "never encountered",
      "know nothing",    "no idea",          "not know what",  "never known",
      "\xE4\xB8\x8D\xE7\x86\x9F\xE6\x82\x89",  // 不熟悉
      "\xE4\xB8\x8D\xE7\x9F\xA5\xE9\x81\x93",  // 不知道
      "\xE6\xB2\xA1\xE5\x90\xAC\xE8\xAF\xB4",  // 没听说
      "\xE4\xBB\x8E\xE6\x9C\xAA",              // 从未
  };
  auto folded = text::casefold(s);
  return std::any_of(kMarkers.begin(), kMarkers.end(),
                     [&](std::string_view m) { return folded.find(m) != std::string::npos; });
}

std::vector<std::string> invariant_violations(const HallucinationProbe& p) {
  std::vector<std::string> out;
  auto where = "probe " + p.probe_id + ": ";
  if (text::trim(p.question).empty()) out.emplace_back(where + "empty question");
  if (text::trim(p.refusal).empty()) {
    out.emplace_back(where + "empty refusal");
  } else if (!contains_unfamiliarity_statement(p.refusal)) {
    out.emplace_back(where + "refusal lacks an unfamiliarity statement");
  }
  return out;
}

void throw_if_violated(std::string_view what, const std::vector<std::string>& violations) {
  if (violations.empty()) return;
  throw ValidationError(std::string(what) + ": " + text::join(violations, "; "));
}

std::string to_string(Language v) { return v == Language::en ? "en" : "zh"; }

std::string to_string(SceneOrigin v) {
  return v == SceneOrigin::segment_derived ? "segment_derived" : "real_dialogue_derived";
}

std::string to_string(Action v) { return v == Action::thinking ? "thinking" : "speaking"; }

std::string to_string(DialogueOrigin v) { return v == DialogueOrigin::authentic ? "authentic" : "mimic"; }

Language language_from_string(std::string_view s) {
  if (s == "en") return Language::en;
  if (s == "zh") return Language::zh;
  throw ValidationError("unknown language tag '" + std::string(s) + "'");
}

SceneOrigin scene_origin_from_string(std::string_view s) {
  if (s == "segment_derived") return SceneOrigin::segment_derived;
  if (s == "real_dialogue_derived") return SceneOrigin::real_dialogue_derived;
  throw ValidationError("unknown scene origin '" + std::string(s) + "'");
}

Action action_from_string(std::string_view s) {
  auto f = text::casefold(text::trim(s));
  if (f == "thinking") return Action::thinking;
  if (f == "speaking") return Action::speaking;
  throw ValidationError("unknown action '" + std::string(s) + "'");
}

DialogueOrigin dialogue_origin_from_string(std::string_view s) {
  if (s == "authentic") return DialogueOrigin::authentic;
  if (s == "mimic") return DialogueOrigin::mimic;
  throw ValidationError("unknown dialogue origin '" + std::string(s) + "'");
}

}  // namespace rolekit
