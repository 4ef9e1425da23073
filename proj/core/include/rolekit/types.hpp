#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rolekit {

enum class Language { en, zh };

inline constexpr double kDefaultSummaryTokenBudget = 1500.0;

struct ProfileSection {
  std::string title;
  std::string body;

  bool operator==(const ProfileSection&) const = default;
};

/// A section counts as life experience when its title mentions "life",
/// "experience" or "biography" (case-insensitive).
bool is_life_experience_title(std::string_view title);

/// Rejects empty ids, path separators and dot-only names.
void validate_role_id(std::string_view role_id);

struct RoleProfile {
  std::string role_id;
  std::string name;
  Language language = Language::en;
  std::string summary;
  std::vector<ProfileSection> sections;
  std::optional<std::string> source_uri;
  /// Alternate spellings accepted as the role when parsing scripts.
  std::vector<std::string> aliases;

  /// First section tagged as life experience, or nullptr.
  const ProfileSection* life_experience() const;

  /// Trimmed, case-folded comparison against the name and every alias.
  bool is_role_speaker(std::string_view speaker) const;

  bool operator==(const RoleProfile&) const = default;
};

std::vector<std::string> invariant_violations(const RoleProfile& profile,
                                              double summary_token_budget = kDefaultSummaryTokenBudget);

struct LifeSegment {
  std::string role_id;
  int segment_index = 0;
  std::string period_label;
  std::string narrative;

  bool operator==(const LifeSegment&) const = default;
};

/// Checks per-segment invariants plus contiguity of the indices.
std::vector<std::string> invariant_violations(const std::vector<LifeSegment>& segments);

enum class SceneOrigin { segment_derived, real_dialogue_derived };

struct Scene {
  std::string scene_id;
  std::string role_id;
  SceneOrigin origin = SceneOrigin::segment_derived;
  std::optional<int> segment_ref;
  std::string location;
  std::string background;
  std::vector<std::string> participants;

  bool operator==(const Scene&) const = default;
};

/// True when the text carries a "(speaking):" or "(thinking):" marker.
bool contains_turn_marker(std::string_view s);

std::vector<std::string> invariant_violations(const Scene& scene);

enum class Action { thinking, speaking };

struct Turn {
  std::string speaker;
  Action action = Action::speaking;
  std::string text;

  bool operator==(const Turn&) const = default;
};

/// "Name (action): " header without the text.
std::string turn_header(const Turn& turn);

/// Same-speaker test used everywhere a role name is compared: trimmed and
/// ASCII case-folded.
bool same_speaker(std::string_view a, std::string_view b);

enum class DialogueOrigin { authentic, mimic };

/// A parsed script. Construction goes through create(), which enforces the
/// first-speaker, thinking-placement and role-must-speak rules; no invalid
/// Dialogue can exist.
class Dialogue {
 public:
  static Dialogue create(std::string dialogue_id, std::string role_id, std::string role_name,
                         std::optional<std::string> scene_ref, DialogueOrigin origin,
                         std::vector<Turn> turns);

  /// Violations that create() would reject, for auditing raw turn lists.
  static std::vector<std::string> violations(std::string_view role_name,
                                             const std::vector<Turn>& turns);

  const std::string& dialogue_id() const noexcept { return dialogue_id_; }
  const std::string& role_id() const noexcept { return role_id_; }
  const std::string& role_name() const noexcept { return role_name_; }
  const std::optional<std::string>& scene_ref() const noexcept { return scene_ref_; }
  DialogueOrigin origin() const noexcept { return origin_; }
  const std::vector<Turn>& turns() const noexcept { return turns_; }

  bool is_role(const Turn& turn) const { return same_speaker(turn.speaker, role_name_); }

  Dialogue with_scene_ref(std::string scene_ref) const;

  bool operator==(const Dialogue&) const = default;

 private:
  Dialogue() = default;

  std::string dialogue_id_;
  std::string role_id_;
  std::string role_name_;
  std::optional<std::string> scene_ref_;
  DialogueOrigin origin_ = DialogueOrigin::mimic;
  std::vector<Turn> turns_;
};

/// One training unit: the turns before a non-role trigger, the trigger, the
/// role's optional thought and its response. `continuation` is the next
/// non-role turn when the dialogue goes on after the response.
struct DialoguePair {
  std::string pair_id;
  std::string dialogue_ref;
  std::string scene_ref;
  std::string role_name;
  std::vector<Turn> context;
  Turn trigger;
  std::optional<Turn> thought;
  Turn response;
  std::optional<Turn> continuation;

  bool operator==(const DialoguePair&) const = default;
};

std::vector<std::string> invariant_violations(const DialoguePair& pair);

/// Unfamiliarity phrasing ("I am unfamiliar with", "never heard of", ...).
bool contains_unfamiliarity_statement(std::string_view s);

struct HallucinationProbe {
  std::string probe_id;
  std::string role_id;
  std::string question;
  std::string anachronism_topic;
  std::string refusal;
  /// Set when the question asks head-on ("Do you know what X is") instead
  /// of sideways.
  bool direct = false;
  /// Refusal-rationale thought, when enabled.
  std::optional<std::string> rationale;

  bool operator==(const HallucinationProbe&) const = default;
};

std::vector<std::string> invariant_violations(const HallucinationProbe& probe);

/// Throws ValidationError listing every violation when the list is non-empty.
void throw_if_violated(std::string_view what, const std::vector<std::string>& violations);

std::string to_string(Language v);
std::string to_string(SceneOrigin v);
std::string to_string(Action v);
std::string to_string(DialogueOrigin v);

Language language_from_string(std::string_view s);
SceneOrigin scene_origin_from_string(std::string_view s);
Action action_from_string(std::string_view s);
DialogueOrigin dialogue_origin_from_string(std::string_view s);

}  // namespace rolekit
