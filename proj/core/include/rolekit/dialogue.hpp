#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rolekit/gateway.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr std::size_t kDefaultExemplars = 3;
inline constexpr double kDefaultExemplarTokenBudget = 1200.0;
inline constexpr std::size_t kMinScriptWords = 500;

struct DialoguePromptOptions {
  std::size_t max_exemplars = kDefaultExemplars;
  double exemplar_token_budget = kDefaultExemplarTokenBudget;
  /// Life-segment narrative behind the scene, when it has one.
  std::optional<std::string> footage;
};

/// Indices of the exemplars that fit: walk in order, keep one when fewer
/// than max_exemplars are kept and its rendered script fits the remaining
/// token budget, otherwise skip it.
std::vector<std::size_t> select_exemplars(const std::vector<Dialogue>& exemplars, std::size_t max_exemplars,
                                          double token_budget);

/// Screenplay prompt for one scene. Exemplars must be authentic dialogues of
/// the same role; the exemplar block is omitted when none are kept.
std::vector<ChatMessage> build_dialogue_prompt(const RoleProfile& profile, const Scene& scene,
                                               const std::vector<Dialogue>& exemplars,
                                               const DialoguePromptOptions& options = {});

struct ScriptParseOptions {
  std::string dialogue_id;
  std::string role_id;
  std::optional<std::string> scene_ref;
  DialogueOrigin origin = DialogueOrigin::mimic;
  std::vector<std::string> aliases;
  std::size_t min_words = kMinScriptWords;
};

struct ParsedScript {
  Dialogue dialogue;
  /// Scene / location text that preceded the first turn.
  std::string preamble;
  std::size_t word_count = 0;
  /// Fewer than min_words words of dialogue.
  bool short_script = false;
  std::vector<std::string> warnings;
};

/// Reads "<Name> (speaking|thinking): <text>" headers; following lines up
/// to the next header continue the turn and are joined with '\n'. Role
/// speakers (name or alias, case-insensitive) are rewritten to the role's
/// name. Throws ParseError when no turn is found and ValidationError when
/// the turns break a Dialogue invariant.
ParsedScript parse_script(std::string_view completion, std::string_view role_name,
                          const ScriptParseOptions& options);

/// Bit-exact script form: "Name (action): text" per turn, turns separated
/// by a blank line, trailing newline.
std::string render_turns(const std::vector<Turn>& turns);
std::string render_script(const Dialogue& dialogue);

/// One pair per maximal run of role turns. The trigger is the non-role
/// turn before the run, the context everything before the trigger, the
/// thought the run's thinking text and the response its speaking text
/// (several of either joined by '\n'). The turn after the run, if any,
/// is the continuation.
std::vector<DialoguePair> extract_pairs(const Dialogue& dialogue);

}  // namespace rolekit
