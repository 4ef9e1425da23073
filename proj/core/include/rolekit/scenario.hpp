#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rolekit/gateway.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr int kDefaultSceneCount = 20;
/// Shortest verbatim word run of a dialogue turn that a scene background may
/// not repeat.
inline constexpr std::size_t kLeakWindowWords = 6;

/// Scene-design prompt for one life segment.
std::vector<ChatMessage> build_segment_scene_prompt(const RoleProfile& profile, const LifeSegment& segment,
                                                    int scene_count = kDefaultSceneCount);

/// Scenario prompt for an authentic dialogue; the dialogue is embedded
/// verbatim in rendered-script form. Throws PreconditionError for mimic or
/// empty dialogues.
std::vector<ChatMessage> build_real_dialogue_scene_prompt(const RoleProfile& profile, const Dialogue& dialogue);

struct SceneParseOptions {
  std::string role_id;
  SceneOrigin origin = SceneOrigin::segment_derived;
  std::optional<int> segment_ref;
  /// Scene ids are "<id_prefix>-scene<NN>", NN being the block's position.
  std::string id_prefix;
  std::size_t expected_count = 0;
};

struct SceneParseResult {
  std::vector<Scene> scenes;
  std::vector<std::string> warnings;
  /// Fewer valid scenes than expected_count.
  bool shortfall = false;
};

/// Splits a completion on "Scene <n>" headers ("Scene 1.", "Scene 1:",
/// "**Scene 1**", or a bare "Scene:" for single-scene answers), reads the
/// Location / Background / Characters lines of each block and drops blocks
/// that violate Scene invariants. Throws ParseError when nothing survives.
SceneParseResult parse_scenes(std::string_view completion, const SceneParseOptions& options);

struct SceneLeakCheck {
  bool passed = true;
  std::vector<std::string> reasons;
  /// Normalized word runs shared with a dialogue turn.
  std::vector<std::string> offending_spans;
};

/// Fails when the background repeats any kLeakWindowWords-word run of any
/// turn (case-folded, whitespace-normalized, edge punctuation stripped) or
/// when the scene itself is invalid.
SceneLeakCheck validate_scene_against_dialogue(const Scene& scene, const Dialogue& dialogue);

/// Word tokens used by the leak check.
std::vector<std::string> leak_check_tokens(std::string_view s);

/// "Location: ...\n<background>[\nCharacters: ...]".
std::string render_scene(const Scene& scene);

}  // namespace rolekit
