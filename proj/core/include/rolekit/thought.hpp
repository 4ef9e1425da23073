#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rolekit/gateway.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr std::size_t kMaxThoughtWords = 120;

/// Thought-annotation prompt. Shows the scene, the pair's speaking context,
/// trigger and response, and ends with the "<name> (thinking):" cue.
/// Throws PreconditionError for an annotated pair or a pair of another role.
std::vector<ChatMessage> build_thought_prompt(const RoleProfile& profile, const Scene& scene,
                                              const DialoguePair& pair);

/// Strips an echoed "<name> (thinking):" prefix and surrounding quotes,
/// collapses whitespace and truncates to max_words at a sentence boundary
/// (hard word cut when the first sentence alone is longer). Throws
/// ParseError when the text is empty or carries a "(speaking):" marker.
Turn parse_thought(std::string_view completion, std::string_view role_name,
                   std::size_t max_words = kMaxThoughtWords);

/// Longest run of whole sentences within max_words words.
std::string truncate_at_sentence(std::string_view s, std::size_t max_words);

/// Returns a copy of `pair` with the thought set. Write-once: throws
/// PreconditionError when a thought is already present, ValidationError
/// when `thought` is not a non-empty thinking turn by the role.
DialoguePair annotate_pair(const DialoguePair& pair, const Turn& thought);

/// Ids of pairs that still lack a thought.
std::vector<std::string> unannotated_pairs(const std::vector<DialoguePair>& pairs);

}  // namespace rolekit
