#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rolekit/gateway.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr int kDefaultProbeCount = 20;
inline constexpr double kDefaultProbeShareCap = 0.05;

/// Per-role curated anachronism topics and the terms that signal each one.
/// File form: one "topic<TAB>term,term,..." line per topic; blank lines and
/// '#' comments are skipped.
struct TopicLexicon {
  struct Topic {
    std::string name;
    std::vector<std::string> terms;
  };
  std::vector<Topic> topics;

  std::vector<std::string> names() const;
  const Topic* find(std::string_view name) const;
};

TopicLexicon parse_topic_lexicon(std::string_view content);
TopicLexicon load_topic_lexicon(const std::filesystem::path& path);

/// Out-of-knowledge question prompt: the imitator-dismantling task, the
/// topic list and the sideways-question requirement with its example.
std::vector<ChatMessage> build_probe_prompt(const RoleProfile& profile, const std::vector<std::string>& topics,
                                            int probe_count = kDefaultProbeCount);

/// Head-on phrasing such as "Do you know what an airplane is?".
bool is_direct_question(std::string_view question);

struct ProbeParseResult {
  std::vector<HallucinationProbe> probes;
  /// Probes kept despite a direct phrasing.
  std::vector<std::string> direct_ids;
  std::vector<std::string> warnings;
};

struct ProbeParseOptions {
  bool with_rationale = true;
};

/// Numbered-list items become probes. A leading "[topic]" tag names the
/// topic; otherwise the first lexicon topic whose term occurs in the
/// question is used. Each probe receives the rendered refusal. Throws
/// ParseError when no item is found.
ProbeParseResult parse_probes(std::string_view completion, const RoleProfile& profile, const TopicLexicon& lexicon,
                              const ProbeParseOptions& options = {});

/// First-person unfamiliarity statement plus an in-era deflection, chosen
/// from a fixed template set by `template_choice` or, when absent, by the
/// probe id's digest. Templates follow the profile's language.
std::string render_refusal(const RoleProfile& profile, const HallucinationProbe& probe,
                           std::optional<std::size_t> template_choice = std::nullopt);

/// Thinking text attached to probe records when rationales are enabled.
std::string render_refusal_rationale(const RoleProfile& profile, const HallucinationProbe& probe);

struct RefusalCheck {
  bool passed = true;
  std::vector<std::string> reasons;
};

/// Fails without an unfamiliarity statement, or when a lexicon term appears
/// in a sentence that carries no unfamiliarity or negation wording.
RefusalCheck validate_refusal(std::string_view refusal, const std::vector<std::string>& terms);

/// Largest probe count n with n / (n + dialogue_records) <= cap.
std::size_t max_probe_records(std::size_t dialogue_records, double cap = kDefaultProbeShareCap);

/// Keeps the first max_probe_records() probes in id order.
std::vector<HallucinationProbe> cap_probes(std::vector<HallucinationProbe> probes, std::size_t dialogue_records,
                                           double cap = kDefaultProbeShareCap);

}  // namespace rolekit
