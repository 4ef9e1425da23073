#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/gateway.hpp"
#include "rolekit/question_bank.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr int kDefaultRounds = 5;

enum class TranscriptMode { single_turn, multi_turn };

std::string to_string(TranscriptMode mode);
TranscriptMode transcript_mode_from_string(std::string_view s);

struct Round {
  std::string user_text;
  std::string agent_text;

  bool operator==(const Round&) const = default;
};

struct Transcript {
  std::string transcript_id;
  std::string role_id;
  std::string agent_backend;
  TranscriptMode mode = TranscriptMode::single_turn;
  /// Rounds the run was configured for; 1 in single-turn mode.
  int planned_rounds = 1;
  std::vector<Round> rounds;
  std::optional<std::string> question_ref;
  bool incomplete = false;
  std::optional<std::string> incomplete_reason;

  /// Complete and holding exactly planned_rounds rounds.
  bool judgeable() const;

  bool operator==(const Transcript&) const = default;
};

std::vector<std::string> invariant_violations(const Transcript& transcript);

void to_json(nlohmann::json& j, const Transcript& t);
void from_json(const nlohmann::json& j, Transcript& t);

/// Role-play agent under evaluation. Each reply request carries the
/// role-play instruction (profile summary, a conversation scenario and the
/// history so far); see extract_agent_reply() for what counts as the reply.
class Agent {
 public:
  Agent(Gateway& gateway, RoleProfile profile, SamplingParams params = SamplingParams::generation());

  std::string reply(const std::vector<Round>& history, std::string_view user_text);

  const RoleProfile& profile() const noexcept { return profile_; }
  std::string backend_label() const;

 private:
  Gateway& gateway_;
  RoleProfile profile_;
  SamplingParams params_;
};

/// The text after the first "<name> (speaking):" marker up to the next unit
/// or separator, or the whole completion minus leading thinking lines when
/// the agent answers without markers.
std::string extract_agent_reply(std::string_view completion, std::string_view role_name);

/// Scenario shown to the agent during evaluation.
std::string eval_scenario(const RoleProfile& profile);

struct SkipRecord {
  std::string question_id;
  std::string reason;

  bool operator==(const SkipRecord&) const = default;
};

struct SingleTurnRun {
  std::vector<Transcript> transcripts;
  std::vector<SkipRecord> skipped;
};

/// One single-round transcript per question, "<role_id>-st-<question_id>".
/// Failed questions become skip records. Throws ValidationError for an
/// empty list and the last failure when every question failed.
SingleTurnRun run_single_turn(Agent& agent, const std::vector<EvalQuestion>& questions, std::size_t concurrency = 1);

/// Interrogator prompt asking for the next question given the transcript.
std::vector<ChatMessage> build_interrogator_prompt(const RoleProfile& profile, const std::vector<Round>& rounds);

/// First non-empty line of an interrogator completion, without markup,
/// "Question:"-style prefixes or wrapping quotes.
std::string clean_interrogator_question(std::string_view completion);

/// Round 1 asks `seed_question`; each later question comes from the
/// interrogator. A failure of either side truncates the transcript and
/// flags it incomplete. rounds == 1 yields a single-turn transcript.
Transcript run_multi_turn(Agent& agent, Gateway& interrogator, std::string transcript_id,
                          std::string_view seed_question, int rounds = kDefaultRounds,
                          const SamplingParams& interrogator_params = SamplingParams::generation());

}  // namespace rolekit
