#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/gateway.hpp"
#include "rolekit/rubrics.hpp"
#include "rolekit/transcripts.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 7;

struct ParsedVerdict {
  int score = 0;
  std::string evidence;
};

/// Score extraction from a judge completion:
///   1. the last non-empty line holding only an integer (markdown emphasis
///      ignored) gives the score, which must lie in [1,7];
///   2. otherwise the last three non-empty lines are scanned from the end,
///      first for an "N/7" or "N out of 7" ratio, then for the final
///      standalone integer in [1,7].
/// Evidence is the text before the score line, or the whole completion when
/// nothing precedes it. Throws ParseError when no score is found.
ParsedVerdict parse_verdict(std::string_view completion);

struct JudgeVerdict {
  std::string transcript_ref;
  std::string metric_id;
  std::string evidence;
  int score = 0;
  std::string raw;

  /// Throws ValidationError unless score is in [1,7] and evidence non-empty.
  static JudgeVerdict make(std::string transcript_ref, std::string metric_id, std::string evidence, int score,
                           std::string raw);

  bool operator==(const JudgeVerdict&) const = default;
};

void to_json(nlohmann::json& j, const JudgeVerdict& v);
void from_json(const nlohmann::json& j, JudgeVerdict& v);

/// "User: ..." / "<name>: ..." lines for every round.
std::string render_transcript(const RoleProfile& profile, const Transcript& transcript);

/// The metric's rubric with the profile summary and the transcript filled
/// in. Throws PreconditionError for a transcript that is not judgeable.
std::vector<ChatMessage> build_judge_prompt(const Metric& metric, const RoleProfile& profile,
                                            const Transcript& transcript);

struct UnjudgedItem {
  std::string transcript_ref;
  std::string metric_id;
  std::string reason;

  bool operator==(const UnjudgedItem&) const = default;
};

struct JudgeRun {
  std::vector<JudgeVerdict> verdicts;
  std::vector<UnjudgedItem> unjudged;
};

/// One verdict per (transcript, metric), transcript-major. An unparseable
/// answer is re-asked once with the same prompt and a fresh seed; a second
/// failure, or a transport failure, leaves the pair unjudged. Transcripts
/// that are not judgeable are listed as unjudged without a call. Throws
/// when nothing could be judged.
JudgeRun judge_transcripts(Gateway& judge, const std::vector<Metric>& metrics, const RoleProfile& profile,
                           const std::vector<Transcript>& transcripts,
                           const SamplingParams& params = SamplingParams::judging(), std::size_t concurrency = 1);

}  // namespace rolekit
