#include "rolekit/judge.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <optional>
#include <regex>

#include "rolekit/error.hpp"
#include "rolekit/parallel.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/text.hpp"
#include "rolekit/trainset.hpp"

namespace rolekit {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::optional<int> small_int(std::string_view digits) {
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  return std::stoi(std::string(digits));
}

bool in_range(int n) { return n >= kMinScore && n <= kMaxScore; }

std::string strip_markup(std::string_view line) {
  std::string out;
  for (char c : line) {
    if (c != '*' && c != '#' && c != '`') out.push_back(c);
  }
  return text::trim(out);
}

std::optional<int> ratio_score(const std::string& line) {
  static const std::regex ratio(R"((\d+)\s*(?:/|out of)\s*7(?!\d))", std::regex::icase);
  std::optional<int> found;
  for (auto it = std::sregex_iterator(line.begin(), line.end(), ratio); it != std::sregex_iterator(); ++it) {
    auto n = small_int((*it)[1].str());
    if (n && in_range(*n)) found = n;
  }
  return found;
}

// Last digit run in [1,7] that is not part of a decimal or a ratio.
std::optional<int> standalone_score(const std::string& line) {
  std::optional<int> found;
  const auto n = line.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(line[i])) {
      ++i;
      continue;
    }
    auto s = i;
    while (i < n && is_digit(line[i])) ++i;
    auto e = i;
    bool glued_before = s > 0 && (line[s - 1] == '/' || (line[s - 1] == '.' && s > 1 && is_digit(line[s - 2])) ||
                                  std::isalpha(static_cast<unsigned char>(line[s - 1])));
    bool glued_after = e < n && (line[e] == '/' || std::isalpha(static_cast<unsigned char>(line[e])) ||
                                 ((line[e] == '.' || line[e] == ',') && e + 1 < n && is_digit(line[e + 1])));
    if (glued_before || glued_after) continue;
    if (auto v = small_int(std::string_view(line).substr(s, e - s)); v && in_range(*v)) found = v;
  }
  return found;
}

std::string evidence_before(const std::vector<std::string>& lines, std::size_t score_line, std::string_view whole) {
  std::vector<std::string> before(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(score_line));
  auto evidence = text::trim(text::join(before, "\n"));
  return evidence.empty() ? text::trim(whole) : evidence;
}

}  // namespace

ParsedVerdict parse_verdict(std::string_view completion) {
  auto lines = text::split_lines(completion);
  std::vector<std::size_t> non_empty;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!text::trim(lines[i]).empty()) non_empty.push_back(i);
  }
  if (non_empty.empty()) throw ParseError("judge completion is empty");

  auto last = non_empty.back();
  auto cleaned = strip_markup(lines[last]);
  if (!cleaned.empty() && std::all_of(cleaned.begin(), cleaned.end(), is_digit)) {
    auto v = small_int(cleaned);
    if (!v || !in_range(*v)) {
      throw ParseError("judge score " + cleaned + " is outside [1,7]", std::string(completion));
    }
    return {*v, evidence_before(lines, last, completion)};
  }

  auto first = non_empty.size() > 3 ? non_empty.size() - 3 : 0;
  for (auto k = non_empty.size(); k-- > first;) {
    if (auto v = ratio_score(strip_markup(lines[non_empty[k]]))) {
      return {*v, evidence_before(lines, non_empty[k], completion)};
    }
  }
  for (auto k = non_empty.size(); k-- > first;) {
    if (auto v = standalone_score(strip_markup(lines[non_empty[k]]))) {
      return {*v, evidence_before(lines, non_empty[k], completion)};
    }
  }
  throw ParseError("no score in [1,7] found in the judge completion", std::string(completion));
}

JudgeVerdict JudgeVerdict::make(std::string transcript_ref, std::string metric_id, std::string evidence, int score,
                                std::string raw) {
  if (!in_range(score)) throw ValidationError("verdict score " + std::to_string(score) + " is outside [1,7]");
  if (text::trim(evidence).empty()) throw ValidationError("verdict evidence is empty");
  return {std::move(transcript_ref), std::move(metric_id), std::move(evidence), score, std::move(raw)};
}

void to_json(nlohmann::json& j, const JudgeVerdict& v) {
  j = {{"transcript_ref", v.transcript_ref}, {"metric_id", v.metric_id}, {"evidence", v.evidence},
       {"score", v.score},                   {"raw", v.raw}};
}

void from_json(const nlohmann::json& j, JudgeVerdict& v) {
  v = JudgeVerdict::make(j.at("transcript_ref").get<std::string>(), j.at("metric_id").get<std::string>(),
                         j.at("evidence").get<std::string>(), j.at("score").get<int>(), j.value("raw", std::string()));
}

std::string render_transcript(const RoleProfile& profile, const Transcript& transcript) {
  std::vector<std::string> lines;
  for (const auto& r : transcript.rounds) {
    lines.push_back(std::string(kProbeAskerName) + ": " + r.user_text);
    lines.push_back(profile.name + ": " + r.agent_text);
  }
  return text::join(lines, "\n");
}

std::vector<ChatMessage> build_judge_prompt(const Metric& metric, const RoleProfile& profile,
                                            const Transcript& transcript) {
  if (!transcript.judgeable()) {
    throw PreconditionError("transcript " + transcript.transcript_id + " is incomplete and cannot be judged");
  }
  return as_user_message(render_template(metric.rubric_text, {{"agent_name", profile.name},
                                                              {"agent_context", profile.summary},
                                                              {"interactions", render_transcript(profile, transcript)}}));
}

JudgeRun judge_transcripts(Gateway& judge, const std::vector<Metric>& metrics, const RoleProfile& profile,
                           const std::vector<Transcript>& transcripts, const SamplingParams& params,
                           std::size_t concurrency) {
  if (metrics.empty()) throw ValidationError("no metrics to judge");
  if (transcripts.empty()) throw ValidationError("no transcripts to judge");

  struct Item {
    const Transcript* transcript;
    const Metric* metric;
  };
  struct Result {
    std::optional<JudgeVerdict> verdict;
    std::optional<UnjudgedItem> unjudged;
    ErrorKind kind = ErrorKind::validation;
  };

  JudgeRun run;
  std::vector<Item> items;
  for (const auto& t : transcripts) {
    for (const auto& m : metrics) {
      if (t.judgeable()) {
        items.push_back({&t, &m});
      } else {
        run.unjudged.push_back({t.transcript_id, m.metric_id, "transcript is incomplete"});
      }
    }
  }

  auto retry_params = params;
  retry_params.seed = params.seed ? *params.seed + 1 : 1;
  auto outcomes = parallel_map(items.size(), concurrency, [&](std::size_t i) -> Result {
    const auto& [t, m] = items[i];
    auto prompt = build_judge_prompt(*m, profile, *t);
    try {
      std::string raw = judge.complete(prompt, params);
      std::optional<ParsedVerdict> parsed;
      try {
        parsed = parse_verdict(raw);
      } catch (const ParseError& e) {
        spdlog::warn("judge answer for {}/{} unparseable ({}); asking again", t->transcript_id, m->metric_id,
                     e.what());
        raw = judge.complete(prompt, retry_params);
        parsed = parse_verdict(raw);
      }
      return {JudgeVerdict::make(t->transcript_id, m->metric_id, parsed->evidence, parsed->score, raw), {},
              ErrorKind::parse};
    } catch (const Error& e) {
      return {{}, UnjudgedItem{t->transcript_id, m->metric_id, e.what()}, e.kind()};
    }
  });

  std::optional<ErrorKind> failure;
  for (auto& o : outcomes) {
    if (!o.ok()) std::rethrow_exception(o.error);
    if (o.value->verdict) {
      run.verdicts.push_back(std::move(*o.value->verdict));
    } else {
      run.unjudged.push_back(std::move(*o.value->unjudged));
      failure = o.value->kind;
    }
  }
  for (const auto& u : run.unjudged) spdlog::warn("unjudged {}/{}: {}", u.transcript_ref, u.metric_id, u.reason);
  if (run.verdicts.empty()) {
    std::string list;
    for (std::size_t i = 0; i < run.unjudged.size() && i < 20; ++i) {
      list += "\n  " + run.unjudged[i].transcript_ref + "/" + run.unjudged[i].metric_id + ": " + run.unjudged[i].reason;
    }
    if (run.unjudged.size() > 20) list += "\n  ... " + std::to_string(run.unjudged.size() - 20) + " more";
    throw Error(failure.value_or(ErrorKind::validation), "nothing could be judged:" + list);
  }
  return run;
}

}  // namespace rolekit
