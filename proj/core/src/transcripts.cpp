#include "rolekit/transcripts.hpp"

#include <spdlog/spdlog.h>

#include "rolekit/error.hpp"
#include "rolekit/parallel.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/text.hpp"
#include "rolekit/trainset.hpp"

namespace rolekit {

namespace {

constexpr const char* kEvalScenario = "{agent_name} is having a conversation with a user who asks them questions.";

constexpr const char* kInterrogatorTemplate =
    "You are chatting with {agent_name}. Here is the conversation so far:\n"
    "{history}\n"
    "***\n"
    "Based on the conversation so far, write the next question the user would ask {agent_name} to continue "
    "the dialog naturally. Output only the question.";

std::vector<Turn> history_turns(const RoleProfile& profile, const std::vector<Round>& history,
                                std::string_view user_text) {
  std::vector<Turn> turns;
  for (const auto& r : history) {
    turns.push_back({kProbeAskerName, Action::speaking, r.user_text});
    turns.push_back({profile.name, Action::speaking, r.agent_text});
  }
  turns.push_back({kProbeAskerName, Action::speaking, std::string(user_text)});
  return turns;
}

std::string strip_wrapping_quotes(std::string s) {
  auto quoted = [&](char open, char close) { return s.size() >= 2 && s.front() == open && s.back() == close; };
  while (quoted('\'', '\'') || quoted('"', '"')) s = text::trim(s.substr(1, s.size() - 2));
  return s;
}

bool is_unit_header_line(std::string_view line) {
  auto folded = text::casefold(line);
  auto at = std::min(folded.find(" (speaking):"), folded.find(" (thinking):"));
  return at != std::string::npos && at > 0 && at <= 80;
}

}  // namespace

std::string to_string(TranscriptMode mode) { return mode == TranscriptMode::single_turn ? "single_turn" : "multi_turn"; }

TranscriptMode transcript_mode_from_string(std::string_view s) {
  if (s == "single_turn" || s == "single") return TranscriptMode::single_turn;
  if (s == "multi_turn" || s == "multi") return TranscriptMode::multi_turn;
  throw ValidationError("unknown transcript mode '" + std::string(s) + "'");
}

bool Transcript::judgeable() const {
  return !incomplete && static_cast<int>(rounds.size()) == planned_rounds && invariant_violations(*this).empty();
}

std::vector<std::string> invariant_violations(const Transcript& t) {
  std::vector<std::string> v;
  if (t.transcript_id.empty()) v.emplace_back("transcript_id is empty");
  if (t.planned_rounds < 1) v.emplace_back("planned_rounds must be >= 1");
  if (t.mode == TranscriptMode::single_turn && t.planned_rounds != 1) {
    v.emplace_back("single-turn transcript must plan exactly 1 round");
  }
  auto n = static_cast<int>(t.rounds.size());
  if (!t.incomplete && n != t.planned_rounds) {
    v.push_back("complete transcript has " + std::to_string(n) + " rounds, planned " +
                std::to_string(t.planned_rounds));
  }
  if (t.incomplete && n >= t.planned_rounds) v.emplace_back("incomplete transcript holds every planned round");
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    if (text::trim(t.rounds[i].user_text).empty()) v.push_back("round " + std::to_string(i + 1) + ": empty user text");
    if (text::trim(t.rounds[i].agent_text).empty()) v.push_back("round " + std::to_string(i + 1) + ": empty agent text");
  }
  return v;
}

void to_json(nlohmann::json& j, const Transcript& t) {
  j = nlohmann::json::object();
  j["transcript_id"] = t.transcript_id;
  j["role_id"] = t.role_id;
  j["agent_backend"] = t.agent_backend;
  j["mode"] = to_string(t.mode);
  j["planned_rounds"] = t.planned_rounds;
  j["question_ref"] = t.question_ref ? nlohmann::json(*t.question_ref) : nlohmann::json(nullptr);
  j["rounds"] = nlohmann::json::array();
  for (const auto& r : t.rounds) j["rounds"].push_back({{"user_text", r.user_text}, {"agent_text", r.agent_text}});
  j["incomplete"] = t.incomplete;
  j["incomplete_reason"] = t.incomplete_reason ? nlohmann::json(*t.incomplete_reason) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, Transcript& t) {
  t.transcript_id = j.at("transcript_id").get<std::string>();
  t.role_id = j.at("role_id").get<std::string>();
  t.agent_backend = j.at("agent_backend").get<std::string>();
  t.mode = transcript_mode_from_string(j.at("mode").get<std::string>());
  t.planned_rounds = j.at("planned_rounds").get<int>();
  t.question_ref.reset();
  if (j.contains("question_ref") && !j["question_ref"].is_null()) t.question_ref = j["question_ref"].get<std::string>();
  t.rounds.clear();
  for (const auto& r : j.at("rounds")) {
    t.rounds.push_back({r.at("user_text").get<std::string>(), r.at("agent_text").get<std::string>()});
  }
  t.incomplete = j.value("incomplete", false);
  t.incomplete_reason.reset();
  if (j.contains("incomplete_reason") && !j["incomplete_reason"].is_null()) {
    t.incomplete_reason = j["incomplete_reason"].get<std::string>();
  }
}

Agent::Agent(Gateway& gateway, RoleProfile profile, SamplingParams params)
    : gateway_(gateway), profile_(std::move(profile)), params_(params) {}

std::string Agent::backend_label() const {
  return gateway_.backend().backend_id() + "/" + gateway_.backend().model_id();
}

std::string Agent::reply(const std::vector<Round>& history, std::string_view user_text) {
  auto instruction = assemble_instruction(profile_, eval_scenario(profile_), history_turns(profile_, history, user_text),
                                          static_cast<double>(kDefaultMaxSequenceLength));
  auto completion = gateway_.complete(as_user_message(std::move(instruction)), params_);
  auto reply = extract_agent_reply(completion, profile_.name);
  if (reply.empty()) throw ProtocolError("agent reply for " + profile_.name + " is empty after markup removal");
  return reply;
}

std::string eval_scenario(const RoleProfile& profile) {
  return render_template(kEvalScenario, {{"agent_name", profile.name}});
}

std::string extract_agent_reply(std::string_view completion, std::string_view role_name) {
  std::string body(completion);
  auto marker = text::casefold(role_name) + " (speaking):";
  auto at = text::casefold(body).find(marker);
  if (at != std::string::npos) body = body.substr(at + marker.size());

  for (const char* sep : {"<|endoftext|>", "<endoftext>"}) {
    if (auto cut = body.find(sep); cut != std::string::npos) body.resize(cut);
  }
  std::vector<std::string> kept;
  for (const auto& line : text::split_lines(body)) {
    if (is_unit_header_line(line)) {
      // A thinking line ahead of any speech is dropped; another unit after
      // the reply ends it.
      if (kept.empty() && at == std::string::npos) continue;
      break;
    }
    kept.push_back(line);
  }
  return strip_wrapping_quotes(text::trim(text::join(kept, "\n")));
}

SingleTurnRun run_single_turn(Agent& agent, const std::vector<EvalQuestion>& questions, std::size_t concurrency) {
  if (questions.empty()) throw ValidationError("no questions to ask");
  const auto& profile = agent.profile();
  auto label = agent.backend_label();
  auto outcomes = parallel_map(questions.size(), concurrency, [&](std::size_t i) {
    const auto& q = questions[i];
    Transcript t;
    t.transcript_id = profile.role_id + "-st-" + q.question_id;
    t.role_id = profile.role_id;
    t.agent_backend = label;
    t.mode = TranscriptMode::single_turn;
    t.planned_rounds = 1;
    t.question_ref = q.question_id;
    t.rounds.push_back({q.text, agent.reply({}, q.text)});
    return t;
  });

  SingleTurnRun run;
  std::exception_ptr last;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].ok()) {
      run.transcripts.push_back(std::move(*outcomes[i].value));
      continue;
    }
    last = outcomes[i].error;
    std::string reason;
    try {
      std::rethrow_exception(last);
    } catch (const std::exception& e) {
      reason = e.what();
    }
    spdlog::warn("question {} skipped: {}", questions[i].question_id, reason);
    run.skipped.push_back({questions[i].question_id, reason});
  }
  if (run.transcripts.empty()) {
    try {
      std::rethrow_exception(last);
    } catch (const Error& e) {
      throw Error(e.kind(), "all " + std::to_string(questions.size()) + " questions failed; last error: " + e.what());
    }
  }
  return run;
}

std::vector<ChatMessage> build_interrogator_prompt(const RoleProfile& profile, const std::vector<Round>& rounds) {
  std::vector<std::string> lines;
  for (const auto& r : rounds) {
    lines.push_back(std::string(kProbeAskerName) + ": " + r.user_text);
    lines.push_back(profile.name + ": " + r.agent_text);
  }
  if (lines.empty()) throw PreconditionError("the interrogator needs at least one finished round");
  return as_user_message(render_template(kInterrogatorTemplate,
                                         {{"agent_name", profile.name}, {"history", text::join(lines, "\n")}}));
}

std::string clean_interrogator_question(std::string_view completion) {
  // Only the first non-empty line; models sometimes add commentary below.
  std::string s;
  for (const auto& line : text::split_lines(completion)) {
    if (!text::trim(line).empty()) {
      s = line;
      break;
    }
  }
  std::erase(s, '*');
  s = text::normalize_whitespace(s);
  for (const char* prefix : {"next question:", "question:", "user:"}) {
    if (text::starts_with_icase(s, prefix)) s = text::trim(std::string_view(s).substr(std::string_view(prefix).size()));
  }
  s = strip_wrapping_quotes(s);
  if (s.empty()) throw ParseError("interrogator returned no question", std::string(completion));
  return s;
}

Transcript run_multi_turn(Agent& agent, Gateway& interrogator, std::string transcript_id,
                          std::string_view seed_question, int rounds, const SamplingParams& interrogator_params) {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (text::trim(seed_question).empty()) throw ValidationError("seed question is empty");
  Transcript t;
  t.transcript_id = std::move(transcript_id);
  t.role_id = agent.profile().role_id;
  t.agent_backend = agent.backend_label();
  t.mode = rounds == 1 ? TranscriptMode::single_turn : TranscriptMode::multi_turn;
  t.planned_rounds = rounds;

  for (int r = 0; r < rounds; ++r) {
    std::string question;
    if (r == 0) {
      question = text::trim(seed_question);
    } else {
      try {
        question = clean_interrogator_question(
            interrogator.complete(build_interrogator_prompt(agent.profile(), t.rounds), interrogator_params));
      } catch (const Error& e) {
        t.incomplete = true;
        t.incomplete_reason = "interrogator failed at round " + std::to_string(r + 1) + ": " + e.what();
        break;
      }
    }
    try {
      t.rounds.push_back({question, agent.reply(t.rounds, question)});
    } catch (const Error& e) {
      t.incomplete = true;
      t.incomplete_reason = "agent failed at round " + std::to_string(r + 1) + ": " + e.what();
      break;
    }
  }
  if (t.incomplete) spdlog::warn("transcript {} incomplete: {}", t.transcript_id, *t.incomplete_reason);
  return t;
}

}  // namespace rolekit
