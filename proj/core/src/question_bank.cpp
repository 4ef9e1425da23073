#include "rolekit/question_bank.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"
#include "rolekit/workspace.hpp"

namespace rolekit {

std::string to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::common:
      return "common";
    case QuestionKind::role_specific:
      return "role_specific";
    case QuestionKind::hallucination:
      return "hallucination";
  }
  return "common";
}

QuestionKind question_kind_from_string(std::string_view s) {
  if (s == "common") return QuestionKind::common;
  if (s == "role_specific") return QuestionKind::role_specific;
  if (s == "hallucination") return QuestionKind::hallucination;
  throw ValidationError("unknown question kind '" + std::string(s) + "'");
}

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> categories = {
      "childhood",   "family",       "education",  "mentors",          "hobbies",  "career_choice", "early_career",
      "major_works", "creative_process", "collaborators", "rivals", "friendships", "romance",      "health",
      "hardship",    "success",      "failure",    "beliefs",          "values",   "politics",      "religion",
      "daily_life",  "travel",       "historical_events", "legacy",    "regrets",  "advice",        "out_of_era",
  };
  return categories;
}

std::vector<std::string> load_category_list(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(read_file(path))) {
    auto t = text::trim(line);
    if (!t.empty() && t[0] != '#') out.push_back(t);
  }
  if (out.empty()) throw ValidationError(path.string() + ": category list is empty");
  return out;
}

std::size_t QuestionBank::count(QuestionKind kind) const {
  auto it = kind_counts.find(kind);
  return it == kind_counts.end() ? 0 : it->second;
}

QuestionBank parse_question_bank(std::string_view content, const std::vector<std::string>& categories,
                                 std::string_view source) {
  std::set<std::string, std::less<>> allowed(categories.begin(), categories.end());
  std::set<std::string> ids;
  QuestionBank bank;
  auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    auto where = std::string(source) + " line " + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what(), lines[i]);
    }
    if (!j.is_object()) throw ParseError(where + ": row is not a JSON object", lines[i]);
    auto field = [&](const char* key) -> std::string {
      if (!j.contains(key) || j[key].is_null()) return {};
      if (!j[key].is_string()) throw ParseError(where + ": '" + key + "' must be a string", lines[i]);
      return text::trim(j[key].get<std::string>());
    };

    EvalQuestion q;
    q.question_id = field("question_id");
    if (q.question_id.empty()) throw ValidationError(where + ": missing question_id");
    if (auto role = field("role_id"); !role.empty()) q.role_id = role;
    auto kind = field("kind");
    if (kind.empty()) throw ValidationError(where + ": missing kind");
    try {
      q.kind = question_kind_from_string(kind);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    q.category = field("category");
    if (!allowed.contains(q.category)) throw ValidationError(where + ": unknown category '" + q.category + "'");
    q.text = field("text");
    if (q.text.empty()) throw ValidationError(where + ": missing text");
    if (q.kind == QuestionKind::role_specific && !q.role_id) {
      throw ValidationError(where + ": role_specific question needs a role_id");
    }
    if (!ids.insert(q.question_id).second) throw ValidationError(where + ": duplicate question_id " + q.question_id);

    ++bank.kind_counts[q.kind];
    ++bank.category_counts[q.category];
    bank.questions.push_back(std::move(q));
  }

  std::set<std::string> common_texts;
  for (const auto& q : bank.questions) {
    if (q.kind == QuestionKind::common) common_texts.insert(text::casefold(text::normalize_whitespace(q.text)));
  }
  for (const auto& q : bank.questions) {
    if (q.kind == QuestionKind::role_specific &&
        common_texts.contains(text::casefold(text::normalize_whitespace(q.text)))) {
      bank.duplicated_common.push_back(q.question_id);
      spdlog::warn("{}: role-specific question {} repeats a common question", source, q.question_id);
    }
  }
  return bank;
}

QuestionBank load_question_bank(const std::filesystem::path& path, const std::vector<std::string>& categories) {
  return parse_question_bank(read_file(path), categories, path.string());
}

std::vector<EvalQuestion> questions_for_role(const QuestionBank& bank, std::string_view role_id) {
  std::vector<EvalQuestion> out;
  std::copy_if(bank.questions.begin(), bank.questions.end(), std::back_inserter(out), [&](const EvalQuestion& q) {
    return q.kind == QuestionKind::common || (q.role_id && *q.role_id == role_id);
  });
  return out;
}

}  // namespace rolekit
