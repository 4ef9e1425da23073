#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rolekit {

enum class QuestionKind { common, role_specific, hallucination };

std::string to_string(QuestionKind kind);
QuestionKind question_kind_from_string(std::string_view s);

struct EvalQuestion {
  std::string question_id;
  /// Absent for common questions.
  std::optional<std::string> role_id;
  QuestionKind kind = QuestionKind::common;
  std::string category;
  std::string text;

  bool operator==(const EvalQuestion&) const = default;
};

/// The 28 built-in question categories.
const std::vector<std::string>& default_categories();

/// One category per line; blank lines and '#' comments skipped.
std::vector<std::string> load_category_list(const std::filesystem::path& path);

struct QuestionBank {
  std::vector<EvalQuestion> questions;
  std::map<QuestionKind, std::size_t> kind_counts;
  std::map<std::string, std::size_t> category_counts;
  /// Role-specific questions whose text repeats a common question.
  std::vector<std::string> duplicated_common;

  std::size_t count(QuestionKind kind) const;
};

/// Line-delimited JSON with keys question_id, role_id, kind, category,
/// text. Throws ParseError for malformed rows and ValidationError for an
/// unknown category, a missing text, a role-specific row without role_id
/// or a repeated question_id; every message carries the line number.
QuestionBank parse_question_bank(std::string_view content, const std::vector<std::string>& categories,
                                 std::string_view source = "question bank");

QuestionBank load_question_bank(const std::filesystem::path& path,
                                const std::vector<std::string>& categories = default_categories());

/// Common questions plus those tagged with `role_id`, in bank order.
std::vector<EvalQuestion> questions_for_role(const QuestionBank& bank, std::string_view role_id);

}  // namespace rolekit
