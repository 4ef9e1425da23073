#include <gtest/gtest.h>

#include <fstream>

#include "rolekit/error.hpp"
#include "rolekit/question_bank.hpp"
#include "rolekit/rubrics.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

TEST(QuestionBank, FixtureCounts) {
  auto bank = load_question_bank(testing::fixtures_dir() / "question_bank.jsonl");
  EXPECT_EQ(bank.questions.size(), 150u);
  EXPECT_EQ(bank.count(QuestionKind::common), 100u);
  EXPECT_EQ(bank.count(QuestionKind::role_specific), 50u);
  EXPECT_EQ(bank.category_counts.size(), 28u);
  EXPECT_EQ(default_categories().size(), 28u);
  EXPECT_EQ(questions_for_role(bank, "beethoven").size(), 150u);
  EXPECT_EQ(questions_for_role(bank, "mozart").size(), 100u);
}

TEST(QuestionBank, UnknownCategoryIsRejectedWithLineNumber) {
  try {
    load_question_bank(testing::fixtures_dir() / "question_bank_bad.jsonl");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("cooking"), std::string::npos);
  }
}

TEST(QuestionBank, RowLevelErrors) {
  const auto& cats = default_categories();
  EXPECT_THROW(parse_question_bank("{not json\n", cats), ParseError);
  EXPECT_THROW(parse_question_bank(R"({"question_id":"a","kind":"common","category":"family"})", cats),
               ValidationError);
  EXPECT_THROW(parse_question_bank(R"({"question_id":"a","kind":"role_specific","category":"family","text":"Q"})", cats),
               ValidationError);
  EXPECT_THROW(parse_question_bank(R"({"question_id":"a","kind":"common","category":"family","text":"Q"})"
                                   "\n"
                                   R"({"question_id":"a","kind":"common","category":"family","text":"R"})",
                                   cats),
               ValidationError);
  auto dup = parse_question_bank(R"({"question_id":"a","kind":"common","category":"family","text":"Q?"})"
                                 "\n"
                                 R"({"question_id":"b","role_id":"r","kind":"role_specific","category":"family","text":"q?"})",
                                 cats);
  EXPECT_EQ(dup.duplicated_common, std::vector<std::string>{"b"});
}

TEST(QuestionBank, CustomCategoryList) {
  testing::TempDir tmp;
  std::ofstream(tmp.path() / "cats.txt") << "# mine\ncooking\n\nmusic\n";
  auto cats = load_category_list(tmp.path() / "cats.txt");
  EXPECT_EQ(cats, (std::vector<std::string>{"cooking", "music"}));
  EXPECT_NO_THROW(load_question_bank(testing::fixtures_dir() / "question_bank_bad.jsonl",
                                     {"cooking", "childhood", "family", "education", "mentors"}));
}

TEST(Rubrics, BuiltinsAreWellFormed) {
  const auto& metrics = builtin_metrics();
  ASSERT_EQ(metrics.size(), 6u);
  std::vector<std::string> ids;
  for (const auto& m : metrics) {
    ids.push_back(m.metric_id);
    EXPECT_TRUE(rubric_violations(m.rubric_text).empty()) << m.metric_id;
  }
  EXPECT_EQ(ids, (std::vector<std::string>{"contextual", "emotional", "language", "logical", "adaptability",
                                           "overall"}));
}

TEST(Rubrics, CustomRubricsAndSelection) {
  testing::TempDir tmp;
  std::ofstream(tmp.path() / "humor.txt")
      << "Rate {agent_name} given {agent_context} on {interactions}. Write the evidence first, then a score "
         "on a scale of 1 to 7.";
  std::ofstream(tmp.path() / "broken.txt") << "Rate {agent_name}.";
  auto m = resolve_metrics("logical,humor", tmp.path());
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[1].metric_id, "humor");
  EXPECT_EQ(resolve_metrics("all").size(), 6u);
  EXPECT_THROW(resolve_metrics("broken", tmp.path()), ValidationError);
  EXPECT_THROW(resolve_metrics("missing", tmp.path()), ValidationError);
  EXPECT_FALSE(rubric_violations("{agent_name} {interactions}").empty());
}

}  // namespace
}  // namespace rolekit
