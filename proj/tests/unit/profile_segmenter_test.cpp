#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "rolekit/error.hpp"
#include "rolekit/gateway.hpp"
#include "rolekit/mock_backend.hpp"
#include "rolekit/profile.hpp"
#include "rolekit/segmenter.hpp"
#include "rolekit/text.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace rolekit {
namespace {

TEST(Profile, ReadsFixtureDirectory) {
  auto src = read_profile_dir(testing::fixtures_dir() / "beethoven", "beethoven");
  EXPECT_EQ(src.profile.name, "Ludwig van Beethoven");
  EXPECT_EQ(src.profile.aliases, (std::vector<std::string>{"Beethoven", "Ludwig"}));
  ASSERT_EQ(src.profile.sections.size(), 4u);
  EXPECT_EQ(src.profile.sections[0].title, "Childhood");
  EXPECT_EQ(src.profile.life_experience()->title, "Life Experience");
  EXPECT_FALSE(src.summary_supplied);
  EXPECT_EQ(src.authentic_scripts.size(), 2u);
}

TEST(Profile, SummaryComesFromTheGatewayWhenNotSupplied) {
  auto mock = mock_rule_table({{"Summarize the following profile", "A composer from Bonn."}}, "");
  Gateway gw(mock);
  auto src = ingest_profile(testing::fixtures_dir() / "beethoven", "beethoven", &gw);
  EXPECT_EQ(src.profile.summary, "Ludwig van Beethoven: A composer from Bonn.");
  EXPECT_THROW(ingest_profile(testing::fixtures_dir() / "beethoven", "beethoven", nullptr), PreconditionError);
}

TEST(Profile, SummaryIsCutAtSentencesToTheBudget) {
  std::string raw;
  for (int i = 0; i < 50; ++i) raw += "Beethoven wrote one more piece of music today. ";
  auto s = finalize_summary(raw, "Beethoven", 30);
  EXPECT_LE(text::estimate_tokens(s), 30.0);
  EXPECT_EQ(s.back(), '.');
}

TEST(Profile, SectionedDocument) {
  auto sections = parse_sectioned_document("# Name\nIntro text\n## Life\nBorn.\n## Works\nMany.\n");
  ASSERT_EQ(sections.size(), 3u);
  EXPECT_EQ(sections[0].title, "Introduction");
  EXPECT_EQ(sections[1].title, "Life");
  EXPECT_EQ(sections[2].body, "Many.");
}

TEST(Profile, MissingNameOrSectionsIsRejected) {
  testing::TempDir tmp;
  std::ofstream(tmp.path() / "profile.json") << R"({"language":"en"})";
  EXPECT_THROW(read_profile_dir(tmp.path(), "x"), ValidationError);
}

// Greedy packing is fully characterized by three properties: paragraphs
// stay in order, a segment exceeds the cap only when it holds a single
// paragraph, and the first paragraph of each segment did not fit into the
// previous one.
void expect_greedy(const std::vector<std::string>& paragraphs, const std::vector<LifeSegment>& segments,
                   std::size_t cap) {
  std::vector<std::vector<std::string>> groups;
  for (const auto& s : segments) groups.push_back(text::split_paragraphs(s.narrative));
  std::vector<std::string> flat;
  for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
  ASSERT_EQ(flat, paragraphs);
  auto chars = [](const std::vector<std::string>& g) {
    std::size_t n = 0;
    for (const auto& p : g) n += p.size();
    return n;
  };
  for (std::size_t i = 0; i < groups.size(); ++i) {
    ASSERT_FALSE(groups[i].empty());
    if (groups[i].size() > 1) {
      ASSERT_LE(chars(groups[i]), cap);
    }
    if (i > 0) {
      ASSERT_GT(chars(groups[i - 1]) + groups[i].front().size(), cap);
    }
    ASSERT_EQ(segments[i].segment_index, static_cast<int>(i));
  }
}

TEST(Segmenter, RandomSectionsSatisfyGreedyProperties) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> count(1, 25), words(1, 200);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> paragraphs;
    for (int p = count(rng); p > 0; --p) {
      std::string para;
      for (int w = words(rng); w > 0; --w) para += (para.empty() ? "" : " ") + std::string("word");
      paragraphs.push_back(para);
    }
    auto profile = testing::sample_profile();
    profile.sections = {{"Biography", text::join(paragraphs, "\n\n")}};
    std::size_t cap = 500 + static_cast<std::size_t>(trial) * 7;
    auto segments = segment_life_experience(profile, cap);
    expect_greedy(paragraphs, segments, cap);
    EXPECT_TRUE(invariant_violations(segments).empty());
  }
}

TEST(Segmenter, RejectsSmallCapAndMissingSection) {
  auto p = testing::sample_profile();
  EXPECT_THROW(segment_life_experience(p, 499), ValidationError);
  p.sections = {{"Works", "Many."}};
  EXPECT_THROW(segment_life_experience(p, 1500), ValidationError);
}

TEST(Segmenter, PeriodLabels) {
  EXPECT_EQ(period_label_for("In 1792 he moved; by 1795 he was famous.", 0), "1792-1795");
  EXPECT_EQ(period_label_for("In 1792 he moved.", 0), "1792");
  EXPECT_EQ(period_label_for("No years here, only 12345.", 2), "part 3");
}

TEST(Segmenter, FixtureProducesSeveralSegments) {
  auto src = read_profile_dir(testing::fixtures_dir() / "beethoven", "beethoven");
  auto segments = segment_life_experience(src.profile, 1500);
  EXPECT_GE(segments.size(), 3u);
  expect_greedy(text::split_paragraphs(src.profile.life_experience()->body), segments, 1500);
}

}  // namespace
}  // namespace rolekit
