#include <gtest/gtest.h>

#include <random>

#include "rolekit/error.hpp"
#include "rolekit/scenario.hpp"
#include "rolekit/text.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

TEST(Scenario, ParsesNumberedBlocksInSeveralStyles) {
  const char* completion =
      "Here are the scenes.\n"
      "**Scene 1.**\n"
      "Location: A coffee house in Vienna\n"
      "Background: A rainy afternoon.\n"
      "Characters: Karl, Schindler and a waiter\n"
      "\n"
      "Scene 2:\n"
      "Location ...\n"
      "The Theater an der Wien\n"
      "Detailed background: The premiere of Fidelio.\n"
      "### Scene 3\n"
      "Location: Bonn\n";
  SceneParseOptions opts{"r", SceneOrigin::segment_derived, 4, "r-seg04", 3};
  auto result = parse_scenes(completion, opts);
  ASSERT_EQ(result.scenes.size(), 2u);
  EXPECT_TRUE(result.shortfall);
  EXPECT_EQ(result.scenes[0].scene_id, "r-seg04-scene01");
  EXPECT_EQ(result.scenes[0].location, "A coffee house in Vienna");
  EXPECT_EQ(result.scenes[0].participants, (std::vector<std::string>{"Karl", "Schindler", "a waiter"}));
  EXPECT_EQ(result.scenes[1].location, "The Theater an der Wien");
  EXPECT_EQ(result.scenes[1].background, "The premiere of Fidelio.");
  EXPECT_EQ(result.scenes[1].segment_ref, 4);
  EXPECT_EQ(result.warnings.size(), 2u);  // dropped scene 3 and the shortfall
}

TEST(Scenario, NoHeadersIsAParseError) {
  SceneParseOptions opts{"r", SceneOrigin::segment_derived, 0, "p", 1};
  EXPECT_THROW(parse_scenes("Just prose about Vienna.", opts), ParseError);
}

TEST(Scenario, PromptsCarryTheirSlots) {
  auto profile = testing::sample_profile();
  LifeSegment seg{"beethoven", 0, "1770", "Born in Bonn."};
  auto prompt = build_segment_scene_prompt(profile, seg, 1)[0].content;
  EXPECT_NE(prompt.find("Born in Bonn."), std::string::npos);
  EXPECT_NE(prompt.find("design 1 scene that"), std::string::npos);
  EXPECT_NE(prompt.find(profile.summary), std::string::npos);
  EXPECT_THROW(build_segment_scene_prompt(profile, seg, 0), ValidationError);

  auto mimic = Dialogue::create("d", "beethoven", profile.name, std::nullopt, DialogueOrigin::mimic,
                                {{"Karl", Action::speaking, "Hi"}, {profile.name, Action::speaking, "Yes"}});
  EXPECT_THROW(build_real_dialogue_scene_prompt(profile, mimic), PreconditionError);
}

// Oracle: normalize both texts to space-joined lowercase tokens without edge
// punctuation and search each 6-word window of a turn as a padded substring.
std::string normalized(const std::string& s) {
  std::string out = " ";
  for (auto w : text::split_words(s)) {
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.front()))) w.erase(0, 1);
    while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back()))) w.pop_back();
    if (w.empty()) continue;
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out += w + " ";
  }
  return out;
}

bool oracle_leaks(const std::string& background, const std::vector<Turn>& turns) {
  auto bg = normalized(background);
  for (const auto& t : turns) {
    auto words = text::split_words(normalized(t.text));
    for (std::size_t i = 0; i + kLeakWindowWords <= words.size(); ++i) {
      std::string window = " ";
      for (std::size_t k = 0; k < kLeakWindowWords; ++k) window += words[i + k] + " ";
      if (bg.find(window) != std::string::npos) return true;
    }
  }
  return false;
}

TEST(Scenario, LeakCheckMatchesSubstringOracle) {
  const std::vector<std::string> vocab{"the", "rent", "is", "late", "Uncle,", "Karl!", "music", "Vienna.",
                                       "tonight", "we", "play"};
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1), len(0, 14);
  auto sentence = [&] {
    std::string s;
    for (auto n = len(rng) + 1; n > 0; --n) s += (s.empty() ? "" : " ") + vocab[pick(rng)];
    return s;
  };
  int leaks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Turn> turns{{"Karl", Action::speaking, sentence()}, {"Ludwig", Action::speaking, sentence()}};
    auto d = Dialogue::create("d", "r", "Ludwig", std::nullopt, DialogueOrigin::authentic, turns);
    Scene scene{"s", "r", SceneOrigin::real_dialogue_derived, std::nullopt, "Vienna",
                sentence() + " " + (trial % 3 == 0 ? turns[trial % 2].text : sentence()), {}};
    auto check = validate_scene_against_dialogue(scene, d);
    bool expected = oracle_leaks(scene.background, turns);
    ASSERT_EQ(!check.passed, expected) << scene.background;
    leaks += expected;
  }
  EXPECT_GT(leaks, 10);  // the corpus exercises both outcomes
}

TEST(Scenario, LeakCheckReportsSpans) {
  auto d = Dialogue::create("d", "r", "Ludwig", std::nullopt, DialogueOrigin::authentic,
                            {{"Karl", Action::speaking, "Uncle, the landlady says the rent is late again."},
                             {"Ludwig", Action::speaking, "Tell her Friday."}});
  Scene scene{"s", "r", SceneOrigin::real_dialogue_derived, std::nullopt, "Vienna",
              "Karl arrives: THE LANDLADY SAYS THE RENT IS LATE, he reports.", {}};
  auto check = validate_scene_against_dialogue(scene, d);
  EXPECT_FALSE(check.passed);
  ASSERT_FALSE(check.offending_spans.empty());
  EXPECT_EQ(check.offending_spans[0], "the landlady says the rent is");
}

}  // namespace
}  // namespace rolekit
