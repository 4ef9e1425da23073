#include <gtest/gtest.h>

#include <random>

#include "rolekit/dialogue.hpp"
#include "rolekit/error.hpp"
#include "rolekit/text.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

ScriptParseOptions opts(std::string id = "d1") {
  ScriptParseOptions o;
  o.dialogue_id = std::move(id);
  o.role_id = "beethoven";
  o.scene_ref = "s1";
  o.aliases = {"Beethoven"};
  o.min_words = 10;
  return o;
}

TEST(ParseScript, ReadsHeadersContinuationsAndAliases) {
  const char* completion =
      "Scene:\nLocation: Vienna\n[Dialogues]:\n"
      "**Karl (speaking):** Uncle, the rent.\n"
      "It is late.\n"
      "Beethoven (thinking)\n"
      "Money again.\n"
      "ludwig van beethoven (speaking): Tell her Friday.\n";
  auto parsed = parse_script(completion, "Ludwig van Beethoven", opts());
  const auto& turns = parsed.dialogue.turns();
  ASSERT_EQ(turns.size(), 3u);
  EXPECT_EQ(turns[0], (Turn{"Karl", Action::speaking, "Uncle, the rent.\nIt is late."}));
  EXPECT_EQ(turns[1], (Turn{"Ludwig van Beethoven", Action::thinking, "Money again."}));
  EXPECT_EQ(turns[2].speaker, "Ludwig van Beethoven");
  EXPECT_EQ(parsed.preamble, "Scene:\nLocation: Vienna");
  EXPECT_EQ(parsed.word_count, 11u);
  EXPECT_FALSE(parsed.short_script);
}

TEST(ParseScript, FullWidthMarkers) {
  auto parsed = parse_script("卡尔（speaking）：叔叔。\n贝多芬（speaking）：好。\n", "贝多芬", opts());
  ASSERT_EQ(parsed.dialogue.turns().size(), 2u);
  EXPECT_EQ(parsed.dialogue.turns()[1].text, "好。");
}

TEST(ParseScript, ShortScriptsAreFlagged) {
  auto parsed = parse_script("Karl (speaking): Hi.\nBeethoven (speaking): Hello.\n", "Ludwig van Beethoven", opts());
  EXPECT_TRUE(parsed.short_script);
  EXPECT_FALSE(parsed.warnings.empty());
}

TEST(ParseScript, Errors) {
  EXPECT_THROW(parse_script("No turns at all.", "Ludwig", opts()), ParseError);
  EXPECT_THROW(parse_script("Ludwig (speaking): I start.\nKarl (speaking): Hm.", "Ludwig", opts()), ValidationError);
  EXPECT_THROW(parse_script("Karl (speaking): a\nKarl (thinking): b\nLudwig (speaking): c", "Ludwig", opts()),
               ValidationError);
}

TEST(ExtractPairs, MergesRoleRunsAndRecordsContinuation) {
  auto d = Dialogue::create("d1", "r", "L", std::string("s1"), DialogueOrigin::mimic,
                            {{"K", Action::speaking, "a"},
                             {"L", Action::thinking, "t1"},
                             {"L", Action::speaking, "b"},
                             {"L", Action::speaking, "c"},
                             {"S", Action::speaking, "d"},
                             {"K", Action::speaking, "e"},
                             {"L", Action::speaking, "f"}});
  auto pairs = extract_pairs(d);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].pair_id, "d1-p01");
  EXPECT_TRUE(pairs[0].context.empty());
  EXPECT_EQ(pairs[0].thought->text, "t1");
  EXPECT_EQ(pairs[0].response.text, "b\nc");
  EXPECT_EQ(pairs[0].continuation->text, "d");
  EXPECT_EQ(pairs[1].trigger.text, "e");
  EXPECT_EQ(pairs[1].context.size(), 5u);
  EXPECT_FALSE(pairs[1].thought);
  EXPECT_FALSE(pairs[1].continuation);
  for (const auto& p : pairs) EXPECT_TRUE(invariant_violations(p).empty());
}

TEST(ExtractPairs, RandomScriptsMatchLinearScanOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    auto script = testing::random_script(rng);
    auto id = "d" + std::to_string(i);
    auto o = opts(id);
    o.aliases.clear();
    o.min_words = 0;
    auto parsed = parse_script(testing::render_synthetic(script), script.role_name, o);
    ASSERT_EQ(parsed.dialogue.turns(), script.turns);
    ASSERT_EQ(extract_pairs(parsed.dialogue), testing::oracle_pairs(script.turns, script.role_name, id, "s1"));
  }
}

TEST(ExtractPairs, RenderedScriptReparsesToTheSameTurns) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto script = testing::random_script(rng);
    auto d = Dialogue::create("d", "r", script.role_name, std::nullopt, DialogueOrigin::mimic, script.turns);
    auto o = opts();
    o.aliases.clear();
    auto again = parse_script(render_script(d), script.role_name, o);
    ASSERT_EQ(again.dialogue.turns(), d.turns());
  }
}

Dialogue exemplar(std::size_t words, int n) {
  std::string text;
  for (std::size_t i = 0; i < words; ++i) text += "w ";
  return Dialogue::create("a" + std::to_string(n), "r", "L", std::nullopt, DialogueOrigin::authentic,
                          {{"K", Action::speaking, text}, {"L", Action::speaking, "ok"}});
}

TEST(SelectExemplars, SatisfiesGreedyDefinitionOnRandomInputs) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> words(1, 60), count(0, 8), cap(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Dialogue> ex;
    for (auto n = count(rng); n > 0; --n) ex.push_back(exemplar(words(rng), static_cast<int>(ex.size())));
    auto max = cap(rng);
    double budget = 20.0 + trial % 90;
    auto kept = select_exemplars(ex, max, budget);

    // Definition: walk in order; an exemplar is taken iff the slot count is
    // not exhausted and it fits beside everything taken before it.
    std::vector<std::size_t> expected;
    double used = 0;
    for (std::size_t i = 0; i < ex.size(); ++i) {
      double cost = text::estimate_tokens(render_script(ex[i]));
      if (expected.size() < max && used + cost <= budget) {
        expected.push_back(i);
        used += cost;
      }
    }
    ASSERT_EQ(kept, expected);
  }
}

TEST(DialoguePrompt, IncludesFootageExemplarsAndFormat) {
  auto profile = testing::sample_profile();
  Scene scene{"s1", "beethoven", SceneOrigin::segment_derived, 0, "Vienna", "A rainy night.", {}};
  auto ex = Dialogue::create("a1", "beethoven", profile.name, std::nullopt, DialogueOrigin::authentic,
                             {{"Karl", Action::speaking, "Uncle?"}, {profile.name, Action::speaking, "Yes."}});
  DialoguePromptOptions o;
  o.footage = "Born in Bonn.";
  auto prompt = build_dialogue_prompt(profile, scene, {ex}, o)[0].content;
  EXPECT_NE(prompt.find("Footage:\nBorn in Bonn."), std::string::npos);
  EXPECT_NE(prompt.find("Karl (speaking): Uncle?"), std::string::npos);
  EXPECT_NE(prompt.find("Location: Vienna"), std::string::npos);
  EXPECT_NE(prompt.find("at least 500 words"), std::string::npos);
  EXPECT_EQ(prompt.find("{agent_name}"), std::string::npos);

  auto mimic = Dialogue::create("m1", "beethoven", profile.name, std::nullopt, DialogueOrigin::mimic,
                                {{"Karl", Action::speaking, "Uncle?"}, {profile.name, Action::speaking, "Yes."}});
  EXPECT_THROW(build_dialogue_prompt(profile, scene, {mimic}, {}), PreconditionError);
}

}  // namespace
}  // namespace rolekit
