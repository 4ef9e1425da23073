#include <gtest/gtest.h>

#include <random>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"
#include "rolekit/thought.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

TEST(Thought, StripsEchoQuotesAndMarkup) {
  auto t = parse_thought("**Ludwig (thinking):** 'The boy is late again.'", "Ludwig");
  EXPECT_EQ(t, (Turn{"Ludwig", Action::thinking, "The boy is late again."}));
  EXPECT_EQ(parse_thought("(thinking): Calm down.", "Ludwig").text, "Calm down.");
  EXPECT_EQ(parse_thought("Karl (thinking): not mine", "Ludwig").text, "Karl (thinking): not mine");
}

TEST(Thought, RejectsEmptyAndSpeakingAnswers) {
  EXPECT_THROW(parse_thought("  ", "Ludwig"), ParseError);
  EXPECT_THROW(parse_thought("Ludwig (thinking):", "Ludwig"), ParseError);
  EXPECT_THROW(parse_thought("Hm.\nLudwig (speaking): Go away.", "Ludwig"), ParseError);
}

TEST(Thought, TruncationKeepsTheLongestSentencePrefix) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> sentences(1, 8), words(1, 12), cap(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> parts;
    for (int s = sentences(rng); s > 0; --s) {
      std::string sentence;
      for (int w = words(rng); w > 0; --w) sentence += (sentence.empty() ? "" : " ") + std::string("word");
      parts.push_back(sentence + ".");
    }
    auto input = text::join(parts, " ");
    auto max = static_cast<std::size_t>(cap(rng));
    auto got = truncate_at_sentence(input, max);

    // Enumerate prefixes from the longest down.
    std::string expected;
    for (auto k = parts.size(); k > 0; --k) {
      std::vector<std::string> prefix(parts.begin(), parts.begin() + static_cast<std::ptrdiff_t>(k));
      auto candidate = text::join(prefix, " ");
      if (text::word_count(candidate) <= max) {
        expected = candidate;
        break;
      }
    }
    if (expected.empty()) {
      auto w = text::split_words(input);
      w.resize(max);
      expected = text::join(w, " ");
    }
    ASSERT_EQ(got, expected) << input << " / " << max;
    ASSERT_LE(text::word_count(got), max);
  }
}

DialoguePair pair() {
  DialoguePair p;
  p.pair_id = "d-p01";
  p.dialogue_ref = "d";
  p.scene_ref = "s";
  p.role_name = "Ludwig van Beethoven";
  p.trigger = {"Karl", Action::speaking, "Uncle?"};
  p.response = {"Ludwig van Beethoven", Action::speaking, "Yes."};
  return p;
}

TEST(Thought, AnnotationIsWriteOnce) {
  auto annotated = annotate_pair(pair(), {"Ludwig van Beethoven", Action::thinking, "Hm."});
  EXPECT_TRUE(annotated.thought);
  EXPECT_THROW(annotate_pair(annotated, {"Ludwig van Beethoven", Action::thinking, "Again."}), PreconditionError);
  EXPECT_THROW(annotate_pair(pair(), {"Karl", Action::thinking, "Hm."}), ValidationError);
  EXPECT_THROW(annotate_pair(pair(), {"Ludwig van Beethoven", Action::speaking, "Hm."}), ValidationError);
  EXPECT_EQ(unannotated_pairs({pair(), annotated}), std::vector<std::string>{"d-p01"});
}

TEST(Thought, PromptShowsSpeakingContextOnly) {
  auto profile = testing::sample_profile();
  Scene scene{"s", "beethoven", SceneOrigin::segment_derived, 0, "Vienna", "Night.", {}};
  auto p = pair();
  p.context = {{"Karl", Action::speaking, "Early words."}};
  auto prompt = build_thought_prompt(profile, scene, p)[0].content;
  EXPECT_NE(prompt.find("Karl (speaking): Early words."), std::string::npos);
  EXPECT_NE(prompt.find("Location: Vienna"), std::string::npos);
  EXPECT_EQ(prompt.substr(prompt.size() - 32), "Ludwig van Beethoven (thinking):");
  auto done = annotate_pair(p, {profile.name, Action::thinking, "x"});
  EXPECT_THROW(build_thought_prompt(profile, scene, done), PreconditionError);
}

}  // namespace
}  // namespace rolekit
