#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>

#include "rolekit/error.hpp"
#include "rolekit/judge.hpp"
#include "rolekit/mock_backend.hpp"
#include "rolekit/report.hpp"
#include "support.hpp"

namespace rolekit {
namespace {

Transcript single(std::string id, std::string q = "Who are you?", std::string a = "A composer.") {
  return {std::move(id), "beethoven", "mock/m", TranscriptMode::single_turn, 1, {{std::move(q), std::move(a)}},
          std::nullopt, false, std::nullopt};
}

TEST(ParseVerdict, FinalIntegerLine) {
  auto v = parse_verdict("The agent stayed in character.\nIt used period vocabulary.\n\n6\n");
  EXPECT_EQ(v.score, 6);
  EXPECT_EQ(v.evidence, "The agent stayed in character.\nIt used period vocabulary.");
  EXPECT_EQ(parse_verdict("Good.\n**5**").score, 5);
  EXPECT_EQ(parse_verdict("7").evidence, "7");
}

TEST(ParseVerdict, OutOfRangeFinalLineIsAnError) {
  EXPECT_THROW(parse_verdict("Evidence.\n8"), ParseError);
  EXPECT_THROW(parse_verdict("Evidence.\n0"), ParseError);
  EXPECT_THROW(parse_verdict("Evidence.\n10"), ParseError);
}

TEST(ParseVerdict, RatiosAndTrailingSentences) {
  EXPECT_EQ(parse_verdict("Evidence here.\nScore: 4/7").score, 4);
  EXPECT_EQ(parse_verdict("Evidence here.\nI would rate this 3 out of 7.").score, 3);
  EXPECT_EQ(parse_verdict("Evidence.\nFinal score: 5\nThank you.").score, 5);
  // The ratio wins over a later stray number on the same scan window.
  EXPECT_EQ(parse_verdict("Evidence.\nScore 2/7 overall, 6 points of concern").score, 2);
}

TEST(ParseVerdict, Rejects) {
  EXPECT_THROW(parse_verdict(""), ParseError);
  EXPECT_THROW(parse_verdict("  \n "), ParseError);
  EXPECT_THROW(parse_verdict("No score at all."), ParseError);
  EXPECT_THROW(parse_verdict("Scored 7.5 on a ten point scale."), ParseError);
  EXPECT_THROW(parse_verdict("Score: 12/70"), ParseError);
}

// Any successfully parsed score lies in [1,7]; arbitrary text never crashes.
TEST(ParseVerdict, RandomTextProperty) {
  std::mt19937_64 rng(99);
  const std::string alphabet = "0123456789 /\n*.,abc out of7";
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    auto len = rng() % 40;
    for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    try {
      auto v = parse_verdict(s);
      EXPECT_GE(v.score, kMinScore) << s;
      EXPECT_LE(v.score, kMaxScore) << s;
      EXPECT_FALSE(v.evidence.empty());
    } catch (const ParseError&) {
    }
  }
}

TEST(JudgeVerdict, MakeValidates) {
  EXPECT_THROW(JudgeVerdict::make("t", "m", "e", 0, "r"), ValidationError);
  EXPECT_THROW(JudgeVerdict::make("t", "m", " ", 3, "r"), ValidationError);
  auto v = JudgeVerdict::make("t", "m", "e", 3, "r");
  EXPECT_EQ(nlohmann::json(v).get<JudgeVerdict>(), v);
}

TEST(JudgePrompt, FillsRubricSlots) {
  auto profile = testing::sample_profile();
  const auto& metric = builtin_metrics().front();
  auto prompt = build_judge_prompt(metric, profile, single("t1"))[0].content;
  EXPECT_NE(prompt.find(profile.summary), std::string::npos);
  EXPECT_NE(prompt.find("User: Who are you?\nLudwig van Beethoven: A composer."), std::string::npos);
  EXPECT_EQ(prompt.find("{interactions}"), std::string::npos);
  auto broken = single("t2");
  broken.incomplete = true;
  EXPECT_THROW(build_judge_prompt(metric, profile, broken), PreconditionError);
}

TEST(JudgeTranscripts, RetriesOnceWithNextSeed) {
  std::atomic<int> calls{0};
  auto backend = std::make_shared<CallbackBackend>("judge", "m", [&](const ChatRequest&) -> std::string {
    return ++calls == 1 ? "I refuse to give a number." : "Fine.\n5";
  });
  Gateway gw(backend);
  auto params = SamplingParams::judging();
  params.seed = 41;
  auto run = judge_transcripts(gw, {builtin_metrics().front()}, testing::sample_profile(), {single("t1")}, params);
  ASSERT_EQ(run.verdicts.size(), 1u);
  EXPECT_EQ(run.verdicts[0].score, 5);
  auto reqs = backend->log().requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].messages, reqs[1].messages);
  EXPECT_EQ(reqs[0].params.seed, 41);
  EXPECT_EQ(reqs[1].params.seed, 42);
  EXPECT_DOUBLE_EQ(reqs[0].params.temperature, 0.2);
  EXPECT_DOUBLE_EQ(reqs[0].params.top_p, 0.95);
}

TEST(JudgeTranscripts, FailuresBecomeUnjudged) {
  auto backend = std::make_shared<CallbackBackend>("judge", "m", [](const ChatRequest& r) -> std::string {
    auto p = prompt_text(r);
    if (p.find("Question two") != std::string::npos) throw TransportError("down", false);
    if (p.find("Question three") != std::string::npos) return "never a number";
    return "Evidence.\n4";
  });
  Gateway gw(backend);
  auto incomplete = single("t4");
  incomplete.incomplete = true;
  incomplete.incomplete_reason = "agent failed";
  std::vector<Transcript> ts{single("t1", "Question one"), single("t2", "Question two"),
                             single("t3", "Question three"), incomplete};
  auto metrics = std::vector<Metric>(builtin_metrics().begin(), builtin_metrics().begin() + 2);
  auto run = judge_transcripts(gw, metrics, testing::sample_profile(), ts, SamplingParams::judging(), 3);
  EXPECT_EQ(run.verdicts.size(), 2u);
  EXPECT_EQ(run.unjudged.size(), 6u);
  for (const auto& v : run.verdicts) EXPECT_EQ(v.transcript_ref, "t1");
  // t2: one call each; t3: two calls each; t1: one each; t4: none.
  EXPECT_EQ(backend->log().size(), 2u + 4u + 2u);

  auto dead = std::make_shared<CallbackBackend>("judge", "m", [](const ChatRequest&) -> std::string {
    throw TransportError("down", false);
  });
  Gateway dead_gw(dead);
  try {
    judge_transcripts(dead_gw, metrics, testing::sample_profile(), {single("t1")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::transport);
  }
}

// Means checked against an independent per-metric accumulation.
TEST(Aggregate, MeansMatchOracle) {
  std::mt19937_64 rng(5);
  std::vector<JudgeVerdict> verdicts;
  std::map<std::string, std::vector<int>> by_metric;
  std::vector<std::string> ids{"overall", "language", "zeta", "contextual", "alpha"};
  for (int i = 0; i < 997; ++i) {
    auto id = ids[rng() % ids.size()];
    int score = 1 + static_cast<int>(rng() % 7);
    verdicts.push_back(JudgeVerdict::make("t" + std::to_string(i), id, "e", score, ""));
    by_metric[id].push_back(score);
  }
  auto report = aggregate(verdicts, "m");
  std::vector<std::string> order;
  for (const auto& m : report.metrics) order.push_back(m.metric_id);
  EXPECT_EQ(order, (std::vector<std::string>{"contextual", "language", "overall", "alpha", "zeta"}));
  for (const auto& [id, scores] : by_metric) {
    double sum = 0;
    for (int s : scores) sum += s;
    const auto* m = report.find(id);
    ASSERT_NE(m, nullptr);
    EXPECT_NEAR(m->mean, sum / scores.size(), 1e-9);
    EXPECT_EQ(m->count, scores.size());
  }
  EXPECT_NEAR(*report.overall, report.find("overall")->mean, 0.0);

  std::shuffle(verdicts.begin(), verdicts.end(), rng);
  auto again = aggregate(verdicts, "m");
  for (std::size_t i = 0; i < again.metrics.size(); ++i) EXPECT_EQ(again.metrics[i], report.metrics[i]);
  EXPECT_THROW(aggregate({}, "m"), ValidationError);
}

TEST(Report, TableAndJson) {
  std::vector<JudgeVerdict> verdicts{JudgeVerdict::make("a", "contextual", "e", 5, ""),
                                     JudgeVerdict::make("b", "contextual", "e", 6, ""),
                                     JudgeVerdict::make("a", "language", "e", 2, "")};
  auto report = aggregate(verdicts, "m1");
  EXPECT_EQ(render_report_table(report),
            "model  contextual (n=2)  language (n=1)\n"
            "m1     5.50              2.00\n");
  auto j = report_to_json(report);
  EXPECT_EQ(j["model_id"], "m1");
  EXPECT_DOUBLE_EQ(j["metrics"][0]["mean"].get<double>(), 5.5);
  EXPECT_TRUE(j["overall"].is_null());
}

}  // namespace
}  // namespace rolekit
