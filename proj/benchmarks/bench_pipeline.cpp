#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <random>

#include "rolekit/dialogue.hpp"
#include "rolekit/judge.hpp"
#include "rolekit/trainset.hpp"
#include "support.hpp"

namespace {

using namespace rolekit;

std::vector<testing::SyntheticScript> scripts(std::size_t n) {
  std::mt19937_64 rng(11);
  std::vector<testing::SyntheticScript> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::random_script(rng));
  return out;
}

ScriptParseOptions parse_options() {
  ScriptParseOptions o;
  o.dialogue_id = "bench";
  o.role_id = "beethoven";
  o.origin = DialogueOrigin::mimic;
  o.min_words = 0;
  return o;
}

void BM_ParseScript(benchmark::State& state) {
  spdlog::set_level(spdlog::level::off);
  auto all = scripts(64);
  std::vector<std::string> rendered;
  std::size_t bytes = 0;
  for (const auto& s : all) {
    rendered.push_back(testing::render_synthetic(s));
    bytes += rendered.back().size();
  }
  auto o = parse_options();
  for (auto _ : state) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      benchmark::DoNotOptimize(parse_script(rendered[i], all[i].role_name, o));
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_ParseScript);

void BM_ExtractPairs(benchmark::State& state) {
  std::vector<Dialogue> dialogues;
  for (const auto& s : scripts(256)) {
    dialogues.push_back(Dialogue::create("d", "beethoven", s.role_name, std::string("s1"), DialogueOrigin::mimic, s.turns));
  }
  for (auto _ : state) {
    for (const auto& d : dialogues) benchmark::DoNotOptimize(extract_pairs(d));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * dialogues.size()));
}
BENCHMARK(BM_ExtractPairs);

void BM_OrderAndSerialize(benchmark::State& state) {
  std::vector<TrainRecord> records;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    records.push_back({"r" + std::to_string(i), RecordKind::dialogue, "I want you to act like Ludwig van Beethoven.",
                       "", "Ludwig van Beethoven (speaking):'Line " + std::to_string(i) + ".'<|endoftext|>"});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(serialize_trainset(order_records(records, 7)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OrderAndSerialize)->Arg(1000)->Arg(10000);

void BM_ParseVerdict(benchmark::State& state) {
  const std::string text =
      "The agent keeps the period vocabulary and answers in the first person.\n"
      "It does not mention anything the character could not know.\n\nScore: 6/7\nThank you.";
  for (auto _ : state) benchmark::DoNotOptimize(parse_verdict(text));
}
BENCHMARK(BM_ParseVerdict);

}  // namespace

BENCHMARK_MAIN();
