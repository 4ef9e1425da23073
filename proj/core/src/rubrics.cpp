#include "rolekit/rubrics.hpp"

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"
#include "rolekit/types.hpp"
#include "rolekit/workspace.hpp"

namespace rolekit {

namespace {

constexpr const char* kHead =
    "You will be given responses written by an AI assistant mimicing the character {agent_name}. Your task is "
    "to rate the performance of {agent_name} using the specific criterion by following the evaluation steps. "
    "Below is the data:\n"
    "***\n"
    "Profile:\n"
    "{agent_context}\n"
    "***\n"
    "Interactions:\n"
    "{interactions}\n"
    "***\n"
    // The same criterion sentence heads all six rubrics; only the steps differ.
    "Is the current response fully integrated into the current dialogue scene, and does it correctly "
    "demonstrate the character's reactions and behaviors as they should be in that scene?\n"
    "[Evaluation Steps]\n"
    "1. Read the given character knowledge and background to get a clear understanding of the character.\n";

constexpr const char* kTail =
    "4. Score the AI on a scale of 1 to 7, where 7 is the highest score and 1 is the lowest.\n"
    "5. Follow the above steps for scoring. You will need to give evidence to justify the score you have "
    "given. Please do not give a score directly; you need to give evidence first, then reason about the "
    "current performance of the AI, and finally give a score.\n"
    "6. Finally, give the score in a new line. Note that you only need to give the number here and do not "
    "need to output any additional content.\n";

std::string rubric(const char* steps) { return std::string(kHead) + steps + kTail; }

}  // namespace

const std::vector<Metric>& builtin_metrics() {
  static const std::vector<Metric> metrics = {
      {"contextual", "Contextual",
       rubric("2. Carefully read the scene and dialogues in the given conversation, and then compare them with the "
              "character's introduction to find evidence that the AI mimics the character's reactions and "
              "behaviors.\n"
              "3. Compare the evidence found with the character's profile and check that the evidence found "
              "matches the character's integration in the scene of the dialogue. If the evidence shows that the "
              "character can integrate well into the current dialogue scene and can perfectly represent the "
              "reactions and behaviors that the character would correctly perform in that scene, give a high "
              "score. If all the evidence fails to prove this, give a low score.\n")},
      {"emotional", "Emotional",
       rubric("2. Carefully read the scenes and dialogues in the given interactions and then compare them with the "
              "character's profile to find evidence that the AI can express the character's personal charisma.\n"
              "3. Compare the evidence found with the character's profile. Check whether the evidence found is in "
              "line with the character, and give a high score if the current AI parody contains the character's "
              "emotions and can engage the participant's immersive input through the text, or a low score if all "
              "the evidence fails to demonstrate this.\n")},
      {"language", "Language",
       rubric("2. Carefully read the scenes and dialogues in the given interactions, and then compare them with the "
              "character's profile to find evidence that the AI can correctly imitate the character's language "
              "style, including vocabulary, sentence structure, and so on.\n"
              "3. Compare the found evidence with the character's profile. Check whether the found evidence is in "
              "line with the character's characteristics. Give a high score if the current AI's imitation is very "
              "much in line with the character's linguistic style, the vocabulary used is basically the same, and "
              "the sentence structure is exactly the same. Give a low score if all the evidence does not prove "
              "this.\n")},
      {"logical", "Logical",
       rubric("2. Carefully read the scenes and dialogues in the given interactions, and then compare them with the "
              "character's profile to find evidence that the AI is simulating the character's thinking during the "
              "dialogues, and identify the logic of the AI's thinking during the dialogues.\n"
              "3. Compare the evidence found with the character's profile. Check whether the evidence found is "
              "consistent with the character's thinking logic. If the current AI dialogue logic is consistent with "
              "the character's thinking logic, a high score will be given according to the degree of consistency. "
              "If all the evidence fails to prove this, a low score will be given.\n")},
      {"adaptability", "Adaptability",
       rubric("2. Carefully read the scenes and dialogues in the given interactions, and then compare them with the "
              "character's profile to find evidence of the AI's resilience to unexpected questions during the "
              "dialogues, and to determine how it reacts in the face of the character's unknown knowledge.\n"
              "3. Compare the evidence found with the character's profile. Check whether the AI answered questions "
              "that the character didn't know and whether its handling of unexpected situations was in line with "
              "the character's personality traits. Give the AI a high score if it didn't answer the unknown "
              "knowledge and handled the unexpected situation in line with the character's logic, and a low score "
              "if all the evidence doesn't prove this.\n")},
      {"overall", "Overall",
       rubric("2. Read through the scene and dialogue in the given conversation and then compare it to the "
              "character's profile. Put yourself in the user's shoes and consider how the current character is "
              "behaving, and try to find evidence that the current user might feel that it is not a real "
              "character.\n"
              "3. Compare the evidence found with the character's profile to check if the AI has been found not to "
              "be a real character. Give a high score if there is little evidence that the AI has been found not "
              "to be a real character and the user's experience feels good. Give a low score if the AI's answers "
              "can easily be seen not to be a real character.\n")},
  };
  return metrics;
}

std::vector<std::string> rubric_violations(std::string_view rubric_text) {
  std::vector<std::string> v;
  for (const char* slot : {"{agent_name}", "{agent_context}", "{interactions}"}) {
    if (rubric_text.find(slot) == std::string_view::npos) v.push_back(std::string("missing slot ") + slot);
  }
  if (!text::contains_icase(rubric_text, "scale of 1 to 7")) v.emplace_back("missing the 1 to 7 scale instruction");
  if (!text::contains_icase(rubric_text, "evidence first")) v.emplace_back("missing the evidence-first step");
  return v;
}

Metric load_rubric(const std::filesystem::path& path) {
  auto body = read_file(path);
  throw_if_violated("rubric " + path.string(), rubric_violations(body));
  auto id = path.stem().string();
  return {id, id, body};
}

std::vector<Metric> resolve_metrics(std::string_view selection, const std::filesystem::path& rubric_dir) {
  auto sel = text::trim(selection);
  if (sel.empty() || sel == "all") return builtin_metrics();
  std::vector<Metric> out;
  std::string id;
  auto take = [&] {
    auto t = text::trim(id);
    id.clear();
    if (t.empty()) return;
    for (const auto& m : builtin_metrics()) {
      if (m.metric_id == t) {
        out.push_back(m);
        return;
      }
    }
    if (!rubric_dir.empty() && std::filesystem::exists(rubric_dir / (t + ".txt"))) {
      out.push_back(load_rubric(rubric_dir / (t + ".txt")));
      return;
    }
    throw ValidationError("unknown metric '" + t + "'");
  };
  for (char c : sel) {
    if (c == ',') {
      take();
    } else {
      id.push_back(c);
    }
  }
  take();
  if (out.empty()) throw ValidationError("no metrics selected");
  return out;
}

}  // namespace rolekit
