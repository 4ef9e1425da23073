#include "rolekit/hallucination.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <regex>

#include "rolekit/digest.hpp"
#include "rolekit/error.hpp"
#include "rolekit/prompt_template.hpp"
#include "rolekit/text.hpp"
#include "rolekit/workspace.hpp"

namespace rolekit {

namespace {

constexpr const char* kProbeTemplate =
    "Summary of {agent_name}:\n"
    "{summary1}\n"
    "***\n"
    "Recently a group of {agent_name} imitators have appeared on the Internet, and you are so disgusted "
    "that you wish to dismantle them by inducing the person to say something beyond {agent_name}'s "
    "knowledge. Next, please write {probe_phrase} that will lead them to make a mistake.\n"
    "1. Every question must draw on one of these topics that lie beyond {agent_name}'s knowledge: {topics}.\n"
    "2. Do not ask directly whether they know the thing (for example \"Do you know what an airplane "
    "is?\"). Ask in an indirect manner, weaving the unknown thing into a familiar event from "
    "{agent_name}'s life as if it were ordinary, in the style of: \"Maestro, your Ninth Symphony is a "
    "marvel. Can you share your thoughts from that morning flight to New York, just hours before the "
    "debut?\"\n"
    "3. Address {agent_name} directly, as someone talking to them would.\n"
    "4. Use the following format, one question per item, starting with its topic in brackets.\n"
    "Example format.\n"
    "1. [topic] Question ...\n"
    "2. [topic] Question ...\n";

constexpr std::array<const char*, 3> kRefusalsEn = {
    "I am unfamiliar with the thing you describe. I have never seen or heard of it, so I cannot speak to "
    "it. Ask me instead about the life I have known.",
    "Forgive me, but I have never heard of such a thing and I am unfamiliar with it. Let us speak of "
    "matters from my own days instead.",
    "I do not know what you mean. It is nothing I have ever encountered, and I will not pretend "
    "otherwise. Perhaps you would ask me of something from my own time.",
};

constexpr std::array<const char*, 2> kRefusalsZh = {
    "\xE6\x88\x91\xE5\xAF\xB9\xE4\xBD\xA0\xE8\xAF\xB4\xE7\x9A\x84\xE8\xBF\x99\xE4\xB8\xAA\xE4\xB8\x9C"
    "\xE8\xA5\xBF\xE5\xB9\xB6\xE4\xB8\x8D\xE7\x86\x9F\xE6\x82\x89\xEF\xBC\x8C\xE4\xBB\x8E\xE6\x9C\xAA"
    "\xE8\xA7\x81\xE8\xBF\x87\xE3\x80\x82\xE6\x88\x91\xE4\xBB\xAC\xE8\xBF\x98\xE6\x98\xAF\xE8\x81\x8A"
    "\xE8\x81\x8A\xE6\x88\x91\xE7\xBB\x8F\xE5\x8E\x86\xE8\xBF\x87\xE7\x9A\x84\xE4\xBA\x8B\xE6\x83\x85"
    "\xE5\x90\xA7\xE3\x80\x82",  // 我对你说的这个东西并不熟悉，从未见过。我们还是聊聊我经历过的事情吧。
    "\xE6\x81\x95\xE6\x88\x91\xE7\x9B\xB4\xE8\xA8\x80\xEF\xBC\x8C\xE6\x88\x91\xE4\xB8\x8D\xE7\x9F\xA5"
    "\xE9\x81\x93\xE4\xBD\xA0\xE8\xAF\xB4\xE7\x9A\x84\xE6\x98\xAF\xE4\xBB\x80\xE4\xB9\x88\xE3\x80\x82"
    "\xE8\xAF\xB7\xE9\x97\xAE\xE4\xBA\x9B\xE6\x88\x91\xE7\x86\x9F\xE6\x82\x89\xE7\x9A\x84\xE4\xBA\x8B"
    "\xE6\x83\x85\xE5\x90\xA7\xE3\x80\x82",  // 恕我直言，我不知道你说的是什么。请问些我熟悉的事情吧。
};

constexpr std::array<const char*, 2> kRationalesEn = {
    "This question speaks of something I have never encountered. I should not pretend to know it, and "
    "say plainly that it is unfamiliar to me.",
    "The question takes for granted a thing I have never seen or heard of. Better to admit I do not know "
    "it than to invent an answer.",
};

constexpr const char* kRationaleZh =
    "\xE8\xBF\x99\xE4\xB8\xAA\xE9\x97\xAE\xE9\xA2\x98\xE6\x8F\x90\xE5\x88\xB0\xE7\x9A\x84\xE4\xB8\x9C"
    "\xE8\xA5\xBF\xE6\x88\x91\xE4\xBB\x8E\xE6\x9C\xAA\xE8\xA7\x81\xE8\xBF\x87\xEF\xBC\x8C\xE4\xB8\x8D"
    "\xE8\x83\xBD\xE5\x81\x87\xE8\xA3\x85\xE7\x9F\xA5\xE9\x81\x93\xE3\x80\x82";  // 这个问题提到的东西我从未见过，不能假装知道。

std::size_t digest_choice(std::string_view id, std::size_t n) {
  auto hex = sha256_hex(id).substr(0, 8);
  return static_cast<std::size_t>(std::stoul(hex, nullptr, 16)) % n;
}

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

// Case-insensitive term match on word boundaries.
bool contains_term(std::string_view haystack, std::string_view term) {
  auto h = text::casefold(haystack);
  auto t = text::casefold(text::trim(term));
  if (t.empty()) return false;
  std::size_t pos = 0;
  while ((pos = h.find(t, pos)) != std::string::npos) {
    bool left = pos == 0 || !is_word_byte(h[pos - 1]);
    auto end = pos + t.size();
    // Allow simple plurals ("planes").
    if (end < h.size() && h[end] == 's') ++end;
    bool right = end >= h.size() || !is_word_byte(h[end]);
    if (left && right) return true;
    ++pos;
  }
  return false;
}

bool has_negation(std::string_view sentence) {
  if (contains_unfamiliarity_statement(sentence)) return true;
  for (const char* w : {"never", "not", "no", "nothing", "cannot"}) {
    if (contains_term(sentence, w)) return true;
  }
  return false;
}

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

}  // namespace

std::vector<std::string> TopicLexicon::names() const {
  std::vector<std::string> out;
  for (const auto& t : topics) out.push_back(t.name);
  return out;
}

const TopicLexicon::Topic* TopicLexicon::find(std::string_view name) const {
  for (const auto& t : topics) {
    if (text::casefold(t.name) == text::casefold(text::trim(name))) return &t;
  }
  return nullptr;
}

TopicLexicon parse_topic_lexicon(std::string_view content) {
  TopicLexicon lex;
  auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("topic lexicon line " + std::to_string(i + 1) + ": expected topic<TAB>terms");
    }
    TopicLexicon::Topic topic{text::trim(lines[i].substr(0, tab)), {}};
    if (topic.name.empty()) throw ValidationError("topic lexicon line " + std::to_string(i + 1) + ": empty topic");
    std::string term;
    for (char c : lines[i].substr(tab + 1) + ",") {
      if (c == ',') {
        if (auto t = text::trim(term); !t.empty()) topic.terms.push_back(text::casefold(t));
        term.clear();
      } else {
        term.push_back(c);
      }
    }
    lex.topics.push_back(std::move(topic));
  }
  if (lex.topics.empty()) throw ValidationError("topic lexicon is empty");
  return lex;
}

TopicLexicon load_topic_lexicon(const std::filesystem::path& path) { return parse_topic_lexicon(read_file(path)); }

std::vector<ChatMessage> build_probe_prompt(const RoleProfile& profile, const std::vector<std::string>& topics,
                                            int probe_count) {
  if (probe_count < 1) throw ValidationError("probe_count must be >= 1");
  std::vector<std::string> cleaned;
  for (const auto& t : topics) {
    if (auto c = text::trim(t); !c.empty()) cleaned.push_back(c);
  }
  if (cleaned.empty()) throw ValidationError("probe prompt needs at least one anachronism topic");
  auto phrase = std::to_string(probe_count) + (probe_count == 1 ? " question" : " questions");
  return as_user_message(render_template(kProbeTemplate, {{"agent_name", profile.name},
                                                          {"summary1", profile.summary},
                                                          {"probe_phrase", phrase},
                                                          {"topics", text::join(cleaned, ", ")}}));
}

bool is_direct_question(std::string_view question) {
  static const std::regex direct(
      R"(^\W*(do you (know|understand) (what|who|about)|have you (ever )?heard (of|about)|are you familiar with)\b)",
      std::regex::icase);
  return std::regex_search(std::string(question), direct);
}

ProbeParseResult parse_probes(std::string_view completion, const RoleProfile& profile, const TopicLexicon& lexicon,
                              const ProbeParseOptions& options) {
  static const std::regex item(R"(^\s*\**\s*(\d+)\s*[.):]\s*(.+)$)");
  static const std::regex tag(R"(^\s*\[([^\]]+)\]\s*(.*)$)");

  std::vector<std::string> items;
  for (const auto& line : text::split_lines(completion)) {
    std::smatch m;
    if (std::regex_match(line, m, item)) {
      items.push_back(text::trim(m[2].str()));
    } else if (!items.empty() && !text::trim(line).empty()) {
      items.back() += " " + text::trim(line);
    }
  }
  if (items.empty()) throw ParseError("no numbered questions in completion", std::string(completion));

  ProbeParseResult result;
  for (std::size_t i = 0; i < items.size(); ++i) {
    HallucinationProbe probe;
    probe.probe_id = profile.role_id + "-probe" + two_digits(i + 1);
    probe.role_id = profile.role_id;
    std::string question = items[i];
    std::smatch m;
    if (std::regex_match(question, m, tag)) {
      probe.anachronism_topic = text::trim(m[1].str());
      question = m[2].str();
    }
    std::string stripped;
    for (char c : question) {
      if (c != '*') stripped.push_back(c);
    }
    probe.question = text::trim(stripped);
    if (probe.question.size() >= 2 && probe.question.front() == '"' && probe.question.back() == '"') {
      probe.question = text::trim(probe.question.substr(1, probe.question.size() - 2));
    }
    if (probe.question.empty()) {
      result.warnings.push_back("item " + std::to_string(i + 1) + " is empty");
      continue;
    }
    if (const auto* t = lexicon.find(probe.anachronism_topic)) {
      probe.anachronism_topic = t->name;
    } else {
      std::string found;
      for (const auto& t : lexicon.topics) {
        if (std::any_of(t.terms.begin(), t.terms.end(),
                        [&](const std::string& term) { return contains_term(probe.question, term); })) {
          found = t.name;
          break;
        }
      }
      if (found.empty()) {
        result.warnings.push_back(probe.probe_id + ": no lexicon topic matched");
        found = probe.anachronism_topic.empty() ? "unspecified" : probe.anachronism_topic;
      }
      probe.anachronism_topic = found;
    }
    probe.direct = is_direct_question(probe.question);
    if (probe.direct) {
      result.direct_ids.push_back(probe.probe_id);
      result.warnings.push_back(probe.probe_id + ": direct question kept (sideways phrasing requested)");
    }
    probe.refusal = render_refusal(profile, probe);
    if (options.with_rationale) probe.rationale = render_refusal_rationale(profile, probe);
    result.probes.push_back(std::move(probe));
  }
  if (result.probes.empty()) throw ParseError("every numbered item was empty", std::string(completion));
  for (const auto& w : result.warnings) spdlog::warn("{}", w);
  return result;
}

std::string render_refusal(const RoleProfile& profile, const HallucinationProbe& probe,
                           std::optional<std::size_t> template_choice) {
  if (profile.language == Language::zh) {
    auto i = template_choice.value_or(digest_choice(probe.probe_id, kRefusalsZh.size())) % kRefusalsZh.size();
    return kRefusalsZh[i];
  }
  auto i = template_choice.value_or(digest_choice(probe.probe_id, kRefusalsEn.size())) % kRefusalsEn.size();
  return kRefusalsEn[i];
}

std::string render_refusal_rationale(const RoleProfile& profile, const HallucinationProbe& probe) {
  if (profile.language == Language::zh) return kRationaleZh;
  return kRationalesEn[digest_choice(probe.probe_id + "/rationale", kRationalesEn.size())];
}

RefusalCheck validate_refusal(std::string_view refusal, const std::vector<std::string>& terms) {
  RefusalCheck check;
  if (!contains_unfamiliarity_statement(refusal)) {
    check.passed = false;
    check.reasons.emplace_back("no unfamiliarity statement");
  }
  for (const auto& sentence : text::split_sentences(refusal)) {
    for (const auto& term : terms) {
      if (contains_term(sentence, term) && !has_negation(sentence)) {
        check.passed = false;
        check.reasons.push_back("term '" + term + "' used affirmatively: " + sentence);
      }
    }
  }
  return check;
}

std::size_t max_probe_records(std::size_t dialogue_records, double cap) {
  if (!(cap >= 0.0 && cap < 1.0)) throw ValidationError("probe share cap must be in [0,1)");
  auto bound = cap * static_cast<double>(dialogue_records) / (1.0 - cap);
  auto n = static_cast<std::size_t>(std::floor(bound + 1e-9));
  // Guard the floating bound against the exact ratio.
  while (n > 0 && static_cast<double>(n) > cap * static_cast<double>(n + dialogue_records) + 1e-12) --n;
  return n;
}

std::vector<HallucinationProbe> cap_probes(std::vector<HallucinationProbe> probes, std::size_t dialogue_records,
                                           double cap) {
  std::sort(probes.begin(), probes.end(),
            [](const HallucinationProbe& a, const HallucinationProbe& b) { return a.probe_id < b.probe_id; });
  auto keep = std::min(probes.size(), max_probe_records(dialogue_records, cap));
  probes.resize(keep);
  return probes;
}

}  // namespace rolekit
