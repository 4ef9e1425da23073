#include "rolekit/profile.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"
#include "rolekit/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rolekit {

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    if (ext == ".txt" || ext == ".md") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string title_from_stem(const fs::path& p) {
  auto stem = p.stem().string();
  // Drop a leading ordering prefix such as "01_" or "2-".
  std::size_t i = 0;
  while (i < stem.size() && std::isdigit(static_cast<unsigned char>(stem[i]))) ++i;
  if (i > 0 && i < stem.size() && (stem[i] == '_' || stem[i] == '-')) stem = stem.substr(i + 1);
  std::replace(stem.begin(), stem.end(), '_', ' ');
  return stem;
}

std::string heading_text(std::string_view line, std::string_view marker) {
  return text::trim(line.substr(marker.size()));
}

}  // namespace

std::vector<ProfileSection> parse_sectioned_document(std::string_view document) {
  std::vector<ProfileSection> sections;
  ProfileSection current{"Introduction", ""};
  auto flush = [&] {
    current.body = text::trim(current.body);
    if (!current.body.empty()) sections.push_back(current);
  };
  for (const auto& line : text::split_lines(document)) {
    if (line.rfind("## ", 0) == 0) {
      flush();
      current = ProfileSection{heading_text(line, "## "), ""};
      continue;
    }
    if (line.rfind("# ", 0) == 0 && sections.empty() && text::trim(current.body).empty()) continue;
    current.body += line;
    current.body.push_back('\n');
  }
  flush();
  return sections;
}

ProfileSource read_profile_dir(const fs::path& dir, std::string_view role_id) {
  validate_role_id(role_id);
  if (!fs::is_directory(dir)) throw ValidationError("profile directory not found: " + dir.string());

  ProfileSource src;
  auto& p = src.profile;
  p.role_id = std::string(role_id);

  if (fs::exists(dir / "profile.json")) {
    try {
      auto meta = json::parse(read_file(dir / "profile.json"));
      p.name = meta.value("name", std::string{});
      p.language = language_from_string(meta.value("language", std::string("en")));
      if (meta.contains("source_uri") && !meta["source_uri"].is_null()) {
        p.source_uri = meta["source_uri"].get<std::string>();
      }
      p.aliases = meta.value("aliases", std::vector<std::string>{});
    } catch (const json::exception& e) {
      throw ValidationError("profile.json: " + std::string(e.what()));
    }
  }

  if (fs::exists(dir / "profile.md")) {
    auto doc = read_file(dir / "profile.md");
    if (p.name.empty()) {
      for (const auto& line : text::split_lines(doc)) {
        if (line.rfind("# ", 0) == 0) {
          p.name = heading_text(line, "# ");
          break;
        }
      }
    }
    p.sections = parse_sectioned_document(doc);
  }

  for (const auto& file : sorted_files(dir / "sections")) {
    auto body = read_file(file);
    auto lines = text::split_lines(body);
    std::string title = title_from_stem(file);
    if (!lines.empty() && lines.front().rfind("## ", 0) == 0) {
      title = heading_text(lines.front(), "## ");
      body = body.substr(std::min(body.size(), lines.front().size() + 1));
    }
    p.sections.push_back({title, text::trim(body)});
  }

  if (fs::exists(dir / "summary.txt")) {
    p.summary = text::trim(read_file(dir / "summary.txt"));
    src.summary_supplied = true;
  }

  for (const auto& file : sorted_files(dir / "authentic")) {
    src.authentic_scripts.push_back({file.filename().string(), read_file(file)});
  }

  if (text::trim(p.name).empty()) {
    throw ValidationError("profile " + dir.string() + ": no name (profile.json \"name\" or a '# ' title)");
  }
  p.name = text::trim(p.name);
  if (p.sections.empty()) throw ValidationError("profile " + dir.string() + ": no sections found");
  return src;
}

std::string build_summary_prompt(const RoleProfile& profile, double token_budget) {
  auto words = static_cast<long>(std::floor(token_budget / 1.3));
  std::string out = "Summarize the following profile of " + profile.name + " in at most " +
                    std::to_string(words) +
                    " words. Keep the name " + profile.name +
                    ", the main story-line, relationships, personality traits and main skills. "
                    "Write plain prose without headings or lists.\n***\n";
  for (const auto& s : profile.sections) {
    out += "## " + s.title + "\n" + s.body + "\n\n";
  }
  return out;
}

std::string finalize_summary(std::string_view raw, std::string_view name, double token_budget) {
  auto summary = text::trim(raw);
  if (summary.find(name) == std::string::npos) summary = std::string(name) + ": " + summary;
  if (text::estimate_tokens(summary) <= token_budget) return summary;

  std::string kept;
  for (const auto& sentence : text::split_sentences(summary)) {
    auto candidate = kept.empty() ? sentence : kept + " " + sentence;
    if (text::estimate_tokens(candidate) > token_budget) break;
    kept = std::move(candidate);
  }
  if (kept.empty() || kept.find(name) == std::string::npos) {
    auto words = text::split_words(summary);
    auto limit = static_cast<std::size_t>(std::floor(token_budget / 1.3));
    words.resize(std::min(words.size(), limit));
    kept = text::join(words, " ");
  }
  return kept;
}

ProfileSource ingest_profile(const fs::path& dir, std::string_view role_id, Gateway* gateway,
                             double token_budget) {
  auto src = read_profile_dir(dir, role_id);
  auto& p = src.profile;
  if (!src.summary_supplied) {
    if (gateway == nullptr) {
      throw PreconditionError("profile " + dir.string() + " has no summary.txt and no backend to summarize");
    }
    auto raw = gateway->complete(as_user_message(build_summary_prompt(p, token_budget)),
                                 SamplingParams::generation());
    p.summary = finalize_summary(raw, p.name, token_budget);
    spdlog::info("summarized profile of {} ({} words)", p.name, text::word_count(p.summary));
  }
  throw_if_violated("profile " + p.role_id, invariant_violations(p, token_budget));
  return src;
}

}  // namespace rolekit
