#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rolekit/gateway.hpp"
#include "rolekit/types.hpp"

namespace rolekit {

struct AuthenticScript {
  std::string source_name;
  std::string text;
};

/// Raw profile material read from a local directory.
///
/// Layout (every file optional except that a name and at least one section
/// must be found):
///   profile.json    {"name", "language", "source_uri", "aliases"}
///   summary.txt     pre-written summary; otherwise one is requested
///   profile.md      single document, "# Name" then "## Section" headings
///   sections/*.txt  one section per file (title from a leading "## " line
///                   or the file stem), read in file-name order
///   authentic/*.txt screenplay-format scripts of real dialogue
struct ProfileSource {
  RoleProfile profile;  // summary empty unless summary.txt was supplied
  bool summary_supplied = false;
  std::vector<AuthenticScript> authentic_scripts;
};

ProfileSource read_profile_dir(const std::filesystem::path& dir, std::string_view role_id);

/// Splits a "## "-headed document into sections. Text before the first
/// heading, other than a "# " title line, becomes an "Introduction" section.
std::vector<ProfileSection> parse_sectioned_document(std::string_view document);

/// Fixed summarization instruction, capped at the token budget.
std::string build_summary_prompt(const RoleProfile& profile, double token_budget);

/// Trims, prefixes the name when the summary omits it, and cuts at sentence
/// boundaries until the estimate fits the budget.
std::string finalize_summary(std::string_view raw, std::string_view name, double token_budget);

/// read_profile_dir plus summary production through the gateway when no
/// summary was supplied. Throws ValidationError if invariants fail.
ProfileSource ingest_profile(const std::filesystem::path& dir, std::string_view role_id, Gateway* gateway,
                             double token_budget = kDefaultSummaryTokenBudget);

}  // namespace rolekit
