#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rolekit {

/// A judging dimension. Built-in ids: contextual, emotional, language,
/// logical, adaptability, overall. Rubric bodies use the {agent_name},
/// {agent_context} and {interactions} slots.
struct Metric {
  std::string metric_id;
  std::string label;
  std::string rubric_text;

  bool operator==(const Metric&) const = default;
};

inline constexpr const char* kOverallMetric = "overall";

/// The six built-in rubrics in report-column order.
const std::vector<Metric>& builtin_metrics();

/// Reasons a rubric body is unusable: missing slot, missing 1-7 scale
/// instruction, missing evidence-first step.
std::vector<std::string> rubric_violations(std::string_view rubric_text);

/// A user-supplied rubric file; the metric id is the file stem. Throws
/// ValidationError when rubric_violations() is non-empty.
Metric load_rubric(const std::filesystem::path& path);

/// "all" or a comma-separated id list. Ids not built in are looked up as
/// "<id>.txt" in `rubric_dir`. Throws ValidationError for unknown ids.
std::vector<Metric> resolve_metrics(std::string_view selection, const std::filesystem::path& rubric_dir = {});

}  // namespace rolekit
