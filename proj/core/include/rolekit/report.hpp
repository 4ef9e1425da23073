#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/judge.hpp"

namespace rolekit {

struct MetricSummary {
  std::string metric_id;
  double mean = 0.0;
  std::size_t count = 0;

  bool operator==(const MetricSummary&) const = default;
};

struct MetricReport {
  std::string model_id;
  /// Built-in metrics first in their column order, then others by id.
  std::vector<MetricSummary> metrics;
  /// Mean of the overall-metric verdicts themselves, when there are any.
  std::optional<double> overall;

  const MetricSummary* find(std::string_view metric_id) const;
};

/// Arithmetic mean per metric over all verdicts. Throws ValidationError for
/// an empty verdict list.
MetricReport aggregate(const std::vector<JudgeVerdict>& verdicts, std::string model_id);

/// Aligned text table with means to two decimals.
std::string render_report_table(const MetricReport& report);

/// Machine-readable report with full-precision means.
nlohmann::ordered_json report_to_json(const MetricReport& report);

}  // namespace rolekit
