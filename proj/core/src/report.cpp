#include "rolekit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "rolekit/error.hpp"
#include "rolekit/rubrics.hpp"

namespace rolekit {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

const MetricSummary* MetricReport::find(std::string_view metric_id) const {
  for (const auto& m : metrics) {
    if (m.metric_id == metric_id) return &m;
  }
  return nullptr;
}

MetricReport aggregate(const std::vector<JudgeVerdict>& verdicts, std::string model_id) {
  if (verdicts.empty()) throw ValidationError("no verdicts to aggregate");
  // Scores are small integers, so the sums are exact and the means do not
  // depend on verdict order.
  std::map<std::string, std::pair<long long, std::size_t>> totals;
  for (const auto& v : verdicts) {
    auto& [sum, n] = totals[v.metric_id];
    sum += v.score;
    ++n;
  }
  MetricReport report;
  report.model_id = std::move(model_id);
  for (const auto& m : builtin_metrics()) {
    if (auto it = totals.find(m.metric_id); it != totals.end()) {
      report.metrics.push_back({m.metric_id, static_cast<double>(it->second.first) / it->second.second,
                                it->second.second});
      totals.erase(it);
    }
  }
  for (const auto& [id, t] : totals) {
    report.metrics.push_back({id, static_cast<double>(t.first) / t.second, t.second});
  }
  if (const auto* overall = report.find(kOverallMetric)) report.overall = overall->mean;
  return report;
}

std::string render_report_table(const MetricReport& report) {
  std::vector<std::string> head{"model"};
  std::vector<std::string> row{report.model_id};
  for (const auto& m : report.metrics) {
    head.push_back(m.metric_id + " (n=" + std::to_string(m.count) + ")");
    row.push_back(fixed2(m.mean));
  }
  std::string top, bottom;
  for (std::size_t i = 0; i < head.size(); ++i) {
    auto width = std::max(head[i].size(), row[i].size());
    auto sep = i + 1 < head.size() ? "  " : "";
    top += pad(head[i], width) + sep;
    bottom += pad(row[i], width) + sep;
  }
  auto trim_right = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  return trim_right(top) + "\n" + trim_right(bottom) + "\n";
}

nlohmann::ordered_json report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["model_id"] = report.model_id;
  j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& m : report.metrics) j["metrics"].push_back({{"metric_id", m.metric_id}, {"mean", m.mean}, {"count", m.count}});
  j["overall"] = report.overall ? nlohmann::ordered_json(*report.overall) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace rolekit
