#include "rolekit/segmenter.hpp"

#include <regex>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

std::string period_label_for(std::string_view narrative, int segment_index) {
  static const std::regex year(R"((^|[^0-9])(1[0-9]{3}|20[0-9]{2})(?![0-9]))");
  std::string s(narrative);
  std::vector<std::string> years;
  for (std::sregex_iterator it(s.begin(), s.end(), year), end; it != end; ++it) {
    years.push_back((*it)[2].str());
  }
  if (years.empty()) return "part " + std::to_string(segment_index + 1);
  if (years.front() == years.back()) return years.front();
  return years.front() + "-" + years.back();
}

std::vector<LifeSegment> segment_life_experience(const RoleProfile& profile, std::size_t max_segment_chars) {
  if (max_segment_chars < kMinSegmentChars) {
    throw ValidationError("max_segment_chars must be >= " + std::to_string(kMinSegmentChars));
  }
  const auto* life = profile.life_experience();
  if (life == nullptr) throw ValidationError("profile " + profile.role_id + " has no life-experience section");
  auto paragraphs = text::split_paragraphs(life->body);
  if (paragraphs.empty()) {
    throw ValidationError("profile " + profile.role_id + ": life-experience section '" + life->title + "' is empty");
  }

  std::vector<std::vector<std::string>> groups;
  std::size_t current_chars = 0;
  for (auto& p : paragraphs) {
    if (groups.empty() || current_chars + p.size() > max_segment_chars) {
      groups.emplace_back();
      current_chars = 0;
    }
    current_chars += p.size();
    groups.back().push_back(std::move(p));
  }

  std::vector<LifeSegment> segments;
  segments.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto narrative = text::join(groups[i], "\n\n");
    auto index = static_cast<int>(i);
    segments.push_back({profile.role_id, index, period_label_for(narrative, index), std::move(narrative)});
  }
  return segments;
}

}  // namespace rolekit
