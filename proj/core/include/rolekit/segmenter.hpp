#pragma once

#include <cstddef>
#include <vector>

#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr std::size_t kMinSegmentChars = 500;

/// Greedy paragraph packing of the profile's life-experience section.
///
/// Paragraphs (blank-line separated) are appended to the current segment
/// while the segment's paragraph characters stay within max_segment_chars;
/// the "\n\n" joins between paragraphs are not counted. A paragraph longer
/// than the cap becomes a segment of its own. Throws ValidationError when
/// the cap is below kMinSegmentChars or the section is missing or empty.
std::vector<LifeSegment> segment_life_experience(const RoleProfile& profile, std::size_t max_segment_chars);

/// Period label for a narrative: "<first year>-<last year>" when four-digit
/// years occur, otherwise "part <n>".
std::string period_label_for(std::string_view narrative, int segment_index);

}  // namespace rolekit
