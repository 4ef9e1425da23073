#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rolekit {

using SlotValues = std::map<std::string, std::string, std::less<>>;

/// A prompt body with `{slot}` placeholders.
///
/// Slot names are identifiers ([A-Za-z0-9_]+). A brace that does not open an
/// identifier followed by `}` is literal text, and `{{` renders as `{`.
/// Rendering fails with RenderError when a slot has no value or its value is
/// empty: every prompt in the pipeline needs all of its slots filled.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string body);

  const std::string& body() const noexcept { return body_; }

  /// Distinct slot names in order of first appearance.
  const std::vector<std::string>& slots() const noexcept { return slots_; }

  std::string render(const SlotValues& values) const;

 private:
  struct Piece {
    bool is_slot;
    std::string text;
  };

  std::string body_;
  std::vector<Piece> pieces_;
  std::vector<std::string> slots_;
};

/// One-shot convenience wrapper.
std::string render_template(std::string_view body, const SlotValues& values);

}  // namespace rolekit
