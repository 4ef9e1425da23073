#include "rolekit/prompt_template.hpp"

#include <algorithm>

#include "rolekit/error.hpp"
#include "rolekit/text.hpp"

namespace rolekit {

namespace {

bool is_ident(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

PromptTemplate::PromptTemplate(std::string body) : body_(std::move(body)) {
  std::string literal;
  std::size_t i = 0;
  while (i < body_.size()) {
    char c = body_[i];
    if (c == '{' && i + 1 < body_.size() && body_[i + 1] == '{') {
      literal.push_back('{');
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < body_.size() && is_ident(body_[j])) ++j;
      if (j > i + 1 && j < body_.size() && body_[j] == '}') {
        if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
        literal.clear();
        std::string name = body_.substr(i + 1, j - i - 1);
        if (std::find(slots_.begin(), slots_.end(), name) == slots_.end()) slots_.push_back(name);
        pieces_.push_back({true, std::move(name)});
        i = j + 1;
        continue;
      }
    }
    literal.push_back(c);
    ++i;
  }
  if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
}

std::string PromptTemplate::render(const SlotValues& values) const {
  std::string out;
  out.reserve(body_.size() * 2);
  for (const auto& piece : pieces_) {
    if (!piece.is_slot) {
      out += piece.text;
      continue;
    }
    auto it = values.find(piece.text);
    if (it == values.end()) throw RenderError("unresolved template slot {" + piece.text + "}");
    if (text::trim(it->second).empty()) {
      throw RenderError("template slot {" + piece.text + "} is empty");
    }
    out += it->second;
  }
  return out;
}

std::string render_template(std::string_view body, const SlotValues& values) {
  return PromptTemplate(std::string(body)).render(values);
}

}  // namespace rolekit
