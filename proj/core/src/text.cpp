#include "rolekit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace rolekit::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Full-width terminal punctuation, UTF-8 encoded.
constexpr std::array<std::string_view, 3> kWideTerminals = {"\xE3\x80\x82", "\xEF\xBC\x81",
                                                            "\xEF\xBC\x9F"};

// Length of the terminal mark at s[i], or 0.
std::size_t terminal_at(std::string_view s, std::size_t i) {
  char c = s[i];
  if (c == '.' || c == '!' || c == '?') return 1;
  for (auto mark : kWideTerminals) {
    if (s.substr(i, mark.size()) == mark) return mark.size();
  }
  return 0;
}

bool has_content(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
  });
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string casefold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(s[i]) != lower(prefix[i])) return false;
  }
  return true;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  return casefold(haystack).find(casefold(needle)) != std::string::npos;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    auto end = nl == std::string_view::npos ? s.size() : nl;
    auto line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    auto b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) words.emplace_back(s.substr(b, i - b));
  }
  return words;
}

std::vector<std::string> split_paragraphs(std::string_view s) {
  std::vector<std::string> paragraphs;
  std::string current;
  for (const auto& line : split_lines(s)) {
    if (trim(line).empty()) {
      if (auto p = trim(current); !p.empty()) paragraphs.push_back(std::move(p));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back('\n');
    current += line;
  }
  if (auto p = trim(current); !p.empty()) paragraphs.push_back(std::move(p));
  return paragraphs;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

double estimate_tokens(std::string_view s) { return static_cast<double>(word_count(s)) * 1.3; }

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> sentences;
  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    auto len = terminal_at(s, i);
    if (len == 0) {
      ++i;
      continue;
    }
    i += len;
    while (i < s.size()) {
      if (auto more = terminal_at(s, i)) {
        i += more;
      } else if (s[i] == '"' || s[i] == '\'' || s[i] == ')') {
        ++i;
      } else {
        break;
      }
    }
    auto piece = s.substr(begin, i - begin);
    if (has_content(piece)) sentences.push_back(trim(piece));
    begin = i;
  }
  if (begin < s.size()) {
    auto piece = s.substr(begin);
    if (has_content(piece)) sentences.push_back(trim(piece));
  }
  return sentences;
}

std::size_t count_sentences(std::string_view s) { return split_sentences(s).size(); }

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace rolekit::text
