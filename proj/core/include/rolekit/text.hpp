#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the parsers and prompt builders. All case
// folding is ASCII-only; non-ASCII bytes pass through untouched.
namespace rolekit::text {

std::string trim(std::string_view s);
std::string casefold(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);

/// Collapses every whitespace run to a single space and trims the ends.
std::string normalize_whitespace(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

/// Splits on whitespace; no empty tokens.
std::vector<std::string> split_words(std::string_view s);

/// Paragraphs are separated by one or more blank lines. Each paragraph is
/// trimmed; empty paragraphs are dropped.
std::vector<std::string> split_paragraphs(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::size_t word_count(std::string_view s);

/// Token estimate used for every budget in the toolkit: whitespace words x 1.3.
double estimate_tokens(std::string_view s);

/// Sentence boundaries are runs of . ! ? and their full-width forms.
/// A trailing fragment counts as a sentence when it holds any alphanumeric
/// or non-ASCII character.
std::vector<std::string> split_sentences(std::string_view s);
std::size_t count_sentences(std::string_view s);

/// Returns s with every occurrence of `from` replaced by `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace rolekit::text
