#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers used by the annotator. Classification covers the scripts the
// annotator is expected to see (Latin, Greek, Cyrillic, CJK, ...); anything
// else counts as "exotic" and is treated as a non-letter.
namespace termweave::text {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

/// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters.
std::string to_lower(std::string_view s);

std::size_t code_point_count(std::string_view s);

/// Splits running text into word tokens: maximal runs of letters, digits and
/// underscores, with word-internal apostrophes kept. A trailing possessive
/// "'s" is stripped.
std::vector<std::string> split_words(std::string_view s);

}  // namespace termweave::text
