#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace dogma::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes the UTF-8 sequence starting at text[i] and advances i past it.
// Malformed bytes decode as U+FFFD, consuming one byte at a time, so the
// scan always terminates and never reads past the end.
char32_t decode(std::string_view text, std::size_t& i);

// Number of Unicode scalar values in the string (each malformed byte
// counts as one replacement character).
std::size_t scalar_count(std::string_view text);

void append_utf8(std::string& out, char32_t cp);

// Letters for tokenization purposes. ASCII is exact; beyond ASCII every
// codepoint counts as a letter unless it falls in a known punctuation,
// symbol, or whitespace block. That errs toward keeping foreign-script
// words intact rather than splitting them.
bool is_letter(char32_t cp);

bool is_ascii_digit(char32_t cp);

inline bool is_word_char(char32_t cp) {
  return is_letter(cp) || is_ascii_digit(cp);
}

// Lowercases ASCII and Latin-1 letters; other codepoints pass through.
char32_t to_lower(char32_t cp);

}  // namespace dogma::unicode
