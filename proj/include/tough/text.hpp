#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tough {

// A token with its byte range in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

using StopwordSet = std::set<std::string, std::less<>>;

// Whitespace split, then leading/trailing punctuation (ASCII and common
// Unicode quotes, dashes, ellipsis, inverted marks) peeled off as separate
// one-character tokens. Interior punctuation ("U.S", "don't") is kept.
std::vector<Token> tokenize(std::string_view text);

std::vector<std::string> token_texts(std::string_view text);

// True if every code point of the token is punctuation.
bool is_punctuation(std::string_view token);

// ASCII-only lowercase; other bytes are passed through.
std::string to_lower(std::string_view s);

bool is_capitalized(std::string_view token);
std::string capitalize(std::string_view token);

// Rebuilds text from the kept tokens. Adjacent kept tokens keep the
// original separator between them; a gap left by a dropped token becomes
// one space. Keeping every token reproduces the trimmed input.
std::string render_kept(std::string_view text, std::span<const Token> tokens,
                        std::span<const std::uint8_t> keep);

// Articles, prepositions, auxiliaries and wh-words.
const StopwordSet& default_stopwords();

// Not a stopword (case-folded) and not pure punctuation.
bool is_content_token(std::string_view token, const StopwordSet& stopwords);

// Byte offset <-> code point offset for UTF-8 text.
std::size_t byte_to_char_offset(std::string_view text, std::size_t byte_offset);
// Returns npos if char_offset is past the end.
std::size_t char_to_byte_offset(std::string_view text, std::size_t char_offset);

std::string trim(std::string_view s);

}  // namespace tough
