#include "tough/text.hpp"

#include <algorithm>

namespace tough {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

struct CodePoint {
  std::uint32_t value;
  std::size_t begin;
  std::size_t end;
};

// Lenient decoder: invalid bytes decode as themselves, one byte long.
CodePoint decode_at(std::string_view s, std::size_t i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, i, i + 1};
  if ((b0 & 0xE0) == 0xC0) {
    int c1 = cont(1);
    if (c1 >= 0) return {((b0 & 0x1Fu) << 6) | unsigned(c1), i, i + 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0)
      return {((b0 & 0x0Fu) << 12) | (unsigned(c1) << 6) | unsigned(c2), i, i + 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0)
      return {((b0 & 0x07u) << 18) | (unsigned(c1) << 12) | (unsigned(c2) << 6) |
                  unsigned(c3),
              i, i + 4};
  }
  return {b0, i, i + 1};
}

bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1:  // ¡
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x00BF:  // ¿
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2018:
    case 0x2019:
    case 0x201A:
    case 0x201C:
    case 0x201D:
    case 0x201E:
    case 0x2026:  // …
    case 0x2039:
    case 0x203A:
      return true;
    default:
      return false;
  }
}

void split_chunk(std::string_view text, std::size_t begin, std::size_t end,
                 std::vector<Token>& out) {
  std::vector<CodePoint> cps;
  for (std::size_t i = begin; i < end;) {
    cps.push_back(decode_at(text, i));
    i = cps.back().end;
  }
  std::size_t lo = 0;
  std::size_t hi = cps.size();
  auto emit = [&](std::size_t b, std::size_t e) {
    out.push_back({std::string(text.substr(b, e - b)), b, e});
  };
  while (lo < hi && is_punct_cp(cps[lo].value)) {
    emit(cps[lo].begin, cps[lo].end);
    ++lo;
  }
  std::size_t core_end = hi;
  while (core_end > lo && is_punct_cp(cps[core_end - 1].value)) --core_end;
  if (lo < core_end) emit(cps[lo].begin, cps[core_end - 1].end);
  for (std::size_t k = core_end; k < hi; ++k) emit(cps[k].begin, cps[k].end);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) split_chunk(text, start, i, tokens);
  }
  return tokens;
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

bool is_punctuation(std::string_view token) {
  if (token.empty()) return false;
  for (std::size_t i = 0; i < token.size();) {
    auto cp = decode_at(token, i);
    if (!is_punct_cp(cp.value)) return false;
    i = cp.end;
  }
  return true;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_capitalized(std::string_view token) {
  return !token.empty() && token[0] >= 'A' && token[0] <= 'Z';
}

std::string capitalize(std::string_view token) {
  std::string out(token);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z')
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::string render_kept(std::string_view text, std::span<const Token> tokens,
                        std::span<const std::uint8_t> keep) {
  std::string out;
  std::size_t prev = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!keep[i]) continue;
    if (prev != tokens.size()) {
      if (prev + 1 == i)
        out.append(text.substr(tokens[prev].end, tokens[i].begin - tokens[prev].end));
      else
        out.push_back(' ');
    }
    out.append(tokens[i].text);
    prev = i;
  }
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      // articles
      "a", "an", "the",
      // prepositions
      "about", "above", "across", "after", "against", "along", "among", "around",
      "as", "at", "before", "behind", "below", "beneath", "beside", "between",
      "beyond", "by", "during", "for", "from", "in", "inside", "into", "near",
      "of", "off", "on", "onto", "out", "over", "since", "than", "through",
      "throughout", "to", "toward", "towards", "under", "until", "up", "upon",
      "with", "within", "without",
      // auxiliaries and modals
      "am", "are", "be", "been", "being", "can", "could", "did", "do", "does",
      "had", "has", "have", "having", "is", "may", "might", "must", "shall",
      "should", "was", "were", "will", "would",
      // wh-words
      "how", "what", "when", "where", "which", "who", "whom", "whose", "why"};
  return words;
}

bool is_content_token(std::string_view token, const StopwordSet& stopwords) {
  if (is_punctuation(token)) return false;
  return !stopwords.contains(to_lower(token));
}

std::size_t byte_to_char_offset(std::string_view text, std::size_t byte_offset) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < text.size() && i < byte_offset;) {
    i = decode_at(text, i).end;
    ++chars;
  }
  return chars;
}

std::size_t char_to_byte_offset(std::string_view text, std::size_t char_offset) {
  std::size_t i = 0;
  for (std::size_t c = 0; c < char_offset; ++c) {
    if (i >= text.size()) return std::string_view::npos;
    i = decode_at(text, i).end;
  }
  return i;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace tough
