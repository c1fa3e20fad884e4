#include "wrapforge/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <stdexcept>

namespace wrapforge {

namespace {

struct CodePoint {
  char32_t value = 0;
  std::size_t length = 1;
};

// Invalid sequences decode as a single byte so segmentation stays total.
CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_ideographic(char32_t cp) {
  return (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x20000 && cp <= 0x2FA1F);
}

bool is_unicode_space(char32_t cp) {
  return cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200B) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 ||
         cp == 0xFEFF;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) || cp == '_';
  if (is_unicode_space(cp)) return false;
  if (cp >= 0x80 && cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // Latin-1 symbols
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, arrows, math, box drawing
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
  if (cp == 0xFFFD) return true;
  return true;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

std::vector<TextSpan> whitespace_tokens(std::string_view text) {
  std::vector<TextSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_ascii_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    while (i < n && !is_ascii_space(text[i])) ++i;
    out.push_back({start, i});
  }
  return out;
}

std::vector<TextSpan> unicode_tokens(std::string_view text) {
  std::vector<TextSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool in_word = false;
  std::size_t start = 0;
  while (i < n) {
    const CodePoint cp = decode_utf8(text, i);
    if (is_ideographic(cp.value)) {
      if (in_word) out.push_back({start, i});
      in_word = false;
      out.push_back({i, i + cp.length});
    } else if (is_word_char(cp.value)) {
      if (!in_word) {
        in_word = true;
        start = i;
      }
    } else if (in_word && is_apostrophe(cp.value) && i + cp.length < n &&
               is_word_char(decode_utf8(text, i + cp.length).value) &&
               !is_ideographic(decode_utf8(text, i + cp.length).value)) {
      // "don't" stays one token
    } else if (in_word) {
      out.push_back({start, i});
      in_word = false;
    }
    i += cp.length;
  }
  if (in_word) out.push_back({start, n});
  return out;
}

constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",  "prof", "sr",  "jr",   "st",   "vs",  "etc",
    "e.g",  "i.e",  "inc",  "ltd", "co",   "corp", "mt",  "dec",  "fig", "gen",
    "col",  "lt",   "sgt",  "capt", "rev", "hon", "dept", "est",  "approx", "jan",
    "feb",  "mar",  "apr",  "jun", "jul",  "aug", "sep",  "sept", "oct", "nov"};

bool is_abbreviation(std::string_view text, std::size_t dot_pos) {
  std::size_t b = dot_pos;
  while (b > 0 && !is_ascii_space(text[b - 1])) --b;
  std::string_view word = text.substr(b, dot_pos - b);
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' ||
                           word.front() == '[')) {
    word.remove_prefix(1);
  }
  if (word.empty()) return false;
  const std::string lower = to_lower_ascii(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

bool is_closer_at(std::string_view s, std::size_t pos, std::size_t* len) {
  const char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') {
    *len = 1;
    return true;
  }
  const CodePoint cp = decode_utf8(s, pos);
  if (cp.value == 0x2019 || cp.value == 0x201D) {
    *len = cp.length;
    return true;
  }
  return false;
}

bool opens_sentence(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)))
    return true;
  if (c == '"' || c == '\'' || c == '(' || c == '[' || c == '{') return true;
  const CodePoint cp = decode_utf8(s, pos);
  if (cp.value == 0x201C || cp.value == 0x2018) return true;
  return cp.value >= 0xC0 && cp.value <= 0xDE && cp.value != 0xD7;  // Latin-1 capitals
}

}  // namespace

TokenScheme parse_token_scheme(std::string_view name) {
  if (name == "whitespace-words" || name == "whitespace") return TokenScheme::WhitespaceWords;
  if (name == "unicode-words" || name == "unicode") return TokenScheme::UnicodeWords;
  throw std::invalid_argument("unknown token scheme: " + std::string(name));
}

std::string to_string(TokenScheme scheme) {
  return scheme == TokenScheme::WhitespaceWords ? "whitespace-words" : "unicode-words";
}

std::vector<TextSpan> tokenize(std::string_view text, TokenScheme scheme) {
  return scheme == TokenScheme::WhitespaceWords ? whitespace_tokens(text) : unicode_tokens(text);
}

std::size_t count_tokens(std::string_view text, TokenScheme scheme) {
  return tokenize(text, scheme).size();
}

std::vector<TextSpan> sentence_spans(std::string_view text) {
  std::vector<TextSpan> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && is_ascii_space(text[start])) ++start;
  std::size_t i = start;
  while (i < n) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    std::size_t closer = 0;
    while (j < n && is_closer_at(text, j, &closer)) j += closer;
    if (j >= n || !is_ascii_space(text[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && is_ascii_space(text[k])) ++k;
    const bool single_dot = c == '.' && (j - i == 1 || (i + 1 < n && text[i + 1] != '.'));
    if (k < n && opens_sentence(text, k) && !(single_dot && is_abbreviation(text, i))) {
      out.push_back({start, j});
      start = k;
    }
    i = k;
  }
  std::size_t end = n;
  while (end > start && is_ascii_space(text[end - 1])) --end;
  if (end > start) out.push_back({start, end});
  return out;
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim_left(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && is_ascii_space(s[b])) ++b;
  return s.substr(b);
}

std::string_view trim_right(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && is_ascii_space(s[e - 1])) --e;
  return s.substr(0, e);
}

std::string_view trim(std::string_view s) { return trim_left(trim_right(s)); }

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(b, i - b));
      b = i + 1;
    }
  }
  return out;
}

}  // namespace wrapforge
