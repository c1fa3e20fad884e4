#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wrapforge {

/// Word-level token schemes used for length budgets and lexical statistics.
///
/// `WhitespaceWords` splits on runs of ASCII whitespace. `UnicodeWords` yields
/// maximal runs of letters/digits (UTF-8 aware, apostrophes inside a word are
/// kept); CJK ideographs and kana are one token per code point; punctuation and
/// symbols are not tokens.
enum class TokenScheme { WhitespaceWords, UnicodeWords };

TokenScheme parse_token_scheme(std::string_view name);
std::string to_string(TokenScheme scheme);

/// Byte range [begin, end) of a token or sentence inside its source text.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  std::string_view view(std::string_view text) const { return text.substr(begin, end - begin); }
  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

std::vector<TextSpan> tokenize(std::string_view text, TokenScheme scheme);
std::size_t count_tokens(std::string_view text, TokenScheme scheme);

/// Rule-based sentence segmentation.
///
/// A boundary follows `.`, `!` or `?` (plus any trailing closing quotes or
/// brackets) when whitespace follows and the next sentence opens with an
/// uppercase letter, a digit or an opening quote/bracket. A `.` directly after a
/// known abbreviation ("Dr", "e.g", ...) never ends a sentence. Spans exclude
/// the surrounding whitespace; paragraph breaks alone do not split.
std::vector<TextSpan> sentence_spans(std::string_view text);

bool is_ascii_space(char c);
std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace wrapforge
