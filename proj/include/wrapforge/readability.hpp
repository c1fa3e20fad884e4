#pragma once

#include <cstddef>
#include <string_view>

namespace wrapforge {

/// Rule-based English syllable count: vowel groups (y counts as a vowel
/// except word-initially), minus a silent final "e" (kept for consonant+"le"
/// and "ee"), minus the "ed"/"es" inflection where it is not pronounced.
/// Only ASCII letters are considered; a word without letters counts 1.
std::size_t count_syllables(std::string_view word);

struct ReadabilityCounts {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t syllables = 0;
};

/// Words are whitespace tokens holding at least one ASCII letter or digit;
/// sentences come from the shared sentence splitter (those with no words are
/// ignored).
ReadabilityCounts readability_counts(std::string_view text);

/// 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
/// Throws std::invalid_argument when the text has no words.
double flesch_kincaid_grade(std::string_view text);

/// Distinct lowercased unicode-word tokens over total tokens.
/// Throws std::invalid_argument when the text has no tokens.
double type_token_ratio(std::string_view text);

}  // namespace wrapforge
