#include "wrapforge/readability.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::size_t count_syllables(std::string_view word) {
  std::string w;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (w.empty()) return 1;

  std::size_t groups = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool vowel = is_vowel(w[i]) && !(i == 0 && w[i] == 'y');
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }

  const std::size_t n = w.size();
  if (groups > 1) {
    if (ends_with(w, "e") && !ends_with(w, "ee")) {
      const bool consonant_le = ends_with(w, "le") && n > 2 && !is_vowel(w[n - 3]);
      if (!consonant_le) --groups;
    } else if (ends_with(w, "ed") && n > 2 && !is_vowel(w[n - 3])) {
      if (w[n - 3] != 't' && w[n - 3] != 'd') --groups;
    } else if (ends_with(w, "es") && n > 2 && !is_vowel(w[n - 3])) {
      const char p = w[n - 3];
      const bool sibilant = p == 's' || p == 'x' || p == 'z' || p == 'c' || p == 'g' ||
                            ends_with(w, "ches") || ends_with(w, "shes");
      if (!sibilant) --groups;
    }
  }
  return groups == 0 ? 1 : groups;
}

ReadabilityCounts readability_counts(std::string_view text) {
  ReadabilityCounts counts;
  for (const TextSpan& sentence : sentence_spans(text)) {
    std::size_t words_here = 0;
    for (const TextSpan& tok : tokenize(sentence.view(text), TokenScheme::WhitespaceWords)) {
      const std::string_view word = tok.view(sentence.view(text));
      bool has_alnum = false;
      for (char c : word) has_alnum = has_alnum || std::isalnum(static_cast<unsigned char>(c));
      if (!has_alnum) continue;
      ++words_here;
      counts.syllables += count_syllables(word);
    }
    if (words_here > 0) {
      ++counts.sentences;
      counts.words += words_here;
    }
  }
  return counts;
}

double flesch_kincaid_grade(std::string_view text) {
  const ReadabilityCounts c = readability_counts(text);
  if (c.words == 0) throw std::invalid_argument("flesch_kincaid_grade: text has no words");
  const double words = static_cast<double>(c.words);
  return 0.39 * (words / static_cast<double>(c.sentences)) +
         11.8 * (static_cast<double>(c.syllables) / words) - 15.59;
}

double type_token_ratio(std::string_view text) {
  const auto tokens = tokenize(text, TokenScheme::UnicodeWords);
  if (tokens.empty()) throw std::invalid_argument("type_token_ratio: text has no tokens");
  std::unordered_set<std::string> types;
  for (const TextSpan& t : tokens) types.insert(to_lower_ascii(t.view(text)));
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

}  // namespace wrapforge
