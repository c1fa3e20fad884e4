#include "doctest.h"
#include "fixtures.hpp"
#include "support.hpp"
#include "wrapforge/readability.hpp"

#include <algorithm>
#include <cmath>

using namespace wrapforge;

namespace {

std::vector<std::string> fixture_lines(const std::string& rel) {
  std::vector<std::string> out;
  for (const auto& line : split(testing::slurp(testing::data_path(rel)), '\n')) {
    if (!trim(line).empty()) out.push_back(line);
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

TEST_CASE("syllable goldens") {
  const std::pair<const char*, std::size_t> cases[] = {
      {"cat", 1},      {"table", 2},  {"make", 1},      {"jumped", 1},    {"wanted", 2},
      {"boxes", 2},    {"makes", 1},  {"yellow", 2},    {"happy", 2},     {"free", 1},
      {"beautiful", 3}, {"the", 1},   {"42", 1},        {"played", 1},    {"little", 2},
      {"Photosynthesis", 5}, {"energy", 3}, {"explained", 2}, {"day", 1}, {"You", 1},
      {"don't", 1},    {"MUSIC", 2},  {"naïve", 1},     {"", 1}};
  for (const auto& [word, n] : cases) {
    CAPTURE(word);
    CHECK(count_syllables(word) == n);
  }
}

TEST_CASE("grade-level examples") {
  CHECK(flesch_kincaid_grade("The cat sat on the mat.") == doctest::Approx(-1.45).epsilon(1e-12));
  CHECK(flesch_kincaid_grade("Go.") == doctest::Approx(-3.40).epsilon(1e-12));
  CHECK_THROWS_AS(flesch_kincaid_grade(""), std::invalid_argument);
  CHECK_THROWS_AS(flesch_kincaid_grade("... -- !"), std::invalid_argument);
}

TEST_CASE("grade level matches hand counts") {
  for (const auto& g : testing::kReadabilityGoldens) {
    CAPTURE(std::string(g.text));
    const auto c = readability_counts(g.text);
    CHECK(c.words == static_cast<std::size_t>(g.words));
    CHECK(c.sentences == static_cast<std::size_t>(g.sentences));
    CHECK(c.syllables == static_cast<std::size_t>(g.syllables));
    CHECK(std::abs(flesch_kincaid_grade(g.text) - testing::fk_from_counts(g)) < 1e-9);
  }
}

TEST_CASE("property: duplication invariance") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::string text = testing::random_text(rng, 40);
    if (readability_counts(text).words == 0) continue;
    // A terminal full stop keeps the two copies from merging into one sentence.
    text = std::string(trim(text)) + ".";
    const std::string twice = text + " " + text;
    CAPTURE(text);
    if (readability_counts(twice).sentences != 2 * readability_counts(text).sentences) continue;
    CHECK(flesch_kincaid_grade(twice) == doctest::Approx(flesch_kincaid_grade(text)).epsilon(1e-12));
  }
  for (const auto& g : testing::kReadabilityGoldens) {
    const std::string twice = std::string(g.text) + " " + g.text;
    CHECK(flesch_kincaid_grade(twice) == doctest::Approx(flesch_kincaid_grade(g.text)).epsilon(1e-12));
  }
}

TEST_CASE("property: grade grows with sentence length at fixed syllables per word") {
  static const char* kMono[] = {"cat", "dog", "sun", "red", "big", "ran", "sat", "hot"};
  static const char* kDi[] = {"happy", "table", "yellow", "music", "wanted", "river"};
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const bool two = trial % 2;
    auto corpus = [&](std::size_t len, std::size_t sentences) {
      std::string out;
      for (std::size_t s = 0; s < sentences; ++s) {
        for (std::size_t w = 0; w < len; ++w) {
          out += w ? " " : (s ? " " : "");
          std::string word = two ? kDi[rng() % std::size(kDi)] : kMono[rng() % std::size(kMono)];
          if (w == 0) word[0] = static_cast<char>(std::toupper(word[0]));
          out += word;
        }
        out += ".";
      }
      return out;
    };
    const std::size_t a = testing::uniform(rng, 1, 20);
    const std::size_t b = a + testing::uniform(rng, 1, 20);
    const std::size_t sentences = testing::uniform(rng, 1, 5);
    CHECK(flesch_kincaid_grade(corpus(a, sentences)) < flesch_kincaid_grade(corpus(b, sentences)));
  }
}

TEST_CASE("type-token ratio") {
  CHECK(type_token_ratio("a b c d") == 1.0);
  CHECK(type_token_ratio("a a a a") == 0.25);
  CHECK(type_token_ratio("The the THE cat") == 0.5);
  CHECK_THROWS_AS(type_token_ratio("  "), std::invalid_argument);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::string text = testing::random_text(rng, 30);
    if (tokenize(text, TokenScheme::UnicodeWords).empty()) continue;
    const double t = type_token_ratio(text);
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("formal style fixtures read at a higher grade than QA fixtures") {
  std::vector<double> medium, qa;
  for (const auto& line : fixture_lines("style/medium.txt")) medium.push_back(flesch_kincaid_grade(line));
  for (const auto& line : fixture_lines("style/qa.txt")) qa.push_back(flesch_kincaid_grade(line));
  REQUIRE(medium.size() >= 5);
  REQUIRE(qa.size() >= 5);
  CHECK(median(medium) > median(qa));
}
