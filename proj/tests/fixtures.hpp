#pragma once

#include <string>
#include <variant>

#include "support.hpp"
#include "wrapforge/output_filter.hpp"

// Hand-worked fixtures shared by the unit tests and the acceptance binary.
namespace wrapforge::testing {

struct FilterGolden {
  const char* input;
  FilterOutcome expected;
};

// Hand-worked outcomes under the default lexicon.
inline const FilterGolden kFilterGoldens[] = {
    {"Here's a paraphrase of the paragraph:\n\nThe sky is blue.", KeptModified{"The sky is blue."}},
    {"The sky is blue. It is vast.", KeptUnchanged{}},
    {"Here's a paraphrase in high-quality English with no delimiter at all", Dropped{"Here's a paraphrase"}},
    {"The following is a rewrite:\nCats sleep a lot.", KeptModified{"Cats sleep a lot."}},
    {"The following text\n\nCats sleep.", KeptModified{"Cats sleep."}},
    {"Written in high-quality English: Dogs bark.", KeptModified{"Dogs bark."}},
    {"HERE'S A PARAPHRASE: ok then.", KeptModified{"ok then."}},
    {"Note: the following items are listed.", Dropped{"The following"}},
    {"Cats sleep. Here's a paraphrase: dogs.", KeptUnchanged{}},
    {"   ", Dropped{"empty"}},
    {"Here's a paraphrase:", Dropped{"Here's a paraphrase"}},
    {"Here's a paraphrase:\n\nThe following version:\n\nReal text.", KeptModified{"Real text."}},
    {"Time: 10 o'clock.", KeptUnchanged{}},
    {"Here is the text:\n\nAll good.", KeptUnchanged{}},
    {"The following\n\nis: odd.", KeptModified{"is: odd."}},
    {"Intro: Here's a paraphrase follows\n\nBody.", Dropped{"Here's a paraphrase"}},
    {"the following and high-quality english here", Dropped{"The following"}},
    {"A high-quality english rewrite follows:\n\n  Indented start.", KeptModified{"Indented start."}},
    {"Sure! Here's a paraphrase:\n\nText.", KeptUnchanged{}},
    {"here's a paraphrase of it.\n\nBody.", Dropped{"Here's a paraphrase"}},
    {"The following: Dr. Smith left. He ran.", KeptModified{"Dr. Smith left. He ran."}},
    {"Caf\xC3\xA9: The following?", Dropped{"The following"}},
    {"The sky: the following day was warm.", Dropped{"The following"}},
    {"Here's a paraphrase\n\n", Dropped{"Here's a paraphrase"}},
    {"Paraphrase: Here's a paraphrase: text", Dropped{"Here's a paraphrase"}},
    {"Here's a paraphrase:ABC", KeptModified{"ABC"}},
    {"Here's a paraphrase of the paragraph:\n\n\xE6\x97\xA5\xE6\x9C\xAC\xE8\xAA\x9E\xE3\x81\xA7\xE3\x81\x99\xE3\x80\x82",
     KeptModified{"\xE6\x97\xA5\xE6\x9C\xAC\xE8\xAA\x9E\xE3\x81\xA7\xE3\x81\x99\xE3\x80\x82"}},
    {"The Following text is in High-Quality English:\n\nOk.", KeptModified{"Ok."}},
    {"Plain sentence with colon: fine. Second: also fine.", KeptUnchanged{}},
    {"The followings:", Dropped{"The following"}},
};

inline std::string describe(const FilterOutcome& o) {
  if (std::holds_alternative<KeptUnchanged>(o)) return "KeptUnchanged";
  if (const auto* m = std::get_if<KeptModified>(&o)) return "KeptModified(" + m->text + ")";
  return "Dropped(" + std::get<Dropped>(o).reason + ")";
}

// Random rephrase-like input mixing lexicon phrases, delimiters and prose.
inline std::string filter_fuzz_input(std::mt19937_64& rng) {
  static const char* pieces[] = {
      "Here's a paraphrase", "here's A PARAPHRASE", "The following", "high-quality English",
      ":", "\n\n", "\n", " ", ". ", "! ", "? ", "Dr. ", "The sky is blue", "It", "x:",
      "\xC3\xA9", "\xE4\xB8\xAD", "\"", "...", "  \t", "e.g. ", "A", "b"};
  const std::size_t n = uniform(rng, 0, 12);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (uniform(rng, 0, 4) == 0) {
      s += random_text(rng, 5);
    } else {
      s += pieces[rng() % std::size(pieces)];
    }
  }
  return s;
}

// Hand-counted words, sentences and syllables (under the documented
// syllable rules) for grade-level checks.
struct ReadabilityGolden {
  const char* text;
  int words;
  int sentences;
  int syllables;
};

inline const ReadabilityGolden kReadabilityGoldens[] = {
    {"The cat sat on the mat.", 6, 1, 6},
    {"Go.", 1, 1, 1},
    {"The table is yellow.", 4, 1, 6},
    {"She jumped. He wanted boxes.", 5, 2, 7},
    {"A happy man makes free beautiful music.", 7, 1, 11},
    {"Dogs run fast! Cats sleep all day.", 7, 2, 7},
    {"Little children played with simple games.", 6, 1, 9},
    {"Yesterday the teacher explained the lesson.", 6, 1, 11},
    {"I see. You go. We stop.", 6, 3, 6},
    {"Photosynthesis converts light into chemical energy.", 6, 1, 16},
};

inline double fk_from_counts(const ReadabilityGolden& g) {
  return 0.39 * g.words / g.sentences + 11.8 * g.syllables / g.words - 15.59;
}

}  // namespace wrapforge::testing
