#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wrapforge/corpus_io.hpp"
#include "wrapforge/rephrase_client.hpp"

namespace wrapforge {

/// Phrases that mark a generation preamble. Matching is ASCII
/// case-insensitive substring search, first phrase in list order wins.
struct UnwantedLexicon {
  std::vector<std::string> phrases;
};

UnwantedLexicon default_lexicon();
/// One phrase per line; blank lines and lines starting with '#' are skipped.
UnwantedLexicon load_lexicon(const std::filesystem::path& path);

std::vector<std::string> split_sentences(std::string_view text);

std::optional<std::string> contains_unwanted(std::string_view segment, const UnwantedLexicon& lexicon);

struct KeptUnchanged {
  friend bool operator==(const KeptUnchanged&, const KeptUnchanged&) = default;
};
struct KeptModified {
  std::string text;
  friend bool operator==(const KeptModified&, const KeptModified&) = default;
};
struct Dropped {
  std::string reason;  // the matched phrase
  friend bool operator==(const Dropped&, const Dropped&) = default;
};
using FilterOutcome = std::variant<KeptUnchanged, KeptModified, Dropped>;

/// Removes a generation preamble from a rephrase.
///
/// The first sentence is searched for the earliest "\n\n" or ":". When the
/// segment before it contains an unwanted phrase, everything up to and
/// including the delimiter is cut (plus the whitespace that follows) and the
/// check repeats on what is left, so the result is a fixpoint. If no cut
/// applies but the first sentence still contains an unwanted phrase, the
/// rephrase is dropped. A cut that leaves nothing is also a drop.
FilterOutcome filter_rephrase(std::string_view text, const UnwantedLexicon& lexicon);

enum class FilterStatus { Unchanged, Modified };

std::string to_string(FilterStatus status);

/// A rephrase that survived filtering.
struct SyntheticRecord {
  std::string id;
  std::string parent_id;
  std::size_t chunk_index = 0;
  std::string style;
  std::string text;
  std::string model_id;
  std::string prompt_version;
  FilterStatus filter_status = FilterStatus::Unchanged;

  friend bool operator==(const SyntheticRecord&, const SyntheticRecord&) = default;
};

Document to_document(const SyntheticRecord& r);
SyntheticRecord synthetic_record_from_document(const Document& doc);

struct FilterReport {
  std::size_t unchanged = 0;
  std::size_t modified = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> dropped_by_phrase;

  std::size_t total() const { return unchanged + modified + dropped; }
  friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

nlohmann::ordered_json to_json(const FilterReport& report);

struct FilterResult {
  std::vector<SyntheticRecord> kept;
  FilterReport report;
};

FilterResult filter_corpus(std::span<const RawRephrase> records, const UnwantedLexicon& lexicon);

}  // namespace wrapforge
