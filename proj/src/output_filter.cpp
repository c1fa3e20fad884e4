#include "wrapforge/output_filter.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "wrapforge/text.hpp"

namespace wrapforge {

UnwantedLexicon default_lexicon() {
  return {{"Here's a paraphrase", "The following", "high-quality English"}};
}

UnwantedLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path.string());
  UnwantedLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    lex.phrases.emplace_back(t);
  }
  if (lex.phrases.empty()) throw std::runtime_error("lexicon is empty: " + path.string());
  return lex;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const TextSpan& s : sentence_spans(text)) out.emplace_back(s.view(text));
  if (out.empty()) out.emplace_back(text);
  return out;
}

std::optional<std::string> contains_unwanted(std::string_view segment, const UnwantedLexicon& lexicon) {
  const std::string haystack = to_lower_ascii(segment);
  for (const auto& phrase : lexicon.phrases) {
    if (phrase.empty()) continue;
    if (haystack.find(to_lower_ascii(phrase)) != std::string::npos) return phrase;
  }
  return std::nullopt;
}

FilterOutcome filter_rephrase(std::string_view text, const UnwantedLexicon& lexicon) {
  std::string_view rest = text;
  std::optional<std::string> cut_phrase;
  for (;;) {
    const auto sentences = sentence_spans(rest);
    if (sentences.empty()) return Dropped{cut_phrase.value_or("empty")};
    const TextSpan first = sentences.front();
    const std::string_view sentence = first.view(rest);

    const std::size_t para = sentence.find("\n\n");
    const std::size_t colon = sentence.find(':');
    const std::size_t delim = std::min(para, colon);
    if (delim != std::string_view::npos) {
      if (auto phrase = contains_unwanted(sentence.substr(0, delim), lexicon)) {
        const std::size_t delim_len = delim == para ? 2 : 1;
        rest = trim_left(rest.substr(first.begin + delim + delim_len));
        cut_phrase = std::move(phrase);
        if (rest.empty()) return Dropped{*cut_phrase};
        continue;
      }
    }
    if (auto phrase = contains_unwanted(sentence, lexicon)) return Dropped{*phrase};
    break;
  }
  if (cut_phrase) return KeptModified{std::string(rest)};
  return KeptUnchanged{};
}

std::string to_string(FilterStatus status) {
  return status == FilterStatus::Unchanged ? "unchanged" : "modified";
}

Document to_document(const SyntheticRecord& r) {
  Document d;
  d.id = r.id;
  d.text = r.text;
  d.source = "synthetic-" + r.style;
  d.meta = {{"parent_id", r.parent_id},
            {"chunk_index", std::to_string(r.chunk_index)},
            {"style", r.style},
            {"model_id", r.model_id},
            {"prompt_version", r.prompt_version},
            {"filter_status", to_string(r.filter_status)}};
  return d;
}

SyntheticRecord synthetic_record_from_document(const Document& doc) {
  const RawRephrase raw = raw_rephrase_from_document(doc);
  SyntheticRecord r;
  r.id = doc.id;
  r.parent_id = raw.parent_id;
  r.chunk_index = raw.chunk_index;
  r.style = raw.style;
  r.text = doc.text;
  r.model_id = raw.model_id;
  r.prompt_version = raw.prompt_version;
  auto it = doc.meta.find("filter_status");
  r.filter_status = it != doc.meta.end() && it->second == "modified" ? FilterStatus::Modified
                                                                      : FilterStatus::Unchanged;
  return r;
}

nlohmann::ordered_json to_json(const FilterReport& report) {
  nlohmann::ordered_json by_phrase = nlohmann::ordered_json::object();
  for (const auto& [phrase, n] : report.dropped_by_phrase) by_phrase[phrase] = n;
  return {{"total", report.total()},
          {"unchanged", report.unchanged},
          {"modified", report.modified},
          {"dropped", report.dropped},
          {"dropped_by_phrase", by_phrase}};
}

FilterResult filter_corpus(std::span<const RawRephrase> records, const UnwantedLexicon& lexicon) {
  FilterResult out;
  for (const RawRephrase& raw : records) {
    const FilterOutcome outcome = filter_rephrase(raw.text, lexicon);
    if (const auto* d = std::get_if<Dropped>(&outcome)) {
      ++out.report.dropped;
      ++out.report.dropped_by_phrase[d->reason];
      continue;
    }
    SyntheticRecord rec;
    rec.id = raw.parent_id + "#" + std::to_string(raw.chunk_index);
    rec.parent_id = raw.parent_id;
    rec.chunk_index = raw.chunk_index;
    rec.style = raw.style;
    rec.model_id = raw.model_id;
    rec.prompt_version = raw.prompt_version;
    if (const auto* m = std::get_if<KeptModified>(&outcome)) {
      ++out.report.modified;
      rec.text = m->text;
      rec.filter_status = FilterStatus::Modified;
    } else {
      ++out.report.unchanged;
      rec.text = raw.text;
    }
    out.kept.push_back(std::move(rec));
  }
  return out;
}

}  // namespace wrapforge
