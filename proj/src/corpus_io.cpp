#include "wrapforge/corpus_io.hpp"

#include <cstdio>
#include <string>

namespace wrapforge {

using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const ShardManifest& m) {
  return ordered_json{{"path", m.path},
                      {"record_count", m.record_count},
                      {"token_count", m.token_count},
                      {"source", m.source}};
}

Document parse_document_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CorpusError("record is not an object");
  Document doc;
  for (const char* key : {"id", "text", "source"}) {
    auto it = j.find(key);
    if (it == j.end()) throw CorpusError(std::string("missing key '") + key + "'");
    if (!it->is_string()) throw CorpusError(std::string("key '") + key + "' is not a string");
  }
  doc.id = j["id"].get<std::string>();
  doc.text = j["text"].get<std::string>();
  doc.source = j["source"].get<std::string>();
  if (doc.id.empty()) throw CorpusError("empty id");
  if (trim(doc.text).empty()) throw CorpusError("empty text");
  if (auto it = j.find("meta"); it != j.end()) {
    if (!it->is_object()) throw CorpusError("meta is not an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) throw CorpusError("meta value for '" + k + "' is not a string");
      doc.meta.emplace(k, v.get<std::string>());
    }
  }
  return doc;
}

std::string serialize_document(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["source"] = doc.source;
  if (!doc.meta.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : doc.meta) meta[k] = v;
    j["meta"] = std::move(meta);
  }
  try {
    return j.dump();
  } catch (const json::type_error& e) {
    throw CorpusError("document '" + doc.id + "' is not valid UTF-8: " + e.what());
  }
}

ShardReader::ShardReader(const std::filesystem::path& path, ReadMode mode)
    : path_(path), mode_(mode), in_(path, std::ios::binary) {
  if (!in_) throw CorpusError("cannot open shard: " + path.string());
}

std::optional<Document> ShardReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      Document doc = parse_document_line(line);
      if (!seen_ids_.insert(doc.id).second) throw CorpusError("duplicate id '" + doc.id + "'");
      return doc;
    } catch (const CorpusError& e) {
      if (mode_ == ReadMode::Strict) {
        throw CorpusError(path_.string() + ":" + std::to_string(line_no_) + ": " + e.what());
      }
      errors_.push_back({line_no_, e.what()});
    }
  }
  if (in_.bad()) throw CorpusError("read failure: " + path_.string());
  return std::nullopt;
}

LoadedShard load_shard(const std::filesystem::path& path, ReadMode mode) {
  ShardReader reader(path, mode);
  LoadedShard out;
  while (auto doc = reader.next()) out.documents.push_back(std::move(*doc));
  out.errors = reader.errors();
  return out;
}

ShardWriter::ShardWriter(std::filesystem::path prefix, std::size_t max_records_per_file)
    : prefix_(std::move(prefix)), max_records_(max_records_per_file) {
  if (max_records_ < 1) throw CorpusError("max_records_per_file must be >= 1");
}

ShardWriter::~ShardWriter() {
  if (!finished_) {
    try {
      close_current();
    } catch (...) {
    }
  }
}

std::filesystem::path ShardWriter::shard_path(const std::filesystem::path& prefix,
                                              std::size_t index) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "-%05zu.jsonl", index);
  return std::filesystem::path(prefix.string() + suffix);
}

void ShardWriter::write(const Document& doc) {
  if (finished_) throw CorpusError("write after finish");
  if (!out_.is_open() || manifests_.back().record_count >= max_records_) {
    close_current();
    const auto path = shard_path(prefix_, manifests_.size());
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw CorpusError("cannot create shard: " + path.string());
    manifests_.push_back({path.string(), 0, 0, ""});
  }
  const std::string line = serialize_document(doc);
  out_ << line << '\n';
  if (!out_) throw CorpusError("write failure: " + manifests_.back().path);
  auto& m = manifests_.back();
  ++m.record_count;
  m.token_count += count_tokens(doc.text, TokenScheme::WhitespaceWords);
  if (m.record_count == 1) {
    m.source = doc.source;
  } else if (m.source != doc.source) {
    m.source = "mixed";
  }
}

void ShardWriter::close_current() {
  if (out_.is_open()) {
    out_.flush();
    const bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok) throw CorpusError("write failure: " + manifests_.back().path);
  }
}

std::vector<ShardManifest> ShardWriter::finish() {
  close_current();
  finished_ = true;
  return manifests_;
}

std::vector<ShardManifest> write_shard(std::span<const Document> docs,
                                       const std::filesystem::path& prefix,
                                       std::size_t max_records_per_file) {
  ShardWriter writer(prefix, max_records_per_file);
  for (const auto& d : docs) writer.write(d);
  return writer.finish();
}

std::vector<Chunk> chunk_document(const Document& doc, std::size_t max_tokens,
                                  TokenScheme scheme) {
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  const std::string_view text = doc.text;
  const auto tokens = tokenize(text, scheme);
  if (tokens.empty()) return {};

  // First token of every chunk and the byte offset its text starts at.
  struct ChunkStart {
    std::size_t token;
    std::size_t byte;
  };
  std::vector<ChunkStart> starts;
  std::size_t open_count = 0;  // tokens in the chunk currently being filled
  auto begin_chunk = [&](std::size_t token, std::size_t byte) {
    starts.push_back({token, byte});
    open_count = 0;
  };

  std::size_t tok = 0;
  for (const TextSpan& sentence : sentence_spans(text)) {
    std::size_t first = tok;
    while (tok < tokens.size() && tokens[tok].begin < sentence.end) ++tok;
    std::size_t n = tok - first;
    if (n == 0) continue;
    if (starts.empty()) begin_chunk(first, 0);
    if (open_count + n <= max_tokens) {
      open_count += n;
      continue;
    }
    if (n <= max_tokens) {
      begin_chunk(first, sentence.begin);
      open_count = n;
      continue;
    }
    // Oversized sentence: cut hard slices of max_tokens.
    if (open_count > 0) begin_chunk(first, sentence.begin);
    while (n > max_tokens) {
      first += max_tokens;
      n -= max_tokens;
      begin_chunk(first, tokens[first].begin);
    }
    open_count = n;
  }

  std::vector<Chunk> chunks;
  chunks.reserve(starts.size());
  for (std::size_t c = 0; c < starts.size(); ++c) {
    const bool last = c + 1 == starts.size();
    const std::size_t first_tok = starts[c].token;
    const std::size_t end_tok = last ? tokens.size() : starts[c + 1].token;
    const std::size_t byte_begin = starts[c].byte;
    const std::size_t byte_end = last ? text.size() : starts[c + 1].byte;
    Chunk chunk;
    chunk.parent_id = doc.id;
    chunk.index = c;
    chunk.text = std::string(trim(text.substr(byte_begin, byte_end - byte_begin)));
    chunk.token_count = end_tok - first_tok;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace wrapforge
