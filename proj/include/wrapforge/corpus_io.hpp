#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "wrapforge/text.hpp"

namespace wrapforge {

/// One web-text record.
struct Document {
  std::string id;
  std::string text;
  std::string source;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Document&, const Document&) = default;
};

/// A rephrase-sized slice of a document.
struct Chunk {
  std::string parent_id;
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct ShardManifest {
  std::string path;
  std::size_t record_count = 0;
  std::size_t token_count = 0;
  std::string source;
};

nlohmann::ordered_json to_json(const ShardManifest& m);

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

enum class ReadMode { Lenient, Strict };

/// Parses one shard line. Throws CorpusError on a malformed record.
Document parse_document_line(std::string_view line);
/// Serializes to a single JSON line (no trailing newline) with keys in the
/// fixed order id, text, source, meta.
std::string serialize_document(const Document& doc);

/// Streams documents from a newline-delimited shard. Malformed lines are
/// recorded in errors() and skipped; in strict mode they throw instead.
class ShardReader {
 public:
  explicit ShardReader(const std::filesystem::path& path, ReadMode mode = ReadMode::Lenient);

  std::optional<Document> next();
  const std::vector<RecordError>& errors() const { return errors_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  ReadMode mode_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
  std::vector<RecordError> errors_;
};

struct LoadedShard {
  std::vector<Document> documents;
  std::vector<RecordError> errors;
};

LoadedShard load_shard(const std::filesystem::path& path, ReadMode mode = ReadMode::Lenient);

/// Writes `<prefix>-NNNNN.jsonl` files, rolling over every max_records_per_file
/// records. Files are only created once a record is written to them.
class ShardWriter {
 public:
  ShardWriter(std::filesystem::path prefix, std::size_t max_records_per_file);
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;
  ~ShardWriter();

  void write(const Document& doc);
  /// Closes the current file and returns one manifest per written file.
  std::vector<ShardManifest> finish();

  static std::filesystem::path shard_path(const std::filesystem::path& prefix, std::size_t index);

 private:
  void close_current();

  std::filesystem::path prefix_;
  std::size_t max_records_;
  std::ofstream out_;
  std::vector<ShardManifest> manifests_;
  bool finished_ = false;
};

std::vector<ShardManifest> write_shard(std::span<const Document> docs,
                                       const std::filesystem::path& prefix,
                                       std::size_t max_records_per_file);

/// Splits a document into chunks of at most max_tokens tokens. Sentences are
/// packed greedily; a sentence longer than the budget is cut on token
/// boundaries and its tail stays open for the following sentences. Chunk text
/// is the source slice from the chunk's first token (or the document start) up
/// to the next chunk's first token, with surrounding whitespace trimmed.
std::vector<Chunk> chunk_document(const Document& doc, std::size_t max_tokens,
                                  TokenScheme scheme = TokenScheme::WhitespaceWords);

}  // namespace wrapforge
