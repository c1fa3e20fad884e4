#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>

#include "json.hpp"
#include "wrapforge/corpus_io.hpp"
#include "wrapforge/http_endpoint.hpp"
#include "wrapforge/style_prompts.hpp"

namespace wrapforge {

inline constexpr std::size_t kRephraseTokenBudget = 300;

struct RawRephrase {
  std::string parent_id;
  std::size_t chunk_index = 0;
  std::string style;  // template label
  std::string text;
  std::string model_id;
  std::string prompt_version;
  std::chrono::milliseconds latency{0};
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct FailureRecord {
  std::string parent_id;
  std::size_t chunk_index = 0;
  std::string error;
  int http_status = 0;
  int attempts = 0;
};

using RephraseResult = std::variant<RawRephrase, FailureRecord>;

struct GenerationLog {
  std::chrono::system_clock::time_point started_at{};
  std::chrono::system_clock::time_point finished_at{};
  std::size_t requests = 0;  // one per chunk, retries excluded
  std::size_t failures = 0;
  std::size_t completion_tokens_total = 0;
  std::size_t prompt_tokens_total = 0;
  std::size_t http_attempts = 0;
};

/// Completion tokens per hour of wall clock. Throws std::domain_error when
/// finished_at is not after started_at.
double throughput(const GenerationLog& log);

/// Single request with retries. Throws EndpointError on failure, including
/// an "empty generation" error for a blank completion.
RawRephrase rephrase_one(const Chunk& chunk, const PromptTemplate& tmpl, const EndpointConfig& cfg);
RawRephrase rephrase_one(JsonClient& client, const Chunk& chunk, const PromptTemplate& tmpl,
                         const EndpointConfig& cfg, int* attempts = nullptr);

struct StreamOptions {
  /// When set and raised, no new chunks are dispatched; in-flight requests drain.
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(const GenerationLog&)> progress;
  std::chrono::milliseconds progress_interval{10000};
};

/// Rephrases every chunk with at most cfg.max_in_flight outstanding requests.
/// Results reach `sink` on the calling thread in completion order; each
/// dispatched chunk yields exactly one RawRephrase or FailureRecord.
GenerationLog rephrase_stream(std::span<const Chunk> chunks, const PromptTemplate& tmpl,
                              const EndpointConfig& cfg,
                              const std::function<void(RephraseResult&&)>& sink,
                              const StreamOptions& options = {});

/// Shard representation of a raw rephrase: id "<parent>#<index>", source
/// "synthetic-<style>", provenance in meta. Latency is not stored so reruns
/// against a deterministic endpoint give identical shards.
Document to_document(const RawRephrase& r);
RawRephrase raw_rephrase_from_document(const Document& doc);

nlohmann::ordered_json to_json(const FailureRecord& f);
nlohmann::ordered_json to_json(const GenerationLog& log);

}  // namespace wrapforge
