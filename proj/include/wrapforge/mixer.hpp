#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wrapforge/corpus_io.hpp"

namespace wrapforge {

enum class MixUnit { Documents, Tokens };
enum class ExhaustionPolicy { TruncateAll, CycleExhausted, Error };

std::string to_string(MixUnit unit);
std::string to_string(ExhaustionPolicy policy);
MixUnit parse_mix_unit(std::string_view s);
ExhaustionPolicy parse_exhaustion_policy(std::string_view s);

struct MixComponent {
  std::string label;
  std::uint64_t weight = 1;
  bool real = true;  // counts toward real-token accounting
  std::vector<std::filesystem::path> shards;  // optional; may come from a SourceMap instead

  friend bool operator==(const MixComponent&, const MixComponent&) = default;
};

struct MixSpec {
  std::vector<MixComponent> components;
  std::uint64_t seed = 0;
  MixUnit unit = MixUnit::Documents;
  ExhaustionPolicy policy = ExhaustionPolicy::TruncateAll;
  std::size_t shuffle_window = 100000;

  /// Throws std::invalid_argument: no components, zero weight, duplicate labels.
  void validate() const;
  std::set<std::string> real_labels() const;
  friend bool operator==(const MixSpec&, const MixSpec&) = default;
};

/// Parses the key=value spec format:
///
///     seed = 42
///     unit = documents            # or tokens
///     policy = truncate-all       # cycle-exhausted | error
///     shuffle_window = 100000
///     [component c4]
///     weight = 1
///     kind = real                 # or synthetic
///     shards = c4-00000.jsonl, c4-00001.jsonl
///
/// Relative shard paths resolve against `base_dir`.
MixSpec parse_mix_spec(std::string_view content, const std::filesystem::path& base_dir = {});
MixSpec load_mix_spec(const std::filesystem::path& path);
std::string serialize_mix_spec(const MixSpec& spec);
nlohmann::ordered_json to_json(const MixSpec& spec);

using SourceMap = std::map<std::string, std::vector<std::filesystem::path>>;

/// Shard lists from the spec's own `shards` entries.
SourceMap sources_from_spec(const MixSpec& spec);

struct SourceCounts {
  std::size_t documents = 0;
  std::size_t tokens = 0;
  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct MixReport {
  std::map<std::string, SourceCounts> per_source;
  /// Per component in spec order: emitted amount (in the spec unit) scaled so
  /// the first component reads as its weight. Equals the weights exactly when
  /// the output is exactly proportional.
  std::vector<double> realized_ratio;
  std::size_t real_token_total = 0;

  friend bool operator==(const MixReport&, const MixReport&) = default;
};

nlohmann::ordered_json to_json(const MixReport& report);
MixReport mix_report_from_json(const nlohmann::json& j);

class MixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interleaves the sources per spec and passes each document to `sink`.
///
/// Each source is shuffled in windows of `shuffle_window` documents with a
/// seed derived from (spec.seed, label). In documents unit a fixed pattern
/// holding every label `weight` times (order shuffled once by the seed)
/// repeats, so every run of sum(weights) consecutive outputs has exactly
/// `weight` items per label; only whole periods are emitted. In tokens unit
/// the next document comes from the label with the lowest tokens/weight.
/// Emitted documents have `source` set to their component label; repeats
/// from a cycled source get an "@cycleN" id suffix and meta "repeat_of".
MixReport build_mix(const MixSpec& spec, const SourceMap& sources,
                    const std::function<void(const Document&)>& sink);

/// Sum of whitespace tokens over documents whose source is a real label,
/// counting each distinct document (meta "repeat_of" or id) once.
std::size_t real_token_accounting(std::span<const Document> docs,
                                  const std::set<std::string>& real_labels);
/// Same over source shards; every real label must exist in `sources`.
std::size_t real_token_accounting(const SourceMap& sources, const std::set<std::string>& real_labels);

/// Re-derives the report from output shards alone.
MixReport derive_mix_report(std::span<const std::filesystem::path> shards, const MixSpec& spec);

/// Re-derives the report and checks it against `expected` (when given) and,
/// in documents unit, that counts are proportional to the weights. Throws
/// MixError listing every differing source.
MixReport validate_mix(std::span<const std::filesystem::path> shards, const MixSpec& spec,
                       const std::optional<MixReport>& expected = std::nullopt);

}  // namespace wrapforge
