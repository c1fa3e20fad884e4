#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wrapforge/corpus_io.hpp"
#include "wrapforge/output_filter.hpp"

namespace wrapforge {

/// Pair constructions for the leakage analysis: a rephrase against its
/// source, and three real-only baselines.
enum class PairingStrategy { SynthReal, RandomRealReal, HalfVsFull, HalfVsHalf };

std::string to_string(PairingStrategy s);
PairingStrategy parse_pairing_strategy(std::string_view s);

struct TextPair {
  std::string left_id;
  std::string right_id;
  std::string left;
  std::string right;

  friend bool operator==(const TextPair&, const TextPair&) = default;
};

struct PairingResult {
  std::vector<TextPair> pairs;
  std::vector<std::string> skipped;  // ids that could not form a pair
};

/// Splits by whitespace tokens into two slices of the original text; the
/// first half takes the extra token when the count is odd.
std::pair<std::string, std::string> split_halves(std::string_view text);

/// SynthReal: (rephrase, parent) per synthetic record, missing parents skipped.
/// RandomRealReal: one pair per real document i with partner
///   (i + 1 + r % (n - 1)) % n, r drawn from std::mt19937_64(seed).
/// HalfVsFull: (first half, full document). HalfVsHalf: (first, second half).
/// Half strategies skip documents with fewer than two tokens.
/// Throws std::invalid_argument for an empty corpus or RandomRealReal with n < 2.
PairingResult make_pairs(std::span<const Document> real, std::span<const SyntheticRecord> synthetic,
                         PairingStrategy strategy, std::uint64_t seed = 0);

}  // namespace wrapforge
