#include "wrapforge/pairing.hpp"

#include <random>
#include <stdexcept>
#include <unordered_map>

#include "wrapforge/text.hpp"

namespace wrapforge {

std::string to_string(PairingStrategy s) {
  switch (s) {
    case PairingStrategy::SynthReal: return "synth-real";
    case PairingStrategy::RandomRealReal: return "random-real-real";
    case PairingStrategy::HalfVsFull: return "half-vs-full";
    case PairingStrategy::HalfVsHalf: return "half-vs-half";
  }
  return "unknown";
}

PairingStrategy parse_pairing_strategy(std::string_view s) {
  for (auto p : {PairingStrategy::SynthReal, PairingStrategy::RandomRealReal,
                 PairingStrategy::HalfVsFull, PairingStrategy::HalfVsHalf}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown pairing strategy: " + std::string(s));
}

std::pair<std::string, std::string> split_halves(std::string_view text) {
  const auto tokens = tokenize(text, TokenScheme::WhitespaceWords);
  if (tokens.empty()) return {};
  const std::size_t first_count = (tokens.size() + 1) / 2;
  const TextSpan first{tokens.front().begin, tokens[first_count - 1].end};
  if (first_count == tokens.size()) return {std::string(first.view(text)), std::string()};
  const TextSpan second{tokens[first_count].begin, tokens.back().end};
  return {std::string(first.view(text)), std::string(second.view(text))};
}

PairingResult make_pairs(std::span<const Document> real, std::span<const SyntheticRecord> synthetic,
                         PairingStrategy strategy, std::uint64_t seed) {
  PairingResult out;
  switch (strategy) {
    case PairingStrategy::SynthReal: {
      if (synthetic.empty()) throw std::invalid_argument("make_pairs: no synthetic records");
      std::unordered_map<std::string, const Document*> parents;
      for (const auto& d : real) parents.emplace(d.id, &d);
      for (const auto& s : synthetic) {
        auto it = parents.find(s.parent_id);
        if (it == parents.end()) {
          out.skipped.push_back(s.id);
          continue;
        }
        out.pairs.push_back({s.id, it->second->id, s.text, it->second->text});
      }
      break;
    }
    case PairingStrategy::RandomRealReal: {
      const std::size_t n = real.size();
      if (n < 2) throw std::invalid_argument("make_pairs: random pairs need at least two documents");
      std::mt19937_64 rng(seed);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1 + rng() % (n - 1)) % n;
        out.pairs.push_back({real[i].id, real[j].id, real[i].text, real[j].text});
      }
      break;
    }
    case PairingStrategy::HalfVsFull:
    case PairingStrategy::HalfVsHalf: {
      if (real.empty()) throw std::invalid_argument("make_pairs: empty corpus");
      for (const auto& d : real) {
        auto [first, second] = split_halves(d.text);
        if (second.empty()) {
          out.skipped.push_back(d.id);
          continue;
        }
        if (strategy == PairingStrategy::HalfVsFull) {
          out.pairs.push_back({d.id + ":first-half", d.id, std::move(first), d.text});
        } else {
          out.pairs.push_back({d.id + ":first-half", d.id + ":second-half", std::move(first),
                               std::move(second)});
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace wrapforge
