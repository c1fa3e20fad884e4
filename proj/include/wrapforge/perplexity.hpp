#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wrapforge {

/// Summed natural-log loss over a domain's tokens.
struct DomainLossRecord {
  std::string domain;
  double loss_sum = 0.0;
  std::size_t token_count = 1;

  /// Throws std::invalid_argument unless token_count >= 1 and loss_sum is finite and >= 0.
  void validate() const;
};

inline constexpr double kPerplexityLossCap = 20.0;

/// exp(min(20, loss_sum / token_count)).
double macro_perplexity(const DomainLossRecord& r);

struct DomainWeightTable {
  std::map<std::string, double> entries;
  bool normalized = false;

  double raw_sum() const;
};

/// Parses `domain<TAB>percent` lines ('#' comments, blank lines ignored; a
/// line without a tab splits at its last run of spaces). Duplicate domains or
/// negative weights throw std::invalid_argument.
DomainWeightTable parse_weight_table(std::string_view content);
DomainWeightTable load_weight_table(const std::filesystem::path& path);

/// Per-domain validation ratios (percent) of the 21 Pile evaluation domains.
DomainWeightTable builtin_pile_table();
/// TSV rendering of builtin_pile_table(), with a header comment.
std::string builtin_pile_table_tsv();

/// "builtin:pile" or a file path.
DomainWeightTable resolve_weight_table(std::string_view arg);

/// Restricts to `include` and rescales to sum to 1. Throws on an empty or
/// unknown include set, or when the included weights are all zero.
DomainWeightTable normalize_weights(const DomainWeightTable& table, const std::set<std::string>& include);

/// Sum over records of w_d * macro_perplexity(record_d), with the table
/// normalized over exactly the record domains. Throws std::invalid_argument
/// naming any domain missing from the table, and on duplicate records.
double weighted_average_perplexity(std::span<const DomainLossRecord> records,
                                   const DomainWeightTable& table);

/// Sums loss and tokens of records sharing a domain.
std::vector<DomainLossRecord> aggregate_by_domain(std::span<const DomainLossRecord> records);

/// Newline-delimited JSON with keys domain, loss_sum, token_count and an
/// optional log_base ("e", "2", "10" or a number); losses in other bases are
/// converted to natural log.
std::vector<DomainLossRecord> load_loss_records(const std::filesystem::path& path);
std::vector<DomainLossRecord> parse_loss_records(std::string_view content);

struct PerplexityRow {
  std::string domain;
  double loss_sum = 0;
  std::size_t token_count = 0;
  double mean_loss = 0;
  double perplexity = 0;
  double weight = 0;
};

struct PerplexityReport {
  std::vector<PerplexityRow> rows;  // sorted by domain
  double weighted_average = 0;

  nlohmann::ordered_json to_json() const;
  /// Aligned plain-text table ending with a "weighted_avg" row.
  std::string to_text() const;
};

PerplexityReport perplexity_report(std::span<const DomainLossRecord> records,
                                   const DomainWeightTable& table);

}  // namespace wrapforge
