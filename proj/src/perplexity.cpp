#include "wrapforge/perplexity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

// Validation ratios of the evaluation split. EuroParl (1.1) is excluded from
// evaluation, so the 21 rows sum to 97.2 rather than 100.
constexpr std::pair<const char*, double> kPileRatios[] = {
    {"ArXiv", 10.4},          {"BookCorpus2", 0.8},      {"Books3", 11.8},
    {"Pile-CC", 14.0},        {"Enron", 0.1},            {"FreeLaw", 5.3},
    {"Github", 10.9},         {"Gutenberg", 1.5},        {"Hackernews", 0.6},
    {"DM-Mathematics", 2.0},  {"NIH", 0.2},              {"OpenSubtitles", 1.3},
    {"OpenWebText2", 8.2},    {"PhilPapers", 0.7},       {"PubMed-Abstracts", 0.7},
    {"PubMed-Central", 14.9}, {"StackExchange", 5.8},    {"Ubuntu", 1.3},
    {"USPTO", 2.7},           {"Wikipedia", 3.4},        {"YoutubeSubtitles", 0.6},
};

double parse_double(std::string_view s, const std::string& what) {
  s = trim(s);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::invalid_argument(what + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

double log_base_factor(const nlohmann::json& j) {
  if (!j.contains("log_base")) return 1.0;
  const auto& b = j.at("log_base");
  double base = 0;
  if (b.is_string()) {
    const auto s = b.get<std::string>();
    if (s == "e") return 1.0;
    base = parse_double(s, "log_base");
  } else if (b.is_number()) {
    base = b.get<double>();
  } else {
    throw std::invalid_argument("log_base must be a string or number");
  }
  if (!(base > 0) || base == 1.0) throw std::invalid_argument("log_base must be positive and != 1");
  return std::log(base);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void DomainLossRecord::validate() const {
  if (domain.empty()) throw std::invalid_argument("loss record with empty domain");
  if (token_count < 1) throw std::invalid_argument("domain '" + domain + "': token_count must be >= 1");
  if (!std::isfinite(loss_sum) || loss_sum < 0) {
    throw std::invalid_argument("domain '" + domain + "': loss_sum must be finite and >= 0");
  }
}

double macro_perplexity(const DomainLossRecord& r) {
  r.validate();
  return std::exp(std::min(kPerplexityLossCap, r.loss_sum / static_cast<double>(r.token_count)));
}

double DomainWeightTable::raw_sum() const {
  double s = 0;
  for (const auto& [_, w] : entries) s += w;
  return s;
}

DomainWeightTable parse_weight_table(std::string_view content) {
  DomainWeightTable table;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::size_t cut = line.find('\t');
    if (cut == std::string_view::npos) {
      cut = line.find_last_of(' ');
      if (cut == std::string_view::npos) {
        throw std::invalid_argument("weight table line " + std::to_string(line_no) + ": expected 'domain<TAB>percent'");
      }
    }
    const std::string domain(trim(line.substr(0, cut)));
    const double weight = parse_double(line.substr(cut + 1), "weight table line " + std::to_string(line_no));
    if (domain.empty()) throw std::invalid_argument("weight table line " + std::to_string(line_no) + ": empty domain");
    if (weight < 0 || !std::isfinite(weight)) {
      throw std::invalid_argument("weight table: negative weight for '" + domain + "'");
    }
    if (!table.entries.emplace(domain, weight).second) {
      throw std::invalid_argument("weight table: duplicate domain '" + domain + "'");
    }
  }
  return table;
}

DomainWeightTable load_weight_table(const std::filesystem::path& path) {
  return parse_weight_table(read_file(path));
}

DomainWeightTable builtin_pile_table() {
  DomainWeightTable t;
  for (const auto& [domain, pct] : kPileRatios) t.entries.emplace(domain, pct);
  return t;
}

std::string builtin_pile_table_tsv() {
  std::string out =
      "# Pile evaluation ratios (percent of the first 10,000 validation documents).\n"
      "# 21 domains; EuroParl is excluded from evaluation, so the column sums to 97.2.\n"
      "# Weights are renormalized over the domains present in a run.\n";
  for (const auto& [domain, pct] : kPileRatios) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", pct);
    out += std::string(domain) + "\t" + buf + "\n";
  }
  return out;
}

DomainWeightTable resolve_weight_table(std::string_view arg) {
  if (arg == "builtin:pile") return builtin_pile_table();
  return load_weight_table(std::filesystem::path(std::string(arg)));
}

DomainWeightTable normalize_weights(const DomainWeightTable& table, const std::set<std::string>& include) {
  if (include.empty()) throw std::invalid_argument("normalize_weights: empty include set");
  DomainWeightTable out;
  double sum = 0;
  for (const auto& d : include) {
    auto it = table.entries.find(d);
    if (it == table.entries.end()) throw std::invalid_argument("domain '" + d + "' not in weight table");
    out.entries.emplace(d, it->second);
    sum += it->second;
  }
  if (!(sum > 0)) throw std::invalid_argument("normalize_weights: included weights are all zero");
  for (auto& [_, w] : out.entries) w /= sum;
  out.normalized = true;
  return out;
}

double weighted_average_perplexity(std::span<const DomainLossRecord> records,
                                   const DomainWeightTable& table) {
  return perplexity_report(records, table).weighted_average;
}

std::vector<DomainLossRecord> aggregate_by_domain(std::span<const DomainLossRecord> records) {
  std::map<std::string, DomainLossRecord> by_domain;
  for (const auto& r : records) {
    r.validate();
    auto [it, inserted] = by_domain.try_emplace(r.domain, r);
    if (!inserted) {
      it->second.loss_sum += r.loss_sum;
      it->second.token_count += r.token_count;
    }
  }
  std::vector<DomainLossRecord> out;
  for (auto& [_, r] : by_domain) out.push_back(std::move(r));
  return out;
}

std::vector<DomainLossRecord> parse_loss_records(std::string_view content) {
  std::vector<DomainLossRecord> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(raw);
      DomainLossRecord r;
      r.domain = j.at("domain").get<std::string>();
      r.loss_sum = j.at("loss_sum").get<double>() * log_base_factor(j);
      const auto& tc = j.at("token_count");
      if (!tc.is_number_unsigned()) throw std::invalid_argument("token_count must be a positive integer");
      r.token_count = tc.get<std::size_t>();
      r.validate();
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::invalid_argument("loss records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DomainLossRecord> load_loss_records(const std::filesystem::path& path) {
  return parse_loss_records(read_file(path));
}

PerplexityReport perplexity_report(std::span<const DomainLossRecord> records,
                                   const DomainWeightTable& table) {
  if (records.empty()) throw std::invalid_argument("no domains");
  std::set<std::string> domains;
  std::vector<std::string> missing;
  for (const auto& r : records) {
    r.validate();
    if (!domains.insert(r.domain).second) {
      throw std::invalid_argument("duplicate record for domain '" + r.domain + "'");
    }
    if (!table.entries.count(r.domain)) missing.push_back(r.domain);
  }
  if (!missing.empty()) {
    std::string msg = "domains missing from weight table:";
    for (const auto& d : missing) msg += " " + d;
    throw std::invalid_argument(msg);
  }
  const DomainWeightTable weights = normalize_weights(table, domains);

  PerplexityReport report;
  for (const auto& r : records) {
    PerplexityRow row;
    row.domain = r.domain;
    row.loss_sum = r.loss_sum;
    row.token_count = r.token_count;
    row.mean_loss = r.loss_sum / static_cast<double>(r.token_count);
    row.perplexity = macro_perplexity(r);
    row.weight = weights.entries.at(r.domain);
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const PerplexityRow& a, const PerplexityRow& b) { return a.domain < b.domain; });
  for (const auto& row : report.rows) report.weighted_average += row.weight * row.perplexity;
  return report;
}

nlohmann::ordered_json PerplexityReport::to_json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"domain", r.domain},
                         {"loss_sum", r.loss_sum},
                         {"token_count", r.token_count},
                         {"mean_loss", r.mean_loss},
                         {"perplexity", r.perplexity},
                         {"weight", r.weight}});
  }
  return {{"rows", rows_json}, {"weighted_avg", weighted_average}};
}

std::string PerplexityReport::to_text() const {
  std::size_t width = std::string_view("weighted_avg").size();
  for (const auto& r : rows) width = std::max(width, r.domain.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %14s\n", static_cast<int>(width), "domain", "weight", "perplexity");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %10.6f  %14.6f\n", static_cast<int>(width), r.domain.c_str(),
                  r.weight, r.perplexity);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s  %10.6f  %14.6f\n", static_cast<int>(width), "weighted_avg", 1.0,
                weighted_average);
  out += buf;
  return out;
}

}  // namespace wrapforge
