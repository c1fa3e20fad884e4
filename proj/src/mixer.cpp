#include "wrapforge/mixer.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "wrapforge/digest.hpp"
#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

std::uint64_t label_seed(std::uint64_t seed, const std::string& label) {
  const std::string hex = sha256_hex(label).substr(0, 16);
  return seed ^ std::stoull(hex, nullptr, 16);
}

// Reads one component's shards in order, shuffling within a bounded window.
class SourceStream {
 public:
  SourceStream(std::string label, std::vector<std::filesystem::path> shards, std::size_t window,
               std::uint64_t seed)
      : label_(std::move(label)), shards_(std::move(shards)), window_(std::max<std::size_t>(window, 1)),
        rng_(seed) {}

  const std::string& label() const { return label_; }
  std::size_t passes_completed() const { return passes_; }

  /// Next document of the current pass, or nullopt at the end of the pass.
  std::optional<Document> next() {
    if (buffer_.empty()) refill();
    if (buffer_.empty()) return std::nullopt;
    Document d = std::move(buffer_.front());
    buffer_.pop_front();
    return d;
  }

  bool at_end() {
    if (buffer_.empty()) refill();
    return buffer_.empty();
  }

  /// Starts another pass over the same shards.
  void restart() {
    ++passes_;
    shard_index_ = 0;
    reader_.reset();
    buffer_.clear();
  }

 private:
  void refill() {
    std::vector<Document> window;
    while (window.size() < window_) {
      if (!reader_) {
        if (shard_index_ >= shards_.size()) break;
        reader_ = std::make_unique<ShardReader>(shards_[shard_index_++], ReadMode::Strict);
      }
      auto d = reader_->next();
      if (!d) {
        reader_.reset();
        continue;
      }
      window.push_back(std::move(*d));
    }
    for (std::size_t i = window.size(); i > 1; --i) {
      const std::size_t j = rng_() % i;
      std::swap(window[i - 1], window[j]);
    }
    for (auto& d : window) buffer_.push_back(std::move(d));
  }

  std::string label_;
  std::vector<std::filesystem::path> shards_;
  std::size_t window_;
  std::mt19937_64 rng_;
  std::size_t shard_index_ = 0;
  std::unique_ptr<ShardReader> reader_;
  std::deque<Document> buffer_;
  std::size_t passes_ = 0;
};

Document relabel(Document d, const std::string& label, std::size_t pass) {
  if (d.source != label) d.meta["origin_source"] = d.source;
  d.source = label;
  if (pass > 0) {
    if (!d.meta.count("repeat_of")) d.meta["repeat_of"] = d.id;
    d.id += "@cycle" + std::to_string(pass);
  }
  return d;
}

std::vector<double> realized_ratio(const MixSpec& spec, const std::map<std::string, SourceCounts>& counts) {
  std::vector<double> out;
  auto amount = [&](const MixComponent& c) {
    auto it = counts.find(c.label);
    if (it == counts.end()) return 0.0;
    return static_cast<double>(spec.unit == MixUnit::Documents ? it->second.documents
                                                               : it->second.tokens);
  };
  const double first = amount(spec.components.front());
  for (const auto& c : spec.components) {
    out.push_back(first > 0 ? amount(c) * static_cast<double>(spec.components.front().weight) / first
                            : 0.0);
  }
  return out;
}

std::string document_key(const Document& d) {
  auto it = d.meta.find("repeat_of");
  return it != d.meta.end() ? it->second : d.id;
}

std::map<std::string, std::string> parse_kv_line(std::string_view line) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return {};
  return {{to_lower_ascii(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))}};
}

}  // namespace

std::string to_string(MixUnit unit) { return unit == MixUnit::Documents ? "documents" : "tokens"; }

std::string to_string(ExhaustionPolicy policy) {
  switch (policy) {
    case ExhaustionPolicy::TruncateAll: return "truncate-all";
    case ExhaustionPolicy::CycleExhausted: return "cycle-exhausted";
    case ExhaustionPolicy::Error: return "error";
  }
  return "unknown";
}

MixUnit parse_mix_unit(std::string_view s) {
  if (s == "documents") return MixUnit::Documents;
  if (s == "tokens") return MixUnit::Tokens;
  throw std::invalid_argument("unknown mix unit: " + std::string(s));
}

ExhaustionPolicy parse_exhaustion_policy(std::string_view s) {
  if (s == "truncate-all") return ExhaustionPolicy::TruncateAll;
  if (s == "cycle-exhausted") return ExhaustionPolicy::CycleExhausted;
  if (s == "error") return ExhaustionPolicy::Error;
  throw std::invalid_argument("unknown exhaustion policy: " + std::string(s));
}

void MixSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("mix spec has no components");
  std::set<std::string> labels;
  for (const auto& c : components) {
    if (c.label.empty()) throw std::invalid_argument("mix component with empty label");
    if (c.weight < 1) throw std::invalid_argument("mix component '" + c.label + "' has weight 0");
    if (!labels.insert(c.label).second) {
      throw std::invalid_argument("duplicate mix component '" + c.label + "'");
    }
  }
  if (shuffle_window < 1) throw std::invalid_argument("shuffle_window must be >= 1");
}

std::set<std::string> MixSpec::real_labels() const {
  std::set<std::string> out;
  for (const auto& c : components) {
    if (c.real) out.insert(c.label);
  }
  return out;
}

MixSpec parse_mix_spec(std::string_view content, const std::filesystem::path& base_dir) {
  MixSpec spec;
  MixComponent* current = nullptr;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string raw;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("mix spec line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      std::string_view inner = trim(line.substr(1, line.size() - 2));
      constexpr std::string_view kPrefix = "component";
      if (inner.substr(0, kPrefix.size()) != kPrefix) fail("unknown section '" + std::string(inner) + "'");
      const std::string label(trim(inner.substr(kPrefix.size())));
      if (label.empty()) fail("component section without a label");
      spec.components.push_back({label, 1, true, {}});
      current = &spec.components.back();
      continue;
    }
    auto kv = parse_kv_line(line);
    if (kv.empty()) fail("expected key = value");
    const auto& [key, value] = *kv.begin();
    auto number = [&]() -> std::uint64_t {
      std::uint64_t v = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) {
        fail("'" + key + "' must be a non-negative integer, got '" + value + "'");
      }
      return v;
    };
    if (!current) {
      if (key == "seed") spec.seed = number();
      else if (key == "shuffle_window") spec.shuffle_window = number();
      else if (key == "unit" && (value == "documents" || value == "tokens")) spec.unit = parse_mix_unit(value);
      else if (key == "policy" && (value == "truncate-all" || value == "cycle-exhausted" || value == "error"))
        spec.policy = parse_exhaustion_policy(value);
      else fail("bad entry '" + key + " = " + value + "'");
    } else if (key == "weight") {
      current->weight = number();
    } else if (key == "kind" && (value == "real" || value == "synthetic")) {
      current->real = value == "real";
    } else if (key == "shards") {
      for (const auto& part : split(value, ',')) {
        const std::string_view p = trim(part);
        if (p.empty()) continue;
        std::filesystem::path path{std::string(p)};
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        current->shards.push_back(path);
      }
    } else {
      fail("bad component entry '" + key + " = " + value + "'");
    }
  }
  spec.validate();
  return spec;
}

MixSpec load_mix_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mix spec: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mix_spec(ss.str(), path.parent_path());
}

std::string serialize_mix_spec(const MixSpec& spec) {
  std::ostringstream out;
  out << "seed = " << spec.seed << "\n"
      << "unit = " << to_string(spec.unit) << "\n"
      << "policy = " << to_string(spec.policy) << "\n"
      << "shuffle_window = " << spec.shuffle_window << "\n";
  for (const auto& c : spec.components) {
    out << "\n[component " << c.label << "]\n"
        << "weight = " << c.weight << "\n"
        << "kind = " << (c.real ? "real" : "synthetic") << "\n";
    if (!c.shards.empty()) {
      out << "shards = ";
      for (std::size_t i = 0; i < c.shards.size(); ++i) out << (i ? ", " : "") << c.shards[i].string();
      out << "\n";
    }
  }
  return out.str();
}

nlohmann::ordered_json to_json(const MixSpec& spec) {
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const auto& c : spec.components) {
    nlohmann::ordered_json shards = nlohmann::ordered_json::array();
    for (const auto& s : c.shards) shards.push_back(s.string());
    comps.push_back({{"label", c.label}, {"weight", c.weight}, {"real", c.real}, {"shards", shards}});
  }
  return {{"seed", spec.seed},
          {"unit", to_string(spec.unit)},
          {"policy", to_string(spec.policy)},
          {"shuffle_window", spec.shuffle_window},
          {"components", comps}};
}

SourceMap sources_from_spec(const MixSpec& spec) {
  SourceMap out;
  for (const auto& c : spec.components) out[c.label] = c.shards;
  return out;
}

nlohmann::ordered_json to_json(const MixReport& report) {
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [label, c] : report.per_source) {
    per[label] = {{"documents", c.documents}, {"tokens", c.tokens}};
  }
  return {{"per_source", per},
          {"realized_ratio", report.realized_ratio},
          {"real_token_total", report.real_token_total}};
}

MixReport mix_report_from_json(const nlohmann::json& j) {
  MixReport r;
  for (const auto& [label, c] : j.at("per_source").items()) {
    r.per_source[label] = {c.at("documents").get<std::size_t>(), c.at("tokens").get<std::size_t>()};
  }
  r.realized_ratio = j.at("realized_ratio").get<std::vector<double>>();
  r.real_token_total = j.at("real_token_total").get<std::size_t>();
  return r;
}

MixReport build_mix(const MixSpec& spec, const SourceMap& sources,
                    const std::function<void(const Document&)>& sink) {
  spec.validate();
  if (sources.empty()) throw std::invalid_argument("no sources given");
  std::vector<SourceStream> streams;
  for (const auto& c : spec.components) {
    auto it = sources.find(c.label);
    if (it == sources.end() || it->second.empty()) {
      throw std::invalid_argument("no source shards for component '" + c.label + "'");
    }
    streams.emplace_back(c.label, it->second, spec.shuffle_window, label_seed(spec.seed, c.label));
  }
  const std::size_t k = streams.size();

  MixReport report;
  for (const auto& c : spec.components) report.per_source[c.label] = {};
  std::set<std::string> real_seen;
  const std::set<std::string> real = spec.real_labels();

  auto emit = [&](Document out) {
    auto& counts = report.per_source[out.source];
    ++counts.documents;
    const std::size_t tokens = count_tokens(out.text, TokenScheme::WhitespaceWords);
    counts.tokens += tokens;
    if (real.count(out.source) && real_seen.insert(document_key(out)).second) {
      report.real_token_total += tokens;
    }
    sink(out);
  };

  // True once every source has been fully read at least once.
  auto all_wrapped = [&] {
    return std::all_of(streams.begin(), streams.end(),
                       [](const SourceStream& s) { return s.passes_completed() > 0; });
  };
  // Fetches the next document for a component, applying the exhaustion
  // policy. nullopt means the mix ends here.
  auto fetch = [&](std::size_t comp) -> std::optional<Document> {
    SourceStream& s = streams[comp];
    auto d = s.next();
    if (!d) {
      switch (spec.policy) {
        case ExhaustionPolicy::TruncateAll:
          return std::nullopt;
        case ExhaustionPolicy::Error:
          throw MixError("source '" + s.label() + "' exhausted before the others");
        case ExhaustionPolicy::CycleExhausted:
          s.restart();
          if (all_wrapped()) return std::nullopt;
          d = s.next();
          if (!d) return std::nullopt;
          break;
      }
    }
    return relabel(std::move(*d), s.label(), s.passes_completed());
  };

  if (spec.unit == MixUnit::Documents) {
    std::vector<std::size_t> pattern;
    for (std::size_t c = 0; c < k; ++c) pattern.insert(pattern.end(), spec.components[c].weight, c);
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = pattern.size(); i > 1; --i) std::swap(pattern[i - 1], pattern[rng() % i]);

    for (;;) {
      if (spec.policy == ExhaustionPolicy::Error) {
        std::size_t ended = 0;
        for (auto& s : streams) ended += s.at_end() ? 1 : 0;
        if (ended == k) break;
      }
      if (spec.policy == ExhaustionPolicy::CycleExhausted) {
        for (auto& s : streams) {
          if (s.at_end()) s.restart();
        }
        if (all_wrapped()) break;
      }
      std::vector<std::deque<Document>> period(k);
      bool complete = true;
      for (std::size_t c = 0; c < k && complete; ++c) {
        for (std::uint64_t w = 0; w < spec.components[c].weight; ++w) {
          auto d = fetch(c);
          if (!d) {
            complete = false;
            break;
          }
          period[c].push_back(std::move(*d));
        }
      }
      if (!complete) break;
      for (std::size_t c : pattern) {
        emit(std::move(period[c].front()));
        period[c].pop_front();
      }
    }
  } else {
    std::vector<std::size_t> order(k);
    for (std::size_t c = 0; c < k; ++c) order[c] = c;
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    std::vector<std::size_t> emitted(k, 0);
    for (;;) {
      if (spec.policy == ExhaustionPolicy::Error) {
        std::size_t ended = 0;
        for (auto& s : streams) ended += s.at_end() ? 1 : 0;
        if (ended == k) break;
      }
      // Lowest tokens/weight wins; cross-multiplied to stay exact.
      std::size_t best = order[0];
      for (std::size_t c : order) {
        const auto lhs = static_cast<unsigned __int128>(emitted[c]) * spec.components[best].weight;
        const auto rhs = static_cast<unsigned __int128>(emitted[best]) * spec.components[c].weight;
        if (lhs < rhs) best = c;
      }
      auto d = fetch(best);
      if (!d) break;
      emitted[best] += count_tokens(d->text, TokenScheme::WhitespaceWords);
      emit(std::move(*d));
    }
  }

  report.realized_ratio = realized_ratio(spec, report.per_source);
  return report;
}

std::size_t real_token_accounting(std::span<const Document> docs,
                                  const std::set<std::string>& real_labels) {
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& d : docs) {
    if (!real_labels.count(d.source)) continue;
    if (!seen.insert(document_key(d)).second) continue;
    total += count_tokens(d.text, TokenScheme::WhitespaceWords);
  }
  return total;
}

std::size_t real_token_accounting(const SourceMap& sources, const std::set<std::string>& real_labels) {
  std::size_t total = 0;
  std::set<std::string> seen;
  for (const auto& label : real_labels) {
    auto it = sources.find(label);
    if (it == sources.end()) throw std::invalid_argument("unknown source label '" + label + "'");
    for (const auto& path : it->second) {
      ShardReader reader(path, ReadMode::Strict);
      while (auto d = reader.next()) {
        if (!seen.insert(label + '\x1f' + document_key(*d)).second) continue;
        total += count_tokens(d->text, TokenScheme::WhitespaceWords);
      }
    }
  }
  return total;
}

MixReport derive_mix_report(std::span<const std::filesystem::path> shards, const MixSpec& spec) {
  spec.validate();
  MixReport report;
  for (const auto& c : spec.components) report.per_source[c.label] = {};
  const std::set<std::string> real = spec.real_labels();
  std::set<std::string> real_seen;
  for (const auto& path : shards) {
    ShardReader reader(path, ReadMode::Strict);
    while (auto d = reader.next()) {
      auto it = report.per_source.find(d->source);
      if (it == report.per_source.end()) {
        throw MixError(path.string() + ": document '" + d->id + "' has unknown source '" +
                       d->source + "'");
      }
      const std::size_t tokens = count_tokens(d->text, TokenScheme::WhitespaceWords);
      ++it->second.documents;
      it->second.tokens += tokens;
      if (real.count(d->source) && real_seen.insert(document_key(*d)).second) {
        report.real_token_total += tokens;
      }
    }
  }
  report.realized_ratio = realized_ratio(spec, report.per_source);
  return report;
}

MixReport validate_mix(std::span<const std::filesystem::path> shards, const MixSpec& spec,
                       const std::optional<MixReport>& expected) {
  MixReport actual = derive_mix_report(shards, spec);
  std::vector<std::string> diffs;
  if (expected) {
    for (const auto& c : spec.components) {
      const SourceCounts got = actual.per_source.at(c.label);
      auto it = expected->per_source.find(c.label);
      const SourceCounts want = it == expected->per_source.end() ? SourceCounts{} : it->second;
      if (got.documents != want.documents) {
        diffs.push_back("source '" + c.label + "': documents " + std::to_string(got.documents) +
                        " != expected " + std::to_string(want.documents));
      }
      if (got.tokens != want.tokens) {
        diffs.push_back("source '" + c.label + "': tokens " + std::to_string(got.tokens) +
                        " != expected " + std::to_string(want.tokens));
      }
    }
    if (actual.real_token_total != expected->real_token_total) {
      diffs.push_back("real_token_total " + std::to_string(actual.real_token_total) +
                      " != expected " + std::to_string(expected->real_token_total));
    }
  }
  if (spec.unit == MixUnit::Documents) {
    const auto& first = spec.components.front();
    const std::size_t base = actual.per_source.at(first.label).documents;
    for (const auto& c : spec.components) {
      const std::size_t n = actual.per_source.at(c.label).documents;
      if (static_cast<unsigned __int128>(n) * first.weight !=
          static_cast<unsigned __int128>(base) * c.weight) {
        diffs.push_back("source '" + c.label + "': " + std::to_string(n) +
                        " documents is not in ratio " + std::to_string(c.weight) + ":" +
                        std::to_string(first.weight) + " with '" + first.label + "' (" +
                        std::to_string(base) + ")");
      }
    }
  }
  if (!diffs.empty()) {
    std::string msg = "mix validation failed:";
    for (const auto& d : diffs) msg += "\n  " + d;
    throw MixError(msg);
  }
  return actual;
}

}  // namespace wrapforge
