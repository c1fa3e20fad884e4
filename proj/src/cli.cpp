#include "wrapforge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "wrapforge/cost_model.hpp"
#include "wrapforge/dependency.hpp"
#include "wrapforge/digest.hpp"
#include "wrapforge/distribution.hpp"
#include "wrapforge/embeddings.hpp"
#include "wrapforge/log.hpp"
#include "wrapforge/mixer.hpp"
#include "wrapforge/mock_server.hpp"
#include "wrapforge/output_filter.hpp"
#include "wrapforge/pairing.hpp"
#include "wrapforge/perplexity.hpp"
#include "wrapforge/readability.hpp"
#include "wrapforge/rephrase_client.hpp"
#include "wrapforge/style_prompts.hpp"

namespace wrapforge {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

// Installs SIGINT/SIGTERM handlers for the lifetime of a command.
class InterruptScope {
 public:
  InterruptScope() {
    g_interrupted = false;
    prev_int_ = std::signal(SIGINT, on_interrupt);
    prev_term_ = std::signal(SIGTERM, on_interrupt);
  }
  ~InterruptScope() {
    std::signal(SIGINT, prev_int_);
    std::signal(SIGTERM, prev_term_);
  }
  InterruptScope(const InterruptScope&) = delete;
  InterruptScope& operator=(const InterruptScope&) = delete;

 private:
  void (*prev_int_)(int) = SIG_DFL;
  void (*prev_term_)(int) = SIG_DFL;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Interrupted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string sidecar(const fs::path& p, std::string_view suffix) { return p.string() + std::string(suffix); }

// Every file a run reads or writes, plus the canonical config digest. Carries
// no timestamps so reruns produce the same bytes.
struct Manifest {
  std::string command;
  nlohmann::json config;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  ojson counts = ojson::object();
  std::string status = "ok";

  void write(const fs::path& path) const {
    auto files = [](const std::vector<fs::path>& paths) {
      ojson arr = ojson::array();
      for (const auto& p : paths) {
        const std::string body = read_file(p);
        arr.push_back({{"path", p.string()}, {"bytes", body.size()}, {"sha256", sha256_hex(body)}});
      }
      return arr;
    };
    ojson j;
    j["command"] = command;
    j["version"] = kVersion;
    j["status"] = status;
    j["config_digest"] = config_digest(config);
    j["config"] = config;
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    j["counts"] = counts;
    write_file(path, j.dump(2) + "\n");
    log_info("manifest: " + path.string());
  }
};

std::vector<Document> read_documents(const std::vector<fs::path>& paths, std::size_t* bad_records = nullptr) {
  std::vector<Document> docs;
  std::size_t bad = 0;
  for (const auto& p : paths) {
    auto shard = load_shard(p);
    for (const auto& e : shard.errors) {
      log_warn(p.string() + ":" + std::to_string(e.line) + ": skipped record: " + e.message);
    }
    bad += shard.errors.size();
    for (auto& d : shard.documents) docs.push_back(std::move(d));
  }
  if (bad_records) *bad_records = bad;
  return docs;
}

bool is_shard_of(const std::string& name, const std::string& stem) {
  if (name.size() < stem.size() + 1 + 5 + 6 || name.compare(0, stem.size() + 1, stem + "-") != 0) return false;
  const std::string rest = name.substr(stem.size() + 1);
  if (!std::all_of(rest.begin(), rest.begin() + 5, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return false;
  const std::string tail = rest.substr(5);
  return tail == ".jsonl" || tail == ".jsonl.partial";
}

// Removes earlier `<prefix>-NNNNN.jsonl[.partial]` files so a rerun with fewer
// records leaves no stale shards behind.
void remove_stale_shards(const fs::path& prefix) {
  const fs::path dir = prefix.has_parent_path() ? prefix.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) return;
  const std::string stem = prefix.filename().string();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_shard_of(entry.path().filename().string(), stem)) fs::remove(entry.path());
  }
}

std::vector<fs::path> write_documents(const std::vector<Document>& docs, const fs::path& prefix,
                                      std::size_t max_records) {
  remove_stale_shards(prefix);
  std::vector<fs::path> out;
  for (const auto& m : write_shard(docs, prefix, max_records)) out.emplace_back(m.path);
  if (out.empty()) log_warn("no records to write for " + prefix.string());
  return out;
}

// --- endpoint flags --------------------------------------------------------

struct EndpointFlags {
  std::string endpoint = "http://127.0.0.1:8000";
  std::string model = EndpointConfig{}.model_id;
  int max_new_tokens = EndpointConfig{}.max_new_tokens;
  double temperature = EndpointConfig{}.temperature;
  int timeout_ms = 60000;
  int max_in_flight = EndpointConfig{}.max_in_flight;
  int max_retries = EndpointConfig{}.max_retries;
  int backoff_ms = 200;
  int embedding_batch = EndpointConfig{}.embedding_batch;
  bool single_turn = false;
  std::string api_key;

  void add_to(CLI::App* app, bool chat) {
    app->add_option("--endpoint", endpoint, "Base URL, or 'mock' / 'mock:<mode>' for an in-process mock")
        ->capture_default_str();
    app->add_option("--model", model, "Model id sent with each request")->capture_default_str();
    app->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--max-retries", max_retries, "Retries for 5xx/429/transport errors")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--backoff-ms", backoff_ms, "Initial retry backoff")->capture_default_str();
    app->add_option("--api-key", api_key, "Bearer token");
    if (chat) {
      app->add_option("--max-new-tokens", max_new_tokens, "Generation budget")->capture_default_str();
      app->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
      app->add_flag("--single-turn", single_turn, "Send the preamble inside the user turn");
    } else {
      app->add_option("--embedding-batch", embedding_batch, "Texts per embedding request")->capture_default_str();
    }
  }

  EndpointConfig config(const std::string& base_url) const {
    EndpointConfig c;
    c.base_url = base_url;
    c.model_id = model;
    c.max_new_tokens = max_new_tokens;
    c.temperature = temperature;
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_in_flight = max_in_flight;
    c.max_retries = max_retries;
    c.backoff_initial = std::chrono::milliseconds(backoff_ms);
    c.api_key = api_key;
    c.layout = single_turn ? RoleLayout::SingleTurn : RoleLayout::SplitRoles;
    c.embedding_batch = embedding_batch;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  // The API key never enters a manifest.
  nlohmann::json to_json(bool chat) const {
    nlohmann::json j = {{"endpoint", endpoint},       {"model", model},
                        {"timeout_ms", timeout_ms},   {"max_in_flight", max_in_flight},
                        {"max_retries", max_retries}, {"backoff_ms", backoff_ms}};
    if (chat) {
      j["max_new_tokens"] = max_new_tokens;
      j["temperature"] = temperature;
      j["layout"] = single_turn ? "single-turn" : "split-roles";
    } else {
      j["embedding_batch"] = embedding_batch;
    }
    return j;
  }
};

// A resolved endpoint; owns the mock server when one was requested.
struct Endpoint {
  std::unique_ptr<MockServer> mock;
  std::string url;
};

Endpoint open_endpoint(const std::string& arg, std::string_view default_mock_mode = "echo") {
  Endpoint ep;
  if (arg == "mock" || arg.rfind("mock:", 0) == 0) {
    const std::string mode = arg == "mock" ? std::string(default_mock_mode) : arg.substr(5);
    MockOptions opts;
    try {
      opts = parse_mock_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    ep.mock = std::make_unique<MockServer>(opts);
    ep.url = ep.mock->base_url();
    log_info("in-process mock endpoint at " + ep.url + " (mode " + mode + ")");
  } else {
    try {
      parse_url(arg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    ep.url = arg;
  }
  return ep;
}

// --- rephrase ---------------------------------------------------------------

struct RephraseArgs {
  std::vector<fs::path> inputs;
  fs::path out;
  std::string style;
  EndpointFlags ep;
  std::size_t chunk_tokens = kRephraseTokenBudget;
  std::string token_scheme = "whitespace-words";
  std::size_t max_records = 100000;
  fs::path failures;
  fs::path checkpoint;
  bool resume = false;
  std::size_t stop_after = 0;
  int progress_ms = 10000;

  fs::path failures_path() const { return failures.empty() ? fs::path(sidecar(out, ".failures.jsonl")) : failures; }
  fs::path checkpoint_path() const {
    return checkpoint.empty() ? fs::path(sidecar(out, ".checkpoint.json")) : checkpoint;
  }

  nlohmann::json to_json(const PromptTemplate& tmpl) const {
    nlohmann::json in = nlohmann::json::array();
    for (const auto& p : inputs) in.push_back(p.string());
    return {{"inputs", in},
            {"out", out.string()},
            {"style", tmpl.label()},
            {"prompt_version", tmpl.version},
            {"endpoint", ep.to_json(true)},
            {"chunk_tokens", chunk_tokens},
            {"token_scheme", token_scheme},
            {"max_records", max_records}};
  }
};

FailureRecord failure_from_json(const nlohmann::json& j) {
  return {j.at("parent_id").get<std::string>(), j.at("chunk_index").get<std::size_t>(), j.at("error").get<std::string>(),
          j.at("http_status").get<int>(), j.at("attempts").get<int>()};
}

std::string tokens_per_hour(const GenerationLog& log) {
  if (!(log.finished_at > log.started_at)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f", throughput(log));
  return buf;
}

struct StageOutput {
  std::vector<fs::path> outputs;
  ojson counts = ojson::object();
};

// Chunks, rephrases and writes shards sorted by (parent, chunk). On interrupt
// only parents whose every chunk finished are kept; they go to `.partial`
// shards plus a checkpoint that --resume picks up.
StageOutput rephrase_documents(const std::vector<Document>& docs, const PromptTemplate& tmpl, const EndpointConfig& cfg,
                               const RephraseArgs& a, const std::string& digest) {
  const TokenScheme scheme = parse_token_scheme(a.token_scheme);
  std::vector<Chunk> chunks;
  std::map<std::string, std::size_t> chunks_per_parent;
  for (const auto& d : docs) {
    for (auto& c : chunk_document(d, a.chunk_tokens, scheme)) {
      ++chunks_per_parent[c.parent_id];
      chunks.push_back(std::move(c));
    }
  }

  std::set<std::string> completed;
  std::vector<RawRephrase> ok;
  std::vector<FailureRecord> failed;
  std::vector<fs::path> stale_partials;
  const fs::path checkpoint = a.checkpoint_path();
  std::size_t resumed = 0;
  if (a.resume && fs::exists(checkpoint)) {
    const auto cp = nlohmann::json::parse(read_file(checkpoint));
    if (cp.at("config_digest").get<std::string>() != digest) {
      throw std::runtime_error("checkpoint " + checkpoint.string() + " was written with a different config");
    }
    for (const auto& id : cp.at("completed_parent_ids")) completed.insert(id.get<std::string>());
    for (const auto& p : cp.at("partial_shards")) {
      stale_partials.emplace_back(p.get<std::string>());
      for (const auto& d : load_shard(stale_partials.back(), ReadMode::Strict).documents) {
        ok.push_back(raw_rephrase_from_document(d));
      }
    }
    for (const auto& f : cp.at("failures")) failed.push_back(failure_from_json(f));
    resumed = ok.size() + failed.size();
    log_info("resuming: " + std::to_string(completed.size()) + " parents already complete");
  }

  std::vector<Chunk> pending;
  for (auto& c : chunks) {
    if (!completed.count(c.parent_id)) pending.push_back(c);
  }

  std::map<std::string, std::size_t> done_per_parent;
  std::size_t results = 0;
  StreamOptions opts;
  opts.cancel = &g_interrupted;
  opts.progress_interval = std::chrono::milliseconds(a.progress_ms);
  const std::size_t total = pending.size();
  opts.progress = [&](const GenerationLog& log) {
    log_info("rephrase progress: " + std::to_string(log.requests) + "/" + std::to_string(total) + " chunks, " +
             std::to_string(log.failures) + " failures, " + tokens_per_hour(log) + " tokens/hour");
  };
  const GenerationLog log = rephrase_stream(pending, tmpl, cfg, [&](RephraseResult&& r) {
    if (auto* raw = std::get_if<RawRephrase>(&r)) {
      ++done_per_parent[raw->parent_id];
      ok.push_back(std::move(*raw));
    } else {
      auto& f = std::get<FailureRecord>(r);
      log_warn("chunk " + f.parent_id + "#" + std::to_string(f.chunk_index) + " failed: " + f.error);
      ++done_per_parent[f.parent_id];
      failed.push_back(std::move(f));
    }
    if (a.stop_after > 0 && ++results >= a.stop_after) g_interrupted = true;
  }, opts);
  log_info("rephrase finished: " + std::to_string(log.requests) + " chunks, " + std::to_string(log.failures) +
           " failures, " + std::to_string(log.completion_tokens_total) + " completion tokens, " +
           tokens_per_hour(log) + " tokens/hour");

  auto by_chunk = [](const auto& x, const auto& y) {
    return std::tie(x.parent_id, x.chunk_index) < std::tie(y.parent_id, y.chunk_index);
  };
  StageOutput out;
  const bool interrupted = log.requests < pending.size();
  if (interrupted) {
    for (const auto& [parent, n] : done_per_parent) {
      if (n == chunks_per_parent[parent]) completed.insert(parent);
    }
    std::erase_if(ok, [&](const RawRephrase& r) { return !completed.count(r.parent_id); });
    std::erase_if(failed, [&](const FailureRecord& f) { return !completed.count(f.parent_id); });
    std::sort(ok.begin(), ok.end(), by_chunk);
    std::sort(failed.begin(), failed.end(), by_chunk);
    std::vector<Document> docs_out;
    for (const auto& r : ok) docs_out.push_back(to_document(r));
    ojson cp = {{"config_digest", digest},
                {"completed_parent_ids", completed},
                {"partial_shards", ojson::array()},
                {"failures", ojson::array()}};
    for (const auto& p : write_documents(docs_out, a.out, a.max_records)) {
      const fs::path partial = p.string() + ".partial";
      fs::rename(p, partial);
      cp["partial_shards"].push_back(partial.string());
      out.outputs.push_back(partial);
    }
    for (const auto& f : failed) cp["failures"].push_back(to_json(f));
    write_file(checkpoint, cp.dump(2) + "\n");
    out.outputs.push_back(checkpoint);
  } else {
    std::sort(ok.begin(), ok.end(), by_chunk);
    std::sort(failed.begin(), failed.end(), by_chunk);
    std::vector<Document> docs_out;
    for (const auto& r : ok) docs_out.push_back(to_document(r));
    out.outputs = write_documents(docs_out, a.out, a.max_records);
    std::string failures_body;
    for (const auto& f : failed) failures_body += to_json(f).dump() + "\n";
    write_file(a.failures_path(), failures_body);
    out.outputs.push_back(a.failures_path());
    if (fs::exists(checkpoint)) fs::remove(checkpoint);
  }

  std::size_t prompt_tokens = 0, completion_tokens = 0;
  for (const auto& r : ok) {
    prompt_tokens += r.prompt_tokens;
    completion_tokens += r.completion_tokens;
  }
  out.counts = {{"documents", docs.size()},
                {"chunks", chunks.size()},
                {"rephrased", ok.size()},
                {"failures", failed.size()},
                {"resumed_records", resumed},
                {"prompt_tokens", prompt_tokens},
                {"completion_tokens", completion_tokens},
                {"completed_parents", interrupted ? completed.size() : chunks_per_parent.size()}};
  if (interrupted) {
    out.counts["interrupted"] = true;
    log_warn("interrupted; " + std::to_string(completed.size()) + " complete parents saved, checkpoint at " +
             checkpoint.string());
  }
  return out;
}

// --- filter -----------------------------------------------------------------

struct FilterArgs {
  std::vector<fs::path> inputs;
  fs::path out;
  fs::path lexicon;
  fs::path report;
  std::size_t max_records = 100000;

  fs::path report_path() const { return report.empty() ? fs::path(sidecar(out, ".filter_report.json")) : report; }
};

StageOutput filter_stage(const FilterArgs& a) {
  const UnwantedLexicon lexicon = a.lexicon.empty() ? default_lexicon() : load_lexicon(a.lexicon);
  std::vector<RawRephrase> raws;
  std::size_t bad = 0;
  for (const auto& d : read_documents(a.inputs, &bad)) raws.push_back(raw_rephrase_from_document(d));
  FilterResult result = filter_corpus(raws, lexicon);
  std::sort(result.kept.begin(), result.kept.end(),
            [](const SyntheticRecord& x, const SyntheticRecord& y) { return x.id < y.id; });
  std::vector<Document> docs;
  for (const auto& r : result.kept) docs.push_back(to_document(r));
  StageOutput out;
  out.outputs = write_documents(docs, a.out, a.max_records);
  write_file(a.report_path(), to_json(result.report).dump(2) + "\n");
  out.outputs.push_back(a.report_path());
  out.counts = {{"input_records", raws.size()},
                {"skipped_records", bad},
                {"kept_unchanged", result.report.unchanged},
                {"kept_modified", result.report.modified},
                {"dropped", result.report.dropped}};
  log_info("filter: " + std::to_string(result.report.unchanged) + " unchanged, " +
           std::to_string(result.report.modified) + " modified, " + std::to_string(result.report.dropped) +
           " dropped");
  return out;
}

// --- mix ----------------------------------------------------------------------

struct MixArgs {
  fs::path spec;
  fs::path out;
  std::size_t max_records = 100000;
};

StageOutput mix_stage(const MixSpec& spec, const fs::path& out_dir, std::size_t max_records) {
  const SourceMap sources = sources_from_spec(spec);
  for (const auto& [label, shards] : sources) {
    if (shards.empty()) throw UsageError("component '" + label + "' lists no shards");
    for (const auto& s : shards) {
      if (!fs::exists(s)) throw UsageError("component '" + label + "': missing shard " + s.string());
    }
  }
  const fs::path prefix = out_dir / "mix";
  remove_stale_shards(prefix);
  ShardWriter writer(prefix, max_records);
  const MixReport built = build_mix(spec, sources, [&](const Document& d) { writer.write(d); });
  std::vector<fs::path> shards;
  for (const auto& m : writer.finish()) shards.emplace_back(m.path);
  const MixReport checked = validate_mix(shards, spec, built);

  StageOutput out;
  out.outputs = shards;
  const fs::path report = out_dir / "mix_report.json";
  ojson rj = to_json(built);
  rj["validated"] = checked == built;
  write_file(report, rj.dump(2) + "\n");
  out.outputs.push_back(report);
  std::size_t emitted = 0;
  for (const auto& [label, c] : built.per_source) {
    out.counts["documents:" + label] = c.documents;
    emitted += c.documents;
  }
  out.counts["documents"] = emitted;
  out.counts["real_token_total"] = built.real_token_total;
  log_info("mix: " + std::to_string(emitted) + " documents written and validated");
  return out;
}

// --- metrics ------------------------------------------------------------------

struct MetricsArgs {
  std::vector<fs::path> real;
  std::vector<fs::path> synthetic;
  fs::path parses;
  std::string embed_endpoint;  // empty: skip the leakage analysis
  EndpointFlags ep;
  std::uint64_t seed = 0;
  double outlier_sigma = 2.0;
  int grid_points = 256;
  fs::path report;

  nlohmann::json to_json() const {
    auto paths = [](const std::vector<fs::path>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& p : v) a.push_back(p.string());
      return a;
    };
    nlohmann::json j = {{"real", paths(real)},           {"synthetic", paths(synthetic)},
                        {"parses", parses.string()},     {"seed", seed},
                        {"outlier_sigma", outlier_sigma}, {"grid_points", grid_points},
                        {"report", report.string()}};
    if (!embed_endpoint.empty()) {
      j["embeddings"] = ep.to_json(false);
      j["embeddings"]["endpoint"] = embed_endpoint;
    }
    return j;
  }
};

ojson summary_json(const std::vector<double>& values, const MetricsArgs& a) {
  if (values.size() < 2) return {{"n_raw", values.size()}, {"note", "fewer than 2 values; no distribution"}};
  return to_json(summarize_distribution<double>(values, a.outlier_sigma, a.grid_points));
}

ojson readability_slice(const std::vector<const Document*>& docs, const MetricsArgs& a) {
  std::vector<double> fk, ttr;
  std::size_t skipped = 0;
  for (const Document* d : docs) {
    try {
      fk.push_back(flesch_kincaid_grade(d->text));
      ttr.push_back(type_token_ratio(d->text));
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
  };
  return {{"documents", docs.size()},
          {"skipped_no_words", skipped},
          {"flesch_kincaid_median", median(fk)},
          {"ttr_median", median(ttr)},
          {"flesch_kincaid", summary_json(fk, a)},
          {"ttr", summary_json(ttr, a)}};
}

StageOutput metrics_stage(const MetricsArgs& a, const std::string& embed_url) {
  auto by_id = [](const Document& x, const Document& y) { return x.id < y.id; };
  std::vector<Document> real = read_documents(a.real);
  std::vector<Document> synth_docs = read_documents(a.synthetic);
  std::sort(real.begin(), real.end(), by_id);
  std::sort(synth_docs.begin(), synth_docs.end(), by_id);

  ojson report;
  ojson readability;
  std::vector<const Document*> ptrs;
  for (const auto& d : real) ptrs.push_back(&d);
  readability["real"] = readability_slice(ptrs, a);
  ptrs.clear();
  std::map<std::string, std::vector<const Document*>> by_style;
  for (const auto& d : synth_docs) {
    ptrs.push_back(&d);
    auto it = d.meta.find("style");
    by_style[it == d.meta.end() ? "unknown" : it->second].push_back(&d);
  }
  readability["synthetic"] = readability_slice(ptrs, a);
  for (const auto& [style, docs] : by_style) readability["synthetic:" + style] = readability_slice(docs, a);
  report["readability"] = readability;

  ojson syntax = ojson::object();
  if (!a.parses.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.parses)) {
      if (e.is_regular_file() && e.path().extension() == ".conllu") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      ConlluResult parsed;
      try {
        parsed = parse_conllu(in);
      } catch (const ConlluFormatError& e) {
        throw std::runtime_error(f.string() + ": " + e.what());
      }
      std::vector<double> depth, mdd;
      std::size_t mdd_skipped = 0;
      for (const auto& s : parsed.sentences) {
        depth.push_back(static_cast<double>(tree_depth(s)));
        if (auto m = mean_dependency_distance(s)) {
          mdd.push_back(*m);
        } else {
          ++mdd_skipped;
        }
      }
      for (const auto& e : parsed.errors) log_warn(f.string() + ":" + std::to_string(e.line) + ": " + e.message);
      syntax[f.stem().string()] = {{"sentences", parsed.sentences.size()},
                                   {"rejected_sentences", parsed.errors.size()},
                                   {"mdd_skipped_single_token", mdd_skipped},
                                   {"tree_depth", summary_json(depth, a)},
                                   {"mean_dependency_distance", summary_json(mdd, a)}};
    }
  }
  report["syntax"] = syntax;

  ojson leakage = ojson::object();
  if (!embed_url.empty() && !real.empty()) {
    std::vector<SyntheticRecord> synth;
    for (const auto& d : synth_docs) synth.push_back(synthetic_record_from_document(d));
    const PairingStrategy strategies[] = {PairingStrategy::SynthReal, PairingStrategy::RandomRealReal,
                                          PairingStrategy::HalfVsFull, PairingStrategy::HalfVsHalf};
    std::map<PairingStrategy, PairingResult> pairs;
    std::map<std::string, std::size_t> index;
    std::vector<std::string> texts;
    auto intern = [&](const std::string& t) {
      auto [it, inserted] = index.try_emplace(t, texts.size());
      if (inserted) texts.push_back(t);
    };
    for (auto s : strategies) {
      if (s == PairingStrategy::SynthReal && synth.empty()) continue;
      if (s == PairingStrategy::RandomRealReal && real.size() < 2) continue;
      pairs[s] = make_pairs(real, synth, s, a.seed);
      for (const auto& p : pairs[s].pairs) {
        intern(p.left);
        intern(p.right);
      }
    }
    const auto vectors = embed_texts(texts, a.ep.config(embed_url));
    for (const auto& [s, result] : pairs) {
      std::vector<double> cos;
      for (const auto& p : result.pairs) {
        cos.push_back(cosine_similarity(vectors[index.at(p.left)], vectors[index.at(p.right)]));
      }
      double mean = 0;
      for (double c : cos) mean += c;
      if (!cos.empty()) mean /= static_cast<double>(cos.size());
      leakage[to_string(s)] = {{"pairs", result.pairs.size()},
                               {"skipped", result.skipped.size()},
                               {"mean_cosine", mean},
                               {"cosine", summary_json(cos, a)}};
    }
  }
  report["leakage"] = leakage;

  write_file(a.report, report.dump(2) + "\n");
  StageOutput out;
  out.outputs = {a.report};
  out.counts = {{"real_documents", real.size()}, {"synthetic_documents", synth_docs.size()}};
  return out;
}

// --- eval ---------------------------------------------------------------------

struct EvalArgs {
  fs::path losses;
  std::string weights = "builtin:pile";
  fs::path report;
};

StageOutput eval_stage(const EvalArgs& a, const ojson& extra = {}) {
  const auto raw = load_loss_records(a.losses);
  const auto records = aggregate_by_domain(raw);
  if (records.size() != raw.size()) {
    log_info("eval: merged " + std::to_string(raw.size()) + " loss records into " + std::to_string(records.size()) +
             " domains");
  }
  const DomainWeightTable table = resolve_weight_table(a.weights);
  const PerplexityReport report = perplexity_report(records, table);
  ojson j = report.to_json();
  j["weights"] = a.weights;
  j["weight_table_raw_sum"] = table.raw_sum();
  if (!extra.is_null()) {
    for (const auto& [k, v] : extra.items()) j[k] = v;
  }
  write_file(a.report, j.dump(2) + "\n");
  std::cout << report.to_text();
  StageOutput out;
  out.outputs = {a.report};
  out.counts = {{"loss_records", raw.size()}, {"domains", records.size()}};
  return out;
}

// --- cost ---------------------------------------------------------------------

struct CostArgs {
  std::string preset = "paper-mistral7b";
  fs::path preset_file;
  double gen_tokens = 85e9;
  double train_tokens = 300e9;
  fs::path report = "cost_report.json";
};

// --- end-to-end ---------------------------------------------------------------

struct EndToEndArgs {
  std::string endpoint = "mock";
  std::size_t docs = 100;
  fs::path out = "wrap-forge-e2e";
  std::uint64_t seed = 1;
  std::string style = "medium";
  EndpointFlags ep;
  std::size_t chunk_tokens = kRephraseTokenBudget;
};

// Held-out loss of an add-one unigram model trained on the rest of the mix,
// per mix source. Stands in for a trained model so the eval report has a
// realistic shape; the report marks it as a stub.
std::vector<DomainLossRecord> unigram_stub_losses(const std::vector<Document>& mixed) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  auto words = [](const Document& d) {
    std::vector<std::string> w;
    for (const auto& t : tokenize(d.text, TokenScheme::WhitespaceWords)) w.push_back(to_lower_ascii(t.view(d.text)));
    return w;
  };
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    if (i % 5 == 4) continue;
    for (auto& w : words(mixed[i])) {
      ++counts[w];
      ++total;
    }
  }
  const double denom = static_cast<double>(total + counts.size() + 1);
  std::map<std::string, DomainLossRecord> by_source;
  for (std::size_t i = 4; i < mixed.size(); i += 5) {
    auto& rec = by_source[mixed[i].source];
    rec.domain = mixed[i].source;
    for (const auto& w : words(mixed[i])) {
      auto it = counts.find(w);
      rec.loss_sum -= std::log((static_cast<double>(it == counts.end() ? 0 : it->second) + 1.0) / denom);
      ++rec.token_count;
    }
  }
  std::vector<DomainLossRecord> out;
  for (auto& [_, r] : by_source) {
    if (r.token_count > 0) out.push_back(r);
  }
  return out;
}

// --- plumbing -----------------------------------------------------------------

void emit_error(std::string_view message, std::string_view kind, std::string_view command) {
  const nlohmann::json j = {{"error", message}, {"kind", kind}, {"command", command}};
  std::cerr << j.dump() << std::endl;
}

void bind_env_names(CLI::App& app) {
  for (CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "version") continue;
    std::string env = kEnvPrefix;
    for (char c : names.front()) env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    opt->envname(env);
  }
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) bind_env_names(*sub);
}

nlohmann::json path_list(const std::vector<fs::path>& paths) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : paths) a.push_back(p.string());
  return a;
}

LogLevel parse_log_level(const std::string& s) {
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  if (s == "warn") return LogLevel::Warn;
  if (s == "error") return LogLevel::Error;
  if (s == "off") return LogLevel::Off;
  throw UsageError("unknown log level: " + s);
}

}  // namespace

std::string config_digest(const nlohmann::json& config) { return sha256_hex(config.dump()); }

std::vector<Document> generate_demo_documents(std::size_t n, std::uint64_t seed) {
  static constexpr std::string_view kWords[] = {
      "river",     "market",   "people",    "season",   "garden",    "history",  "engine",   "village",
      "research",  "weather",  "recipe",    "festival", "library",   "network",  "harvest",  "museum",
      "bicycle",   "mountain", "teacher",   "council",  "software",  "evening",  "painting", "railway",
      "discovery", "coffee",   "election",  "forest",   "hospital",  "journey",  "language", "material",
      "neighbor",  "ocean",    "planet",    "question", "schedule",  "theater",  "universe", "volunteer",
      "the",       "a",        "of",        "and",      "to",        "in",       "with",     "for",
      "on",        "from",     "about",     "near",     "after",     "before",   "during",   "under",
      "quickly",   "quietly",  "often",     "rarely",   "carefully", "finally",  "suddenly", "together",
      "built",     "found",    "opened",    "studied",  "visited",   "changed",  "shared",   "collected",
      "improved",  "described", "organized", "remembered", "explained", "considered", "delivered", "painted",
      "old",       "new",      "small",     "large",    "quiet",     "busy",     "bright",   "ancient",
      "local",     "modern",   "remarkable", "difficult", "important", "beautiful", "popular", "unusual"};
  constexpr std::size_t kVocab = std::size(kWords);
  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  docs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Every seventh document is long enough to need more than one chunk.
    const std::size_t sentences = i % 7 == 3 ? 30 + rng() % 20 : 2 + rng() % 8;
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::size_t len = 5 + rng() % 16;
      for (std::size_t w = 0; w < len; ++w) {
        std::string word(kWords[rng() % kVocab]);
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (!text.empty()) text += ' ';
        text += word;
      }
      text += rng() % 9 == 0 ? '?' : '.';
    }
    char id[32];
    std::snprintf(id, sizeof id, "doc-%05zu", i);
    docs.push_back({id, text, "web", {}});
  }
  return docs;
}

int run_subcommand(int argc, char** argv) {
  CLI::App app{"wrap-forge: rephrase web text, filter, mix, measure and cost synthetic pre-training data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug|info|warn|error|off")->capture_default_str();
  fs::path manifest;
  app.add_option("--manifest", manifest, "Where to write the run manifest (default next to the main output)");

  // rephrase
  RephraseArgs ra;
  auto* rephrase = app.add_subcommand("rephrase", "Rephrase shards through a chat-completion endpoint");
  rephrase->add_option("--in", ra.inputs, "Input shard(s)")->required()->check(CLI::ExistingFile);
  rephrase->add_option("--out", ra.out, "Output shard prefix")->required();
  rephrase->add_option("--style", ra.style, "easy|medium|hard|qa|file:<path>")->required();
  ra.ep.add_to(rephrase, true);
  rephrase->add_option("--chunk-tokens", ra.chunk_tokens, "Token budget per chunk")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rephrase->add_option("--token-scheme", ra.token_scheme, "whitespace-words|unicode-words")->capture_default_str();
  rephrase->add_option("--max-records", ra.max_records, "Records per output shard")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rephrase->add_option("--failures", ra.failures, "Failure log (default <out>.failures.jsonl)");
  rephrase->add_option("--checkpoint", ra.checkpoint, "Checkpoint file (default <out>.checkpoint.json)");
  rephrase->add_flag("--resume", ra.resume, "Continue from the checkpoint of an interrupted run");
  rephrase->add_option("--stop-after", ra.stop_after, "Behave as if interrupted after N results");
  rephrase->add_option("--progress-ms", ra.progress_ms, "Progress log interval")->capture_default_str();

  // filter
  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "Strip generation preambles from raw rephrases");
  filter->add_option("--in", fa.inputs, "Raw rephrase shard(s)")->required()->check(CLI::ExistingFile);
  filter->add_option("--out", fa.out, "Output shard prefix")->required();
  filter->add_option("--lexicon", fa.lexicon, "Phrase list (default: built-in)")->check(CLI::ExistingFile);
  filter->add_option("--report", fa.report, "Filter report (default <out>.filter_report.json)");
  filter->add_option("--max-records", fa.max_records, "Records per output shard")->check(CLI::PositiveNumber);

  // mix
  MixArgs ma;
  auto* mix = app.add_subcommand("mix", "Interleave real and synthetic shards by weight");
  mix->add_option("--spec", ma.spec, "Mix spec file")->required()->check(CLI::ExistingFile);
  mix->add_option("--out", ma.out, "Output directory")->required();
  mix->add_option("--max-records", ma.max_records, "Records per output shard")->check(CLI::PositiveNumber);

  // metrics
  MetricsArgs mta;
  auto* metrics = app.add_subcommand("metrics", "Readability, syntax and leakage metrics");
  metrics->add_option("--real", mta.real, "Real shard(s)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--synthetic", mta.synthetic, "Synthetic shard(s)")->check(CLI::ExistingFile);
  metrics->add_option("--parses", mta.parses, "Directory of .conllu files")->check(CLI::ExistingDirectory);
  metrics->add_option("--report", mta.report, "Report path")->required();
  metrics->add_option("--embeddings", mta.embed_endpoint, "Embedding endpoint URL or 'mock'; enables leakage pairs");
  metrics->add_option("--seed", mta.seed, "Seed for random pairs")->capture_default_str();
  metrics->add_option("--outlier-sigma", mta.outlier_sigma, "Outlier cut in standard deviations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  metrics->add_option("--grid-points", mta.grid_points, "KDE grid size")->capture_default_str()->check(CLI::Range(2, 100000));
  mta.ep.add_to(metrics, false);
  metrics->remove_option(metrics->get_option("--endpoint"));

  // eval
  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Domain-weighted perplexity report from loss records");
  eval->add_option("--losses", ea.losses, "Loss records (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--weights", ea.weights, "Weight table TSV or builtin:pile")->capture_default_str();
  eval->add_option("--report", ea.report, "Report path")->required();

  // cost
  CostArgs ca;
  auto* cost = app.add_subcommand("cost", "GPU-hour cost of generation versus training");
  cost->add_option("--preset", ca.preset, "Throughput preset name")->capture_default_str();
  cost->add_option("--preset-file", ca.preset_file, "Preset JSON file (overrides --preset)")->check(CLI::ExistingFile);
  cost->add_option("--gen-tokens", ca.gen_tokens, "Tokens to generate")->capture_default_str()->check(CLI::NonNegativeNumber);
  cost->add_option("--train-tokens", ca.train_tokens, "Tokens to train on")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cost->add_option("--report", ca.report, "Report path")->capture_default_str();

  // mock-server
  std::string mock_mode = "echo";
  int mock_port = 8000;
  std::string mock_host = "127.0.0.1";
  auto* mock = app.add_subcommand("mock-server", "Serve the deterministic test endpoint until interrupted");
  mock->add_option("--mode", mock_mode, "echo,fixture:<path>,flaky:N,slow:MS,fail:<s>,status:<code>,artifacts:N")
      ->capture_default_str();
  mock->add_option("--port", mock_port, "Port (0 picks a free one)")->capture_default_str()->check(CLI::Range(0, 65535));
  mock->add_option("--host", mock_host, "Bind address")->capture_default_str();

  // end-to-end
  EndToEndArgs xa;
  auto* e2e = app.add_subcommand("end-to-end", "Demo pipeline: rephrase, filter, mix, metrics, eval");
  e2e->add_option("--docs", xa.docs, "Number of generated documents")->capture_default_str()->check(CLI::PositiveNumber);
  e2e->add_option("--out", xa.out, "Output directory")->capture_default_str();
  e2e->add_option("--seed", xa.seed, "Seed for documents, mixing and pairs")->capture_default_str();
  e2e->add_option("--style", xa.style, "Rephrase style")->capture_default_str();
  e2e->add_option("--chunk-tokens", xa.chunk_tokens, "Token budget per chunk")->capture_default_str();
  xa.ep.add_to(e2e, true);
  e2e->remove_option(e2e->get_option("--endpoint"));
  e2e->add_option("--endpoint", xa.endpoint, "'mock', 'mock:<mode>' or a base URL")->capture_default_str();

  bind_env_names(app);

  std::string command;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands()) failed = sub;
    std::cout << failed->help();
    emit_error(e.what(), "usage", failed == &app ? "" : failed->get_name());
    return 2;
  }
  command = app.get_subcommands().front()->get_name();

  try {
    set_log_level(parse_log_level(log_level));
    InterruptScope interrupts;
    Manifest m;
    m.command = command;
    fs::path manifest_path = manifest;
    auto default_manifest = [&](const fs::path& p) {
      if (manifest_path.empty()) manifest_path = p;
    };

    if (command == "rephrase") {
      PromptTemplate tmpl;
      try {
        tmpl = resolve_style_argument(ra.style);
        parse_token_scheme(ra.token_scheme);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      Endpoint ep = open_endpoint(ra.ep.endpoint);
      const EndpointConfig cfg = ra.ep.config(ep.url);
      m.config = ra.to_json(tmpl);
      m.inputs = ra.inputs;
      const auto docs = read_documents(ra.inputs);
      StageOutput out = rephrase_documents(docs, tmpl, cfg, ra, config_digest(m.config));
      m.outputs = out.outputs;
      m.counts = out.counts;
      const bool interrupted = out.counts.contains("interrupted");
      if (interrupted) m.status = "interrupted";
      default_manifest(sidecar(ra.out, interrupted ? ".manifest.json.partial" : ".manifest.json"));
      m.write(manifest_path);
      if (interrupted) throw Interrupted("interrupted; resume with --resume (checkpoint " +
                                         ra.checkpoint_path().string() + ")");
    } else if (command == "filter") {
      m.config = {{"inputs", path_list(fa.inputs)},
                  {"out", fa.out.string()},
                  {"lexicon", fa.lexicon.empty() ? "builtin" : fa.lexicon.string()},
                  {"max_records", fa.max_records}};
      m.inputs = fa.inputs;
      if (!fa.lexicon.empty()) m.inputs.push_back(fa.lexicon);
      StageOutput out = filter_stage(fa);
      m.outputs = out.outputs;
      m.counts = out.counts;
      default_manifest(sidecar(fa.out, ".manifest.json"));
      m.write(manifest_path);
    } else if (command == "mix") {
      MixSpec spec;
      try {
        spec = load_mix_spec(ma.spec);
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      m.config = {{"spec", nlohmann::json::parse(to_json(spec).dump())}, {"max_records", ma.max_records}};
      m.inputs = {ma.spec};
      for (const auto& [_, shards] : sources_from_spec(spec)) m.inputs.insert(m.inputs.end(), shards.begin(), shards.end());
      StageOutput out = mix_stage(spec, ma.out, ma.max_records);
      m.outputs = out.outputs;
      m.counts = out.counts;
      default_manifest(ma.out / "manifest.json");
      m.write(manifest_path);
    } else if (command == "metrics") {
      Endpoint ep;
      if (!mta.embed_endpoint.empty()) ep = open_endpoint(mta.embed_endpoint);
      m.config = mta.to_json();
      m.inputs = mta.real;
      m.inputs.insert(m.inputs.end(), mta.synthetic.begin(), mta.synthetic.end());
      StageOutput out = metrics_stage(mta, ep.url);
      m.outputs = out.outputs;
      m.counts = out.counts;
      default_manifest(sidecar(mta.report, ".manifest.json"));
      m.write(manifest_path);
    } else if (command == "eval") {
      m.config = {{"losses", ea.losses.string()}, {"weights", ea.weights}, {"report", ea.report.string()}};
      m.inputs = {ea.losses};
      if (ea.weights != "builtin:pile") m.inputs.emplace_back(ea.weights);
      StageOutput out = eval_stage(ea);
      m.outputs = out.outputs;
      m.counts = out.counts;
      default_manifest(sidecar(ea.report, ".manifest.json"));
      m.write(manifest_path);
    } else if (command == "cost") {
      ThroughputPreset preset;
      try {
        preset = ca.preset_file.empty() ? builtin_preset(ca.preset)
                                        : preset_from_json(nlohmann::json::parse(read_file(ca.preset_file)));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const BreakevenReport report = breakeven_report(ca.gen_tokens, ca.train_tokens, preset);
      std::cout << report.to_text();
      write_file(ca.report, report.to_json().dump(2) + "\n");
      m.config = {{"preset", nlohmann::json::parse(to_json(preset).dump())},
                  {"gen_tokens", ca.gen_tokens},
                  {"train_tokens", ca.train_tokens}};
      if (!ca.preset_file.empty()) m.inputs = {ca.preset_file};
      m.outputs = {ca.report};
      m.counts = {{"generation_gpu_hours", report.generation_gpu_hours},
                  {"training_gpu_hours", report.training_gpu_hours}};
      default_manifest(sidecar(ca.report, ".manifest.json"));
      m.write(manifest_path);
    } else if (command == "mock-server") {
      MockOptions opts;
      try {
        opts = parse_mock_mode(mock_mode);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      MockServer server(opts, mock_port, mock_host);
      std::cout << nlohmann::json{{"base_url", server.base_url()}, {"mode", mock_mode}}.dump() << std::endl;
      while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      const MockStats stats = server.stats();
      log_info("mock server stopped after " + std::to_string(stats.requests) + " requests");
      if (!manifest_path.empty()) {
        m.config = {{"mode", mock_mode}, {"port", mock_port}, {"host", mock_host}};
        m.counts = {{"requests", stats.requests}, {"peak_in_flight", stats.peak_in_flight}};
        m.write(manifest_path);
      }
    } else if (command == "end-to-end") {
      Endpoint ep = open_endpoint(xa.endpoint, "artifacts:5");
      PromptTemplate tmpl;
      try {
        tmpl = resolve_style_argument(xa.style);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const EndpointConfig cfg = xa.ep.config(ep.url);
      m.config = {{"endpoint", xa.endpoint},       {"docs", xa.docs},
                  {"out", xa.out.string()},        {"seed", xa.seed},
                  {"style", tmpl.label()},          {"prompt_version", tmpl.version},
                  {"chunk_tokens", xa.chunk_tokens}, {"endpoint_config", xa.ep.to_json(true)}};

      const auto docs = generate_demo_documents(xa.docs, xa.seed);
      const auto real_shards = write_documents(docs, xa.out / "real" / "real", 100000);
      m.outputs = real_shards;

      RephraseArgs r;
      r.inputs = real_shards;
      r.out = xa.out / "raw" / "raw";
      r.chunk_tokens = xa.chunk_tokens;
      r.ep = xa.ep;
      const auto rephrased = rephrase_documents(docs, tmpl, cfg, r, config_digest(m.config));
      if (rephrased.counts.contains("interrupted")) throw Interrupted("interrupted");
      m.outputs.insert(m.outputs.end(), rephrased.outputs.begin(), rephrased.outputs.end());

      FilterArgs f;
      f.inputs.assign(rephrased.outputs.begin(), rephrased.outputs.end() - 1);  // last is the failure log
      f.out = xa.out / "synthetic" / "synthetic";
      f.report = xa.out / "synthetic" / "filter_report.json";
      const auto filtered = filter_stage(f);
      m.outputs.insert(m.outputs.end(), filtered.outputs.begin(), filtered.outputs.end());
      const std::vector<fs::path> synth_shards(filtered.outputs.begin(), filtered.outputs.end() - 1);
      if (synth_shards.empty()) throw std::runtime_error("no synthetic records survived filtering");

      MixSpec spec;
      spec.seed = xa.seed;
      spec.components = {{"real", 1, true, real_shards}, {"synthetic", 1, false, synth_shards}};
      const fs::path spec_path = xa.out / "mix.spec";
      write_file(spec_path, serialize_mix_spec(spec));
      m.outputs.push_back(spec_path);
      const auto mixed = mix_stage(spec, xa.out / "mix", 100000);
      m.outputs.insert(m.outputs.end(), mixed.outputs.begin(), mixed.outputs.end());

      MetricsArgs mt;
      mt.real = real_shards;
      mt.synthetic = synth_shards;
      mt.seed = xa.seed;
      mt.ep = xa.ep;
      mt.report = xa.out / "metrics_report.json";
      const auto measured = metrics_stage(mt, ep.url);
      m.outputs.insert(m.outputs.end(), measured.outputs.begin(), measured.outputs.end());

      const std::vector<fs::path> mix_shards(mixed.outputs.begin(), mixed.outputs.end() - 1);
      const auto losses = unigram_stub_losses(read_documents(mix_shards));
      std::string loss_body, weight_body;
      for (const auto& l : losses) {
        loss_body += nlohmann::json{{"domain", l.domain}, {"loss_sum", l.loss_sum}, {"token_count", l.token_count}}.dump() + "\n";
        weight_body += l.domain + "\t1\n";
      }
      EvalArgs ev;
      ev.losses = xa.out / "eval" / "losses.jsonl";
      ev.weights = (xa.out / "eval" / "weights.tsv").string();
      ev.report = xa.out / "eval" / "eval_report.json";
      write_file(ev.losses, loss_body);
      write_file(ev.weights, weight_body);
      m.outputs.push_back(ev.losses);
      m.outputs.emplace_back(ev.weights);
      const auto evaluated = eval_stage(ev, {{"model", "add-one unigram stub over the mixed shard"}, {"stub", true}});
      m.outputs.insert(m.outputs.end(), evaluated.outputs.begin(), evaluated.outputs.end());

      m.counts = {{"documents", docs.size()}};
      for (const auto* part : {&rephrased.counts, &filtered.counts, &mixed.counts}) {
        for (const auto& [k, v] : part->items()) m.counts[k] = v;
      }
      m.counts["mix_documents"] = mixed.counts.at("documents");
      m.counts["documents"] = docs.size();
      if (ep.mock) {
        const MockStats stats = ep.mock->stats();
        m.counts["mock_requests"] = stats.requests;
        m.counts["mock_peak_in_flight"] = stats.peak_in_flight;
        if (stats.peak_in_flight > static_cast<std::size_t>(cfg.max_in_flight)) {
          throw std::runtime_error("concurrency bound violated: peak " + std::to_string(stats.peak_in_flight) +
                                   " > max_in_flight " + std::to_string(cfg.max_in_flight));
        }
      }
      default_manifest(xa.out / "manifest.json");
      m.write(manifest_path);
      std::cout << nlohmann::json{{"status", "ok"}, {"manifest", manifest_path.string()}, {"counts", m.counts}}.dump()
                << std::endl;
    }
    return 0;
  } catch (const UsageError& e) {
    emit_error(e.what(), "usage", command);
    return 2;
  } catch (const Interrupted& e) {
    emit_error(e.what(), "interrupted", command);
    return 1;
  } catch (const std::exception& e) {
    emit_error(e.what(), "runtime", command);
    return 1;
  }
}

int run_subcommand(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  return run_subcommand(static_cast<int>(args.size()), argv.data());
}

}  // namespace wrapforge
