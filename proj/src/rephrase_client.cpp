#include "wrapforge/rephrase_client.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "wrapforge/log.hpp"

namespace wrapforge {

namespace {

std::size_t usage_field(const nlohmann::json& body, const char* key, std::size_t fallback) {
  auto usage = body.find("usage");
  if (usage == body.end() || !usage->is_object()) return fallback;
  auto v = usage->find(key);
  if (v == usage->end() || !v->is_number_unsigned()) return fallback;
  return v->get<std::size_t>();
}

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t parse_size(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) return 0;
  return static_cast<std::size_t>(std::stoull(it->second));
}

std::string meta_or_empty(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  return it == meta.end() ? std::string{} : it->second;
}

}  // namespace

double throughput(const GenerationLog& log) {
  const std::chrono::duration<double, std::ratio<3600>> hours = log.finished_at - log.started_at;
  if (hours.count() <= 0.0) throw std::domain_error("throughput: zero elapsed time");
  return static_cast<double>(log.completion_tokens_total) / hours.count();
}

RawRephrase rephrase_one(JsonClient& client, const Chunk& chunk, const PromptTemplate& tmpl,
                         const EndpointConfig& cfg, int* attempts) {
  if (chunk.token_count > kRephraseTokenBudget) {
    log_warn("chunk " + chunk.parent_id + "#" + std::to_string(chunk.index) + " has " +
             std::to_string(chunk.token_count) + " tokens, above the rephrase budget");
  }
  const ChatRequestBody prompt = render_prompt(tmpl, chunk.text, cfg.layout);
  const nlohmann::json request = {{"model", cfg.model_id},
                                  {"messages", to_json(prompt)},
                                  {"max_tokens", cfg.max_new_tokens},
                                  {"temperature", cfg.temperature}};

  const auto t0 = std::chrono::steady_clock::now();
  JsonClient::Response res = client.post("/v1/chat/completions", request);
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  if (attempts) *attempts = res.attempts;

  std::string content;
  try {
    content = res.body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError(std::string("malformed completion response: ") + e.what(), 200, false,
                        res.attempts);
  }
  if (trim(content).empty()) throw EndpointError("empty generation", 200, false, res.attempts);

  RawRephrase out;
  out.parent_id = chunk.parent_id;
  out.chunk_index = chunk.index;
  out.style = tmpl.label();
  out.model_id = cfg.model_id;
  out.prompt_version = tmpl.version;
  out.latency = latency;
  std::size_t prompt_words = 0;
  for (const auto& m : prompt.messages) prompt_words += count_tokens(m.content, TokenScheme::WhitespaceWords);
  out.prompt_tokens = usage_field(res.body, "prompt_tokens", prompt_words);
  out.completion_tokens = usage_field(res.body, "completion_tokens",
                                      count_tokens(content, TokenScheme::WhitespaceWords));
  out.text = std::move(content);
  return out;
}

RawRephrase rephrase_one(const Chunk& chunk, const PromptTemplate& tmpl, const EndpointConfig& cfg) {
  cfg.validate();
  JsonClient client(cfg);
  return rephrase_one(client, chunk, tmpl, cfg);
}

GenerationLog rephrase_stream(std::span<const Chunk> chunks, const PromptTemplate& tmpl,
                              const EndpointConfig& cfg,
                              const std::function<void(RephraseResult&&)>& sink,
                              const StreamOptions& options) {
  cfg.validate();
  GenerationLog log;
  log.started_at = std::chrono::system_clock::now();

  struct Completed {
    RephraseResult result;
    int attempts = 0;
  };
  std::mutex mutex;
  std::condition_variable ready_cv;
  std::deque<Completed> ready;
  std::size_t next = 0;
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), chunks.size());
  std::size_t active = n_workers;

  auto worker = [&] {
    JsonClient client(cfg);
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= chunks.size() || (options.cancel && options.cancel->load())) break;
        i = next++;
      }
      const Chunk& chunk = chunks[i];
      Completed done;
      try {
        done.result = rephrase_one(client, chunk, tmpl, cfg, &done.attempts);
      } catch (const EndpointError& e) {
        done.attempts = e.attempts();
        done.result = FailureRecord{chunk.parent_id, chunk.index, e.what(), e.http_status(), e.attempts()};
      } catch (const std::exception& e) {
        done.result = FailureRecord{chunk.parent_id, chunk.index, e.what(), 0, 0};
      }
      {
        std::lock_guard lock(mutex);
        ready.push_back(std::move(done));
      }
      ready_cv.notify_one();
    }
    {
      std::lock_guard lock(mutex);
      --active;
    }
    ready_cv.notify_one();
  };

  std::vector<std::jthread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  auto last_progress = std::chrono::steady_clock::now();
  for (;;) {
    std::deque<Completed> batch;
    {
      std::unique_lock lock(mutex);
      ready_cv.wait_for(lock, std::chrono::milliseconds(250),
                        [&] { return !ready.empty() || active == 0; });
      batch.swap(ready);
      if (batch.empty() && active == 0) break;
    }
    for (auto& done : batch) {
      ++log.requests;
      log.http_attempts += static_cast<std::size_t>(done.attempts);
      if (auto* r = std::get_if<RawRephrase>(&done.result)) {
        log.completion_tokens_total += r->completion_tokens;
        log.prompt_tokens_total += r->prompt_tokens;
      } else {
        ++log.failures;
      }
      sink(std::move(done.result));
    }
    if (options.progress &&
        std::chrono::steady_clock::now() - last_progress >= options.progress_interval) {
      last_progress = std::chrono::steady_clock::now();
      GenerationLog snapshot = log;
      snapshot.finished_at = std::chrono::system_clock::now();
      options.progress(snapshot);
    }
  }
  pool.clear();
  log.finished_at = std::chrono::system_clock::now();
  return log;
}

Document to_document(const RawRephrase& r) {
  Document d;
  d.id = r.parent_id + "#" + std::to_string(r.chunk_index);
  d.text = r.text;
  d.source = "synthetic-" + r.style;
  d.meta = {{"parent_id", r.parent_id},
            {"chunk_index", std::to_string(r.chunk_index)},
            {"style", r.style},
            {"model_id", r.model_id},
            {"prompt_version", r.prompt_version},
            {"prompt_tokens", std::to_string(r.prompt_tokens)},
            {"completion_tokens", std::to_string(r.completion_tokens)}};
  return d;
}

RawRephrase raw_rephrase_from_document(const Document& doc) {
  RawRephrase r;
  r.parent_id = meta_or_empty(doc.meta, "parent_id");
  if (r.parent_id.empty()) throw CorpusError("document '" + doc.id + "' lacks meta.parent_id");
  r.chunk_index = parse_size(doc.meta, "chunk_index");
  r.style = meta_or_empty(doc.meta, "style");
  r.text = doc.text;
  r.model_id = meta_or_empty(doc.meta, "model_id");
  r.prompt_version = meta_or_empty(doc.meta, "prompt_version");
  r.prompt_tokens = parse_size(doc.meta, "prompt_tokens");
  r.completion_tokens = parse_size(doc.meta, "completion_tokens");
  return r;
}

nlohmann::ordered_json to_json(const FailureRecord& f) {
  return {{"parent_id", f.parent_id},
          {"chunk_index", f.chunk_index},
          {"error", f.error},
          {"http_status", f.http_status},
          {"attempts", f.attempts}};
}

nlohmann::ordered_json to_json(const GenerationLog& log) {
  nlohmann::ordered_json j = {{"started_at", iso8601(log.started_at)},
                              {"finished_at", iso8601(log.finished_at)},
                              {"requests", log.requests},
                              {"failures", log.failures},
                              {"http_attempts", log.http_attempts},
                              {"prompt_tokens_total", log.prompt_tokens_total},
                              {"completion_tokens_total", log.completion_tokens_total}};
  if (log.finished_at > log.started_at) j["tokens_per_hour"] = throughput(log);
  return j;
}

}  // namespace wrapforge
