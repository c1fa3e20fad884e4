#include "doctest.h"
#include "support.hpp"
#include "wrapforge/mock_server.hpp"
#include "wrapforge/rephrase_client.hpp"

#include <algorithm>
#include <set>

using namespace wrapforge;
using namespace std::chrono_literals;

namespace {

EndpointConfig config_for(const MockServer& server) {
  EndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.backoff_initial = 2ms;
  cfg.backoff_max = 10ms;
  cfg.timeout = 5000ms;
  return cfg;
}

std::vector<Chunk> make_chunks(std::size_t n, const std::string& prefix = "chunk") {
  std::vector<Chunk> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = "This is " + prefix + "-" + std::to_string(i) + " of the corpus.";
    out.push_back({"doc-" + std::to_string(i), 0, text, count_tokens(text, TokenScheme::WhitespaceWords)});
  }
  return out;
}

struct Collected {
  std::vector<RawRephrase> ok;
  std::vector<FailureRecord> failed;
};

Collected run(std::span<const Chunk> chunks, const EndpointConfig& cfg, GenerationLog* log = nullptr,
              const StreamOptions& opts = {}) {
  Collected c;
  const auto l = rephrase_stream(chunks, builtin_template(Style::Medium), cfg, [&](RephraseResult&& r) {
    if (auto* raw = std::get_if<RawRephrase>(&r)) {
      c.ok.push_back(std::move(*raw));
    } else {
      c.failed.push_back(std::get<FailureRecord>(r));
    }
  }, opts);
  if (log) *log = l;
  return c;
}

}  // namespace

TEST_CASE("parse_url") {
  const auto u = parse_url("http://example.org:8080/api/");
  CHECK(u.scheme == "http");
  CHECK(u.host == "example.org");
  CHECK(u.port == 8080);
  CHECK(u.path_prefix == "/api");
  CHECK(u.origin() == "http://example.org:8080");
  CHECK(parse_url("https://x.test").port == 443);
  CHECK(parse_url("http://x.test").port == 80);
  const auto v6 = parse_url("http://[::1]:9000");
  CHECK(v6.host == "::1");
  CHECK(v6.port == 9000);
  CHECK_THROWS_AS(parse_url("ftp://x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_url("x.test"), std::invalid_argument);
  CHECK_THROWS_AS(parse_url("http://"), std::invalid_argument);
  CHECK_THROWS_AS(parse_url("http://h:99999"), std::invalid_argument);
  CHECK_THROWS_AS(parse_url("http://h:0"), std::invalid_argument);
}

TEST_CASE("EndpointConfig validation") {
  EndpointConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto mutate) {
    EndpointConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  bad([](EndpointConfig& c) { c.max_new_tokens = 0; });
  bad([](EndpointConfig& c) { c.temperature = -0.1; });
  bad([](EndpointConfig& c) { c.max_in_flight = 0; });
  bad([](EndpointConfig& c) { c.max_retries = -1; });
  bad([](EndpointConfig& c) { c.base_url = "localhost:8000"; });
  bad([](EndpointConfig& c) { c.model_id.clear(); });
  bad([](EndpointConfig& c) { c.timeout = 0ms; });
}

TEST_CASE("throughput") {
  GenerationLog log;
  log.started_at = std::chrono::system_clock::time_point{};
  log.finished_at = log.started_at + 1h;
  log.completion_tokens_total = 3'000'000;
  CHECK(throughput(log) == doctest::Approx(3.0e6).epsilon(1e-12));
  log.completion_tokens_total = 0;
  CHECK(throughput(log) == 0.0);
  log.finished_at = log.started_at + 30min;
  log.completion_tokens_total = 1'500'000;
  CHECK(throughput(log) == doctest::Approx(3.0e6).epsilon(1e-12));
  log.finished_at = log.started_at;
  CHECK_THROWS_AS(throughput(log), std::domain_error);
}

TEST_CASE("mock mode parsing") {
  const auto o = parse_mock_mode("echo,flaky:2,slow:15,fail:xyz,artifacts:3,dim:8");
  CHECK(o.flaky == 2);
  CHECK(o.slow == 15ms);
  CHECK(o.fail_substring == "xyz");
  CHECK(o.artifacts_every == 3);
  CHECK(o.embedding_dim == 8);
  CHECK(parse_mock_mode("status:401").forced_status == 401);
  CHECK_THROWS_AS(parse_mock_mode("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_mock_mode("flaky:x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_mock_mode("status:42"), std::invalid_argument);
}

TEST_CASE("mock server port handling") {
  MockServer a(MockOptions{});
  CHECK(a.port() > 0);
  CHECK_THROWS_AS(MockServer(MockOptions{}, a.port()), std::runtime_error);
}

TEST_CASE("rephrase_one against the echo mock") {
  MockServer server(MockOptions{});
  const auto cfg = config_for(server);
  const Chunk chunk{"p1", 3, "The sky is blue.\nIt is vast.", 6};
  for (RoleLayout layout : {RoleLayout::SplitRoles, RoleLayout::SingleTurn}) {
    auto c = cfg;
    c.layout = layout;
    const RawRephrase r = rephrase_one(chunk, builtin_template(Style::QA), c);
    CHECK(r.text == std::string(kMockEchoPrefix) + chunk.text);
    CHECK(r.parent_id == "p1");
    CHECK(r.chunk_index == 3);
    CHECK(r.style == "qa");
    CHECK(r.model_id == cfg.model_id);
    CHECK(r.prompt_version == std::string(kBuiltinTemplateVersion));
    CHECK(r.completion_tokens == count_tokens(r.text, TokenScheme::WhitespaceWords));
    CHECK(r.prompt_tokens > chunk.token_count);
  }
}

TEST_CASE("retries: two 500s then success") {
  MockOptions o;
  o.flaky = 2;
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.max_retries = 3;
  GenerationLog log;
  const auto chunks = make_chunks(1);
  const auto c = run(chunks, cfg, &log);
  REQUIRE(c.ok.size() == 1);
  CHECK(c.failed.empty());
  CHECK(log.failures == 0);
  CHECK(log.requests == 1);
  CHECK(log.http_attempts == 3);
}

TEST_CASE("retries exhausted become a failure record") {
  MockOptions o;
  o.flaky = 5;
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.max_retries = 1;
  const auto chunks = make_chunks(1);
  const auto c = run(chunks, cfg);
  REQUIRE(c.failed.size() == 1);
  CHECK(c.failed[0].http_status == 500);
  CHECK(c.failed[0].attempts == 2);
}

TEST_CASE("4xx is not retried") {
  MockOptions o;
  o.forced_status = 401;
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.max_retries = 3;
  try {
    rephrase_one(make_chunks(1)[0], builtin_template(Style::Easy), cfg);
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(e.http_status() == 401);
    CHECK(!e.retryable());
    CHECK(e.attempts() == 1);
  }
  CHECK(server.stats().requests == 1);
}

TEST_CASE("transport errors are retried then surfaced") {
  int port = 0;
  {
    MockServer gone(MockOptions{});
    port = gone.port();
  }
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.max_retries = 2;
  cfg.backoff_initial = 1ms;
  cfg.timeout = 500ms;
  try {
    rephrase_one(make_chunks(1)[0], builtin_template(Style::Easy), cfg);
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(e.http_status() == 0);
    CHECK(e.retryable());
    CHECK(e.attempts() == 3);
  }
}

TEST_CASE("empty generation is an error") {
  testing::TempDir dir;
  const Chunk chunk{"p", 0, "Say nothing.", 2};
  testing::spit(dir / "fixture.jsonl",
                nlohmann::json{{"paragraph", chunk.text}, {"output", "  \n"}}.dump() + "\n");
  MockOptions o;
  o.fixture = dir / "fixture.jsonl";
  MockServer server(o);
  try {
    rephrase_one(chunk, builtin_template(Style::Hard), config_for(server));
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(std::string(e.what()) == "empty generation");
  }
}

TEST_CASE("fixture mode answers by paragraph digest, echo otherwise") {
  testing::TempDir dir;
  testing::spit(dir / "fixture.jsonl",
                nlohmann::json{{"paragraph", "Known input."}, {"output", "Canned rephrase."}}.dump() + "\n");
  MockOptions o;
  o.fixture = dir / "fixture.jsonl";
  MockServer server(o);
  const auto cfg = config_for(server);
  CHECK(rephrase_one({"a", 0, "Known input.", 2}, builtin_template(Style::Medium), cfg).text == "Canned rephrase.");
  CHECK(rephrase_one({"b", 0, "Other input.", 2}, builtin_template(Style::Medium), cfg).text ==
        "PARA: Other input.");
}

TEST_CASE("stream: concurrency bound and exactly-once") {
  MockOptions o;
  o.slow = 20ms;
  MockServer server(o);
  for (int max_in_flight : {1, 3, 8}) {
    server.reset_stats();
    auto cfg = config_for(server);
    cfg.max_in_flight = max_in_flight;
    const auto chunks = make_chunks(40);
    GenerationLog log;
    const auto c = run(chunks, cfg, &log);
    CHECK(c.ok.size() == chunks.size());
    CHECK(log.requests == chunks.size());
    const auto stats = server.stats();
    CHECK(stats.peak_in_flight <= static_cast<std::size_t>(max_in_flight));
    if (max_in_flight > 1) CHECK(stats.peak_in_flight > 1);
    std::set<std::string> parents;
    for (const auto& r : c.ok) parents.insert(r.parent_id);
    CHECK(parents.size() == chunks.size());
  }
}

TEST_CASE("stream: 100 chunks with max_in_flight 8") {
  MockOptions o;
  o.slow = 5ms;
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.max_in_flight = 8;
  const auto chunks = make_chunks(100);
  GenerationLog log;
  const auto c = run(chunks, cfg, &log);
  CHECK(c.ok.size() == 100);
  CHECK(server.stats().peak_in_flight <= 8);
  std::size_t tokens = 0;
  for (const auto& r : c.ok) tokens += r.completion_tokens;
  CHECK(log.completion_tokens_total == tokens);
  CHECK(log.finished_at >= log.started_at);
}

TEST_CASE("stream: failure isolation") {
  MockOptions o;
  o.fail_substring = "chunk-7 ";
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.max_retries = 1;
  const auto chunks = make_chunks(10);
  GenerationLog log;
  const auto c = run(chunks, cfg, &log);
  CHECK(c.ok.size() == 9);
  REQUIRE(c.failed.size() == 1);
  CHECK(c.failed[0].parent_id == "doc-7");
  CHECK(log.failures == 1);
  CHECK(log.requests == 10);
}

TEST_CASE("stream: empty input and cancellation") {
  MockServer server(MockOptions{});
  const auto cfg = config_for(server);
  GenerationLog log;
  CHECK(run({}, cfg, &log).ok.empty());
  CHECK(log.requests == 0);

  std::atomic<bool> cancel{true};
  StreamOptions opts;
  opts.cancel = &cancel;
  const auto chunks = make_chunks(5);
  const auto c = run(chunks, cfg, &log, opts);
  CHECK(c.ok.empty());
  CHECK(log.requests == 0);
}

TEST_CASE("stream determinism and shard provenance") {
  MockOptions o;
  o.artifacts_every = 3;
  MockServer server(o);
  auto cfg = config_for(server);
  cfg.temperature = 0;
  const auto chunks = make_chunks(30);
  auto sorted_docs = [&] {
    auto c = run(chunks, cfg);
    std::vector<std::string> lines;
    for (const auto& r : c.ok) lines.push_back(serialize_document(to_document(r)));
    std::sort(lines.begin(), lines.end());
    return lines;
  };
  const auto first = sorted_docs();
  CHECK(first == sorted_docs());

  const RawRephrase r{"doc-1", 2, "medium", "text", "m", "wrap-v1", 15ms, 10, 4};
  const Document d = to_document(r);
  CHECK(d.id == "doc-1#2");
  CHECK(d.source == "synthetic-medium");
  CHECK(d.meta.count("latency_ms") == 0);
  RawRephrase back = raw_rephrase_from_document(d);
  back.latency = r.latency;
  CHECK(back.parent_id == r.parent_id);
  CHECK(back.chunk_index == r.chunk_index);
  CHECK(back.prompt_tokens == 10);
  CHECK(back.completion_tokens == 4);
  CHECK_THROWS_AS(raw_rephrase_from_document({"x", "t", "s", {}}), CorpusError);
}

TEST_CASE("mock paragraph extraction") {
  const nlohmann::json split = {{"messages", {{{"role", "system"}, {"content", "pre"}},
                                              {{"role", "user"}, {"content", "Instr:\nline a\nline b"}}}}};
  CHECK(mock_paragraph(split) == "line a\nline b");
  const nlohmann::json single = {{"messages", {{{"role", "user"}, {"content", "only"}}}}};
  CHECK(mock_paragraph(single) == "only");
}
