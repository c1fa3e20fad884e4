#include "wrapforge/mock_server.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

// Eigen must precede httplib: <resolv.h> defines a `_res` macro that Eigen uses as a name.
#include "wrapforge/embeddings.hpp"
#include "httplib.h"
#include "wrapforge/digest.hpp"
#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) {
    throw std::invalid_argument("mock mode " + std::string(what) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t word_count(std::string_view s) { return count_tokens(s, TokenScheme::WhitespaceWords); }

}  // namespace

MockOptions parse_mock_mode(std::string_view mode) {
  MockOptions o;
  for (const auto& raw : split(mode, ',')) {
    const std::string_view part = trim(raw);
    if (part.empty() || part == "echo") continue;
    const auto colon = part.find(':');
    const std::string_view key = part.substr(0, colon);
    const std::string_view value = colon == std::string_view::npos ? std::string_view{} : part.substr(colon + 1);
    if (key == "fixture") {
      if (value.empty()) throw std::invalid_argument("mock mode fixture: missing path");
      o.fixture = std::string(value);
    } else if (key == "flaky") {
      o.flaky = parse_int(value, key);
    } else if (key == "slow") {
      o.slow = std::chrono::milliseconds(parse_int(value, key));
    } else if (key == "fail") {
      if (value.empty()) throw std::invalid_argument("mock mode fail: missing substring");
      o.fail_substring = std::string(value);
    } else if (key == "status") {
      o.forced_status = parse_int(value, key);
      if (o.forced_status < 100 || o.forced_status > 599) throw std::invalid_argument("mock mode status: out of range");
    } else if (key == "artifacts") {
      o.artifacts_every = parse_int(value, key);
    } else if (key == "dim") {
      o.embedding_dim = parse_int(value, key);
      if (o.embedding_dim < 1) throw std::invalid_argument("mock mode dim: must be >= 1");
    } else {
      throw std::invalid_argument("unknown mock mode: " + std::string(part));
    }
  }
  return o;
}

std::string mock_paragraph(const nlohmann::json& request) {
  const auto& messages = request.at("messages");
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->at("role") == "user") {
      const auto content = it->at("content").get<std::string>();
      const auto nl = content.find('\n');
      return nl == std::string::npos ? content : content.substr(nl + 1);
    }
  }
  throw std::invalid_argument("no user message");
}

struct MockServer::Impl {
  MockOptions options;
  std::string host;
  int port = 0;
  httplib::Server server;
  std::thread thread;
  std::map<std::string, std::string> fixture;  // paragraph digest -> output

  std::mutex mu;
  std::map<std::string, int> seen;  // paragraph digest -> requests so far
  std::atomic<std::size_t> requests{0};
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak{0};

  struct InFlight {
    Impl& impl;
    explicit InFlight(Impl& i) : impl(i) {
      ++impl.requests;
      const std::size_t now = ++impl.in_flight;
      std::size_t prev = impl.peak.load();
      while (now > prev && !impl.peak.compare_exchange_weak(prev, now)) {
      }
    }
    ~InFlight() { --impl.in_flight; }
  };

  void load_fixture() {
    if (options.fixture.empty()) return;
    std::ifstream in(options.fixture);
    if (!in) throw std::runtime_error("cannot open mock fixture " + options.fixture.string());
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const std::string key = j.contains("paragraph_sha256") ? j.at("paragraph_sha256").get<std::string>()
                                                             : sha256_hex(j.at("paragraph").get<std::string>());
      fixture[key] = j.at("output").get<std::string>();
    }
  }

  static void reply_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", {{"message", message}}}}.dump(), "application/json");
  }

  void chat(const httplib::Request& req, httplib::Response& res) {
    InFlight guard(*this);
    if (options.slow.count() > 0) std::this_thread::sleep_for(options.slow);
    if (options.forced_status != 0) return reply_error(res, options.forced_status, "forced status");
    nlohmann::json body;
    std::string paragraph;
    try {
      body = nlohmann::json::parse(req.body);
      paragraph = mock_paragraph(body);
    } catch (const std::exception& e) {
      return reply_error(res, 400, e.what());
    }
    const std::string digest = sha256_hex(paragraph);
    if (!options.fail_substring.empty() && paragraph.find(options.fail_substring) != std::string::npos) {
      return reply_error(res, 500, "injected failure");
    }
    if (options.flaky > 0) {
      std::lock_guard lock(mu);
      if (seen[digest]++ < options.flaky) return reply_error(res, 500, "flaky");
    }
    std::string output;
    if (auto it = fixture.find(digest); it != fixture.end()) {
      output = it->second;
    } else {
      output = std::string(kMockEchoPrefix) + paragraph;
      if (options.artifacts_every > 0 &&
          std::stoull(digest.substr(0, 15), nullptr, 16) % static_cast<unsigned>(options.artifacts_every) == 0) {
        output = std::string(kMockArtifactPreamble) + output;
      }
    }
    std::size_t prompt_tokens = 0;
    for (const auto& m : body.at("messages")) prompt_tokens += word_count(m.value("content", ""));
    const nlohmann::json out = {
        {"id", "mock-" + digest.substr(0, 12)},
        {"object", "chat.completion"},
        {"model", body.value("model", "mock")},
        {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", output}}}, {"finish_reason", "stop"}}}},
        {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", word_count(output)},
                   {"total_tokens", prompt_tokens + word_count(output)}}}};
    res.set_content(out.dump(), "application/json");
  }

  void embeddings(const httplib::Request& req, httplib::Response& res) {
    InFlight guard(*this);
    if (options.slow.count() > 0) std::this_thread::sleep_for(options.slow);
    std::vector<std::string> inputs;
    try {
      const auto body = nlohmann::json::parse(req.body);
      const auto& input = body.at("input");
      if (input.is_string()) {
        inputs.push_back(input.get<std::string>());
      } else {
        inputs = input.get<std::vector<std::string>>();
      }
    } catch (const std::exception& e) {
      return reply_error(res, 400, e.what());
    }
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto v = mock_embedding(inputs[i], options.embedding_dim);
      data.push_back({{"object", "embedding"}, {"index", i},
                      {"embedding", std::vector<double>(v.data(), v.data() + v.size())}});
    }
    res.set_content(nlohmann::json{{"object", "list"}, {"data", data}}.dump(), "application/json");
  }
};

MockServer::MockServer(MockOptions options, int port, std::string host) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->host = std::move(host);
  impl_->load_fixture();
  auto& srv = impl_->server;
  srv.new_task_queue = [] { return new httplib::ThreadPool(64); };
  srv.set_tcp_nodelay(true);
  // httplib's default sets SO_REUSEPORT, which lets a second server bind a busy port.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  Impl* self = impl_.get();
  srv.Post("/v1/chat/completions", [self](const httplib::Request& q, httplib::Response& r) { self->chat(q, r); });
  srv.Post("/v1/embeddings", [self](const httplib::Request& q, httplib::Response& r) { self->embeddings(q, r); });
  srv.Get("/stats", [self](const httplib::Request&, httplib::Response& r) {
    r.set_content(nlohmann::json{{"requests", self->requests.load()}, {"peak_in_flight", self->peak.load()}}.dump(),
                  "application/json");
  });
  if (port == 0) {
    impl_->port = srv.bind_to_any_port(impl_->host);
    if (impl_->port < 0) throw std::runtime_error("mock server: cannot bind " + impl_->host);
  } else {
    if (!srv.bind_to_port(impl_->host, port)) {
      throw std::runtime_error("mock server: port " + std::to_string(port) + " is busy");
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([self] { self->server.listen_after_bind(); });
  srv.wait_until_ready();
}

MockServer::~MockServer() { stop(); }

int MockServer::port() const { return impl_->port; }

std::string MockServer::base_url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

MockStats MockServer::stats() const { return {impl_->requests.load(), impl_->peak.load()}; }

void MockServer::reset_stats() {
  impl_->requests = 0;
  impl_->peak = impl_->in_flight.load();
  std::lock_guard lock(impl_->mu);
  impl_->seen.clear();
}

void MockServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace wrapforge
