#include "wrapforge/http_endpoint.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

#include "httplib.h"
#include "wrapforge/text.hpp"

namespace wrapforge {

std::string ParsedUrl::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw std::invalid_argument("URL lacks scheme: " + std::string(url));
  out.scheme = to_lower_ascii(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") {
    throw std::invalid_argument("URL scheme must be http or https: " + std::string(url));
  }
  std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  std::string_view path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);
  out.path_prefix = std::string(path);

  out.port = out.scheme == "https" ? 443 : 80;
  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) throw std::invalid_argument("bad IPv6 host: " + std::string(url));
    host = authority.substr(1, close - 1);
    authority.remove_prefix(close + 1);
    if (!authority.empty() && authority.front() != ':') throw std::invalid_argument("bad URL: " + std::string(url));
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    authority.remove_prefix(colon);
  } else {
    authority = {};
  }
  if (!authority.empty()) {
    const std::string_view port = authority.substr(1);
    int value = 0;
    const auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || p != port.data() + port.size() || value <= 0 || value > 65535) {
      throw std::invalid_argument("bad port in URL: " + std::string(url));
    }
    out.port = value;
  }
  if (host.empty()) throw std::invalid_argument("URL lacks host: " + std::string(url));
  out.host = std::string(host);
  return out;
}

void EndpointConfig::validate() const {
  parse_url(base_url);
  if (model_id.empty()) throw std::invalid_argument("model_id must be non-empty");
  if (max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be >= 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (embedding_batch < 1) throw std::invalid_argument("embedding_batch must be >= 1");
}

struct JsonClient::Impl {
  EndpointConfig cfg;
  ParsedUrl url;
  httplib::Client client;

  explicit Impl(const EndpointConfig& c)
      : cfg(c), url(parse_url(c.base_url)), client(url.origin()) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
    if (!cfg.api_key.empty()) client.set_bearer_token_auth(cfg.api_key);
  }
};

JsonClient::JsonClient(const EndpointConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
JsonClient::~JsonClient() = default;

JsonClient::Response JsonClient::post(std::string_view path, const nlohmann::json& body) {
  const std::string full_path = impl_->url.path_prefix + std::string(path);
  const std::string payload = body.dump();
  const int max_attempts = impl_->cfg.max_retries + 1;
  auto backoff = impl_->cfg.backoff_initial;
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto res = impl_->client.Post(full_path, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      try {
        return {nlohmann::json::parse(res->body), attempt};
      } catch (const nlohmann::json::parse_error& e) {
        throw EndpointError(std::string("invalid JSON response: ") + e.what(), res->status, false,
                            attempt);
      }
    } else if (res->status == 429 || res->status >= 500) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw EndpointError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                          res->status, false, attempt);
    }
    if (attempt < max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, impl_->cfg.backoff_max);
    }
  }
  throw EndpointError(last_error + " after " + std::to_string(max_attempts) + " attempts",
                      last_status, true, max_attempts);
}

}  // namespace wrapforge
