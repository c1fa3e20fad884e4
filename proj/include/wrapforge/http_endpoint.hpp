#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "wrapforge/style_prompts.hpp"

namespace wrapforge {

/// Connection and sampling settings for an OpenAI-style inference server.
struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_id = "mistral-7b-instruct";
  int max_new_tokens = 512;
  double temperature = 0.7;
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 8;
  int max_retries = 3;
  std::chrono::milliseconds backoff_initial{200};
  std::chrono::milliseconds backoff_max{10000};
  std::string api_key;  // sent as a bearer token when non-empty
  RoleLayout layout = RoleLayout::SplitRoles;
  int embedding_batch = 64;

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

inline constexpr const char* kApiKeyEnv = "WRAP_FORGE_API_KEY";

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path_prefix;  // without trailing slash; may be empty

  /// scheme://host:port
  std::string origin() const;
};

ParsedUrl parse_url(std::string_view url);

/// Failure talking to the endpoint. http_status is 0 for transport errors.
class EndpointError : public std::runtime_error {
 public:
  EndpointError(const std::string& what, int http_status, bool retryable, int attempts)
      : std::runtime_error(what), http_status_(http_status), retryable_(retryable),
        attempts_(attempts) {}

  int http_status() const { return http_status_; }
  bool retryable() const { return retryable_; }
  int attempts() const { return attempts_; }

 private:
  int http_status_;
  bool retryable_;
  int attempts_;
};

/// Posts JSON bodies to one endpoint with the configured retry policy:
/// transport errors, 429 and 5xx are retried with exponential backoff up to
/// max_retries extra attempts; any other non-2xx status fails immediately.
/// Not thread-safe; use one client per worker.
class JsonClient {
 public:
  explicit JsonClient(const EndpointConfig& cfg);
  ~JsonClient();
  JsonClient(const JsonClient&) = delete;
  JsonClient& operator=(const JsonClient&) = delete;

  struct Response {
    nlohmann::json body;
    int attempts = 0;
  };

  Response post(std::string_view path, const nlohmann::json& body);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wrapforge
