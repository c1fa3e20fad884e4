#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

namespace wrapforge {

/// Behaviour of the test inference server. Modes combine, e.g.
/// "echo,flaky:2,slow:20".
struct MockOptions {
  std::filesystem::path fixture;       // JSONL {"paragraph"|"paragraph_sha256", "output"}
  int flaky = 0;                       // first N requests per paragraph answer 500
  std::chrono::milliseconds slow{0};   // added latency per request
  std::string fail_substring;          // paragraphs containing it always answer 500
  int forced_status = 0;               // every chat request answers this status
  int artifacts_every = 0;             // prefix a preamble when digest % N == 0
  int embedding_dim = 64;
};

/// Parses "echo", "fixture:<path>", "flaky:N", "slow:MS", "fail:<substr>",
/// "status:<code>", "artifacts:N", "dim:N", comma separated.
MockOptions parse_mock_mode(std::string_view mode);

/// Paragraph the mock sees in a chat request: the last user message after
/// its first line (the whole message when it has a single line).
std::string mock_paragraph(const nlohmann::json& request);

inline constexpr std::string_view kMockEchoPrefix = "PARA: ";
inline constexpr std::string_view kMockArtifactPreamble = "Here's a paraphrase of the paragraph:\n\n";

struct MockStats {
  std::size_t requests = 0;  // chat + embedding requests received
  std::size_t peak_in_flight = 0;
};

/// In-process HTTP server speaking the chat-completion and embedding wire
/// formats. Port 0 picks a free port; a busy port throws std::runtime_error.
class MockServer {
 public:
  MockServer(MockOptions options, int port = 0, std::string host = "127.0.0.1");
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const;
  std::string base_url() const;
  MockStats stats() const;
  void reset_stats();
  /// Stops listening and joins the server thread. Idempotent.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wrapforge
