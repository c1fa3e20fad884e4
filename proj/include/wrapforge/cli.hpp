#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wrapforge/corpus_io.hpp"

namespace wrapforge {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kEnvPrefix = "WRAP_FORGE_";

/// Exit codes: 0 ok, 1 runtime failure, 2 usage error. Failures print one
/// JSON line {"error", "kind", "command"} on stderr.
int run_subcommand(int argc, char** argv);
int run_subcommand(const std::vector<std::string>& args);  // args[0] is the program name

/// sha256 of the key-sorted compact JSON dump.
std::string config_digest(const nlohmann::json& config);

/// Deterministic web-like demo documents (ids doc-00000, ...), a few of them
/// longer than one rephrase chunk.
std::vector<Document> generate_demo_documents(std::size_t n, std::uint64_t seed);

}  // namespace wrapforge
