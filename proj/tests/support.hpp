#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

namespace wrapforge::testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(WRAPFORGE_DATA_DIR) / rel;
}

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("wrapforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& body) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {  // inclusive
  return lo + rng() % (hi - lo + 1);
}

inline double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Random prose-ish text: words of mixed case and script, sentence
// punctuation, abbreviations, quotes and irregular whitespace.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_words) {
  static const char* kPieces[] = {"alpha",  "Beta",  "gamma", "Dr.",  "etc.",  "e.g.",   "don't", "it's",
                                  "naïve",  "Zürich", "東京",  "数据", "x",     "42",     "3.14",  "(note)",
                                  "\"quoted\"", "end.", "Why?", "Stop!", "U.S.", "—",     "ok:",   "well,"};
  static const char* kSpaces[] = {" ", " ", " ", "  ", "\n", "\t", "\n\n", " \n "};
  const std::size_t n = uniform(rng, 0, max_words);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += kSpaces[rng() % std::size(kSpaces)];
    out += kPieces[rng() % std::size(kPieces)];
  }
  return out;
}

}  // namespace wrapforge::testing
