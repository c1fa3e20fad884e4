#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wrapforge {

struct DepToken {
  int index = 0;  // 1-based
  int head = 0;   // 0 = root
  std::string form;

  friend bool operator==(const DepToken&, const DepToken&) = default;
};

struct DepSentence {
  std::vector<DepToken> tokens;
  std::string sent_id;
  std::string doc_id;  // from the most recent "# newdoc id = ..." comment

  std::size_t size() const { return tokens.size(); }
};

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks indices 1..n, heads in [0, n], a single root and no cycles.
void validate_tree(const DepSentence& s);

struct ConlluError {
  std::size_t line = 0;  // first line of the offending sentence
  std::string message;
};

struct ConlluResult {
  std::vector<DepSentence> sentences;
  std::vector<ConlluError> errors;  // sentences rejected by validate_tree
};

class ConlluFormatError : public std::runtime_error {
 public:
  ConlluFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads CoNLL-U: comment lines and multiword/empty-node rows are skipped,
/// blank lines end sentences. A row without exactly 10 tab-separated columns
/// or with a non-numeric ID/HEAD throws ConlluFormatError; sentences failing
/// tree validation are reported in `errors` and left out.
ConlluResult parse_conllu(std::istream& in);

/// Longest root-to-leaf path, counted in nodes.
std::size_t tree_depth(const DepSentence& s);

/// Mean |index - head| over non-root tokens; nullopt for a single-token sentence.
std::optional<double> mean_dependency_distance(const DepSentence& s);

}  // namespace wrapforge
