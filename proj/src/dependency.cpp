#include "wrapforge/dependency.hpp"

#include <charconv>
#include <cstdlib>

#include "wrapforge/text.hpp"

namespace wrapforge {

namespace {

bool parse_int(std::string_view s, int* out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::string comment_value(std::string_view comment, std::string_view key) {
  // "# key = value"
  std::string_view body = trim(comment.substr(1));
  if (body.substr(0, key.size()) != key) return {};
  body = trim(body.substr(key.size()));
  if (body.empty() || body.front() != '=') return {};
  return std::string(trim(body.substr(1)));
}

}  // namespace

void validate_tree(const DepSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) throw TreeError("empty sentence");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const DepToken& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1) throw TreeError("token indices are not 1..n at position " + std::to_string(i + 1));
    if (t.head < 0 || t.head > n) throw TreeError("head " + std::to_string(t.head) + " out of range");
    if (t.head == t.index) throw TreeError("token " + std::to_string(t.index) + " heads itself");
    if (t.head == 0) ++roots;
  }
  if (roots != 1) throw TreeError("expected exactly one root, found " + std::to_string(roots));
  // 0 = unvisited, 1 = on current path, 2 = reaches root
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);
  state[0] = 2;
  for (int i = 1; i <= n; ++i) {
    std::vector<int> path;
    int cur = i;
    while (state[static_cast<std::size_t>(cur)] == 0) {
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
    if (state[static_cast<std::size_t>(cur)] == 1) {
      throw TreeError("cycle through token " + std::to_string(cur));
    }
    for (int p : path) state[static_cast<std::size_t>(p)] = 2;
  }
}

ConlluResult parse_conllu(std::istream& in) {
  ConlluResult result;
  DepSentence current;
  std::string doc_id;
  std::size_t line_no = 0;
  std::size_t sentence_line = 0;

  auto flush = [&] {
    if (current.tokens.empty()) {
      current = {};
      return;
    }
    current.doc_id = doc_id;
    try {
      validate_tree(current);
      result.sentences.push_back(std::move(current));
    } catch (const TreeError& e) {
      result.errors.push_back({sentence_line, e.what()});
    }
    current = {};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      if (auto v = comment_value(line, "newdoc id"); !v.empty()) doc_id = v;
      else if (trim(std::string_view(line).substr(1)) == "newdoc") doc_id = "doc" + std::to_string(line_no);
      if (auto v = comment_value(line, "sent_id"); !v.empty()) current.sent_id = v;
      continue;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ConlluFormatError(line_no, "expected 10 tab-separated columns, got " + std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) continue;
    DepToken tok;
    if (!parse_int(cols[0], &tok.index)) throw ConlluFormatError(line_no, "bad ID '" + cols[0] + "'");
    if (!parse_int(cols[6], &tok.head)) throw ConlluFormatError(line_no, "bad HEAD '" + cols[6] + "'");
    tok.form = cols[1];
    if (current.tokens.empty()) sentence_line = line_no;
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return result;
}

std::size_t tree_depth(const DepSentence& s) {
  const std::size_t n = s.tokens.size();
  std::vector<std::size_t> depth(n + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::size_t> path;
    std::size_t cur = i;
    while (cur != 0 && depth[cur] == 0) {
      path.push_back(cur);
      cur = static_cast<std::size_t>(s.tokens[cur - 1].head);
    }
    std::size_t d = cur == 0 ? 0 : depth[cur];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
    best = std::max(best, depth[i]);
  }
  return best;
}

std::optional<double> mean_dependency_distance(const DepSentence& s) {
  std::size_t edges = 0;
  long long total = 0;
  for (const DepToken& t : s.tokens) {
    if (t.head == 0) continue;
    total += std::llabs(static_cast<long long>(t.index) - t.head);
    ++edges;
  }
  if (edges == 0) return std::nullopt;
  return static_cast<double>(total) / static_cast<double>(edges);
}

}  // namespace wrapforge
