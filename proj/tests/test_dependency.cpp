#include "doctest.h"
#include "support.hpp"
#include "wrapforge/dependency.hpp"

#include <fstream>
#include <queue>
#include <sstream>

using namespace wrapforge;

namespace {

ConlluResult parse_string(const std::string& s) {
  std::istringstream in(s);
  return parse_conllu(in);
}

std::string row(int id, int head) {
  return std::to_string(id) + "\tw\tw\tX\t_\t_\t" + std::to_string(head) + "\tdep\t_\t_\n";
}

// Random tree: a random permutation fixes an insertion order; each node after
// the first attaches to an earlier node of that order.
DepSentence random_tree(std::mt19937_64& rng, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  for (int i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  DepSentence s;
  s.tokens.resize(n);
  for (int i = 0; i < n; ++i) s.tokens[i].index = i + 1;
  s.tokens[order[0] - 1].head = 0;
  for (int k = 1; k < n; ++k) s.tokens[order[k] - 1].head = order[rng() % k];
  return s;
}

// Oracle: breadth-first search from the root over an explicit child list.
std::size_t bfs_depth(const DepSentence& s) {
  const int n = static_cast<int>(s.size());
  std::vector<std::vector<int>> children(n + 1);
  for (const auto& t : s.tokens) children[t.head].push_back(t.index);
  std::queue<std::pair<int, std::size_t>> q;
  q.push({0, 0});
  std::size_t deepest = 0;
  while (!q.empty()) {
    auto [node, depth] = q.front();
    q.pop();
    deepest = std::max(deepest, depth);
    for (int c : children[node]) q.push({c, depth + 1});
  }
  return deepest;
}

// Oracle: enumerate every (dependent, head) edge.
std::optional<double> edge_mdd(const DepSentence& s) {
  double sum = 0;
  int edges = 0;
  for (const auto& t : s.tokens) {
    if (t.head == 0) continue;
    sum += std::abs(t.index - t.head);
    ++edges;
  }
  if (edges == 0) return std::nullopt;
  return sum / edges;
}

}  // namespace

TEST_CASE("bundled CoNLL-U fixtures") {
  std::ifstream in(testing::data_path("conllu/fixtures.conllu"));
  const auto r = parse_conllu(in);
  CHECK(r.errors.empty());
  REQUIRE(r.sentences.size() == 6);

  const auto& he = r.sentences[0];
  CHECK(he.sent_id == "s1");
  CHECK(he.doc_id == "fixture-1");
  CHECK(he.tokens[0] == DepToken{1, 2, "He"});
  CHECK(he.tokens[1].head == 0);
  CHECK(tree_depth(he) == 2);
  CHECK(*mean_dependency_distance(he) == 1.0);

  CHECK(tree_depth(r.sentences[1]) == 4);
  CHECK(*mean_dependency_distance(r.sentences[1]) == 1.0);
  CHECK(tree_depth(r.sentences[2]) == 2);
  CHECK(*mean_dependency_distance(r.sentences[2]) == 3.0);
  CHECK(tree_depth(r.sentences[3]) == 1);
  CHECK(!mean_dependency_distance(r.sentences[3]));

  const auto& s5 = r.sentences[4];
  CHECK(s5.doc_id == "fixture-2");
  CHECK(tree_depth(s5) == 3);
  CHECK(*mean_dependency_distance(s5) == doctest::Approx(10.0 / 6.0).epsilon(1e-15));

  const auto& mwt = r.sentences[5];
  CHECK(mwt.size() == 4);
  CHECK(tree_depth(mwt) == 3);
  CHECK(*mean_dependency_distance(mwt) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("three-token chain") {
  const auto r = parse_string(row(1, 2) + row(2, 3) + row(3, 0));
  REQUIRE(r.sentences.size() == 1);
  CHECK(*mean_dependency_distance(r.sentences[0]) == 1.0);
  CHECK(tree_depth(r.sentences[0]) == 3);
}

TEST_CASE("invalid trees are reported per sentence") {
  const auto r = parse_string(row(1, 2) + row(2, 1) + "\n" + row(1, 0) + "\n" + row(1, 0) + row(2, 0) + "\n" +
                              row(1, 5) + "\n");
  CHECK(r.sentences.size() == 1);
  REQUIRE(r.errors.size() == 3);
  CHECK(r.errors[0].line == 1);
  CHECK(r.errors[1].line == 6);
  CHECK(r.errors[2].line == 9);

  DepSentence cyc;
  cyc.tokens = {{1, 2, "a"}, {2, 3, "b"}, {3, 2, "c"}, {4, 0, "d"}};
  CHECK_THROWS_AS(validate_tree(cyc), TreeError);
  DepSentence gap;
  gap.tokens = {{1, 0, "a"}, {3, 1, "b"}};
  CHECK_THROWS_AS(validate_tree(gap), TreeError);
}

TEST_CASE("format errors carry the line number") {
  try {
    parse_string("# c\n" + row(1, 0) + "2\tbad\trow\n");
    FAIL("expected ConlluFormatError");
  } catch (const ConlluFormatError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_string("x\tw\tw\tX\t_\t_\t0\tdep\t_\t_\n"), ConlluFormatError);
  CHECK_THROWS_AS(parse_string("1\tw\tw\tX\t_\t_\tq\tdep\t_\t_\n"), ConlluFormatError);
}

TEST_CASE("comment-only and empty inputs") {
  CHECK(parse_string("# a\n# b\n\n").sentences.empty());
  CHECK(parse_string("").sentences.empty());
  // Empty nodes (decimal ids) are skipped like multiword ranges.
  const auto r = parse_string(row(1, 0) + "1.1\tw\tw\tX\t_\t_\t_\t_\t_\t_\n" + row(2, 1));
  REQUIRE(r.sentences.size() == 1);
  CHECK(r.sentences[0].size() == 2);
}

TEST_CASE("property: metrics agree with graph oracles on random trees") {
  std::mt19937_64 rng(424242);
  std::string conllu;
  std::vector<DepSentence> trees;
  for (int i = 0; i < 1000; ++i) {
    const int n = static_cast<int>(testing::uniform(rng, 1, 40));
    DepSentence s = random_tree(rng, n);
    REQUIRE_NOTHROW(validate_tree(s));
    CHECK(tree_depth(s) == bfs_depth(s));
    const auto mdd = mean_dependency_distance(s);
    const auto want = edge_mdd(s);
    REQUIRE(mdd.has_value() == want.has_value());
    if (mdd) CHECK(*mdd == doctest::Approx(*want).epsilon(1e-12));
    for (const auto& t : s.tokens) conllu += row(t.index, t.head);
    conllu += "\n";
    trees.push_back(std::move(s));
  }
  // The same trees survive a CoNLL-U round trip.
  const auto parsed = parse_string(conllu);
  CHECK(parsed.errors.empty());
  REQUIRE(parsed.sentences.size() == trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) CHECK(tree_depth(parsed.sentences[i]) == tree_depth(trees[i]));
}
