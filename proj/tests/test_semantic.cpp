#include "doctest.h"
#include "support.hpp"
#include "wrapforge/embeddings.hpp"
#include "wrapforge/mock_server.hpp"
#include "wrapforge/pairing.hpp"

#include <cmath>

using namespace wrapforge;

namespace {

std::vector<Document> ten_docs() {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i) {
    std::string text;
    for (int t = 1; t <= 10; ++t) text += (t > 1 ? " " : "") + std::string("t") + std::to_string(t);
    docs.push_back({"d" + std::to_string(i), text + " d" + std::to_string(i), "c4", {}});
  }
  return docs;
}

EmbeddingVector<double> vec(std::initializer_list<double> xs) {
  EmbeddingVector<double> v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("cosine examples") {
  const auto x = vec({0.3, -1.2, 4.0});
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine_similarity(vec({1, 1}), vec({1, 0})) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cosine_similarity(vec({1, 0}), vec({-2, 0})) == -1.0);
  CHECK_THROWS_AS(cosine_similarity(vec({0, 0}), vec({1, 0})), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(cosine_similarity(vec({NAN, 1}), vec({1, 0})), std::invalid_argument);

  Eigen::Vector3f f(1, 2, 3);
  CHECK(cosine_similarity(f, f) == doctest::Approx(1.0f));
}

TEST_CASE("property: symmetry, scale invariance, bounds") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index dim = static_cast<Eigen::Index>(testing::uniform(rng, 1, 32));
    EmbeddingVector<double> u(dim), v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      u(k) = testing::unit_real(rng) * 2 - 1;
      v(k) = testing::unit_real(rng) * 2 - 1;
    }
    if (u.norm() == 0 || v.norm() == 0) continue;
    const double c = cosine_similarity(u, v);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(cosine_similarity(v, u) == doctest::Approx(c).epsilon(1e-12));
    const double a = 0.01 + testing::unit_real(rng) * 100, b = 0.01 + testing::unit_real(rng) * 100;
    CHECK(std::abs(cosine_similarity((a * u).eval(), (b * v).eval()) - c) < 1e-12);
    CHECK(std::abs(cosine_similarity(u, u) - 1.0) < 1e-12);
  }
}

TEST_CASE("rowwise cosine") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 0, 1, 1;
  b << 0, 1, 1, 0;
  const auto c = rowwise_cosine(a, b);
  CHECK(c(0) == 0.0);
  CHECK(c(1) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("mock embeddings") {
  const auto e3 = mock_embedding("basis:3", 8);
  CHECK(e3.size() == 8);
  CHECK(e3(3) == 1.0);
  CHECK(e3.sum() == 1.0);
  const auto h = mock_embedding("Some Words here", 64);
  CHECK(h.norm() == doctest::Approx(1.0));
  CHECK(h == mock_embedding("some words HERE", 64));
}

TEST_CASE("embed_texts through the mock endpoint") {
  MockOptions o;
  o.embedding_dim = 16;
  MockServer server(o);
  EndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.embedding_batch = 7;

  CHECK(embed_texts({}, cfg).empty());
  CHECK(server.stats().requests == 0);

  std::vector<std::string> texts;
  for (int i = 0; i < 1000; ++i) texts.push_back("basis:" + std::to_string(i % 16));
  const auto vs = embed_texts(texts, cfg);
  REQUIRE(vs.size() == 1000);
  for (int i = 0; i < 1000; ++i) {
    CHECK(vs[i].size() == 16);
    CHECK(vs[i](i % 16) == 1.0);
    CHECK(vs[i].sum() == 1.0);
  }
  CHECK(server.stats().requests == (1000 + 6) / 7);
}

TEST_CASE("split_halves") {
  CHECK(split_halves("a b c d e f g h i j") == std::pair<std::string, std::string>{"a b c d e", "f g h i j"});
  CHECK(split_halves("a  b\nc") == std::pair<std::string, std::string>{"a  b", "c"});
  CHECK(split_halves("solo") == std::pair<std::string, std::string>{"solo", ""});
}

TEST_CASE("pairing strategies on a ten-document corpus") {
  const auto docs = ten_docs();
  std::vector<SyntheticRecord> syn;
  for (int i = 0; i < 10; i += 3) {
    syn.push_back({"d" + std::to_string(i) + "#0", "d" + std::to_string(i), 0, "medium", "reph " + std::to_string(i), "m", "v"});
  }
  syn.push_back({"ghost#0", "ghost", 0, "medium", "orphan", "m", "v"});

  const auto sr = make_pairs(docs, syn, PairingStrategy::SynthReal);
  REQUIRE(sr.pairs.size() == 4);
  CHECK(sr.pairs[1] == TextPair{"d3#0", "d3", "reph 3", docs[3].text});
  CHECK(sr.skipped == std::vector<std::string>{"ghost#0"});

  const auto hh = make_pairs(docs, {}, PairingStrategy::HalfVsHalf);
  REQUIRE(hh.pairs.size() == 10);
  // 11 tokens: the first half takes the extra one.
  CHECK(hh.pairs[0].left == "t1 t2 t3 t4 t5 t6");
  CHECK(hh.pairs[0].right == "t7 t8 t9 t10 d0");

  const auto hf = make_pairs(docs, {}, PairingStrategy::HalfVsFull);
  REQUIRE(hf.pairs.size() == 10);
  CHECK(hf.pairs[4].left == "t1 t2 t3 t4 t5 t6");
  CHECK(hf.pairs[4].right == docs[4].text);

  const auto rr = make_pairs(docs, {}, PairingStrategy::RandomRealReal, 123);
  REQUIRE(rr.pairs.size() == 10);
  std::mt19937_64 oracle(123);
  for (std::size_t i = 0; i < 10; ++i) {
    const std::size_t j = (i + 1 + oracle() % 9) % 10;
    CHECK(rr.pairs[i].left_id == docs[i].id);
    CHECK(rr.pairs[i].right_id == docs[j].id);
    CHECK(rr.pairs[i].left_id != rr.pairs[i].right_id);
  }
  CHECK(make_pairs(docs, {}, PairingStrategy::RandomRealReal, 123).pairs == rr.pairs);

  const std::vector<Document> one(docs.begin(), docs.begin() + 1);
  CHECK_THROWS_AS(make_pairs(one, {}, PairingStrategy::RandomRealReal), std::invalid_argument);
  CHECK_THROWS_AS(make_pairs({}, {}, PairingStrategy::HalfVsFull), std::invalid_argument);
  const std::vector<Document> tiny{{"x", "word", "c4", {}}};
  CHECK(make_pairs(tiny, {}, PairingStrategy::HalfVsHalf).skipped == std::vector<std::string>{"x"});

  for (auto s : {PairingStrategy::SynthReal, PairingStrategy::RandomRealReal, PairingStrategy::HalfVsFull,
                 PairingStrategy::HalfVsHalf}) {
    CHECK(parse_pairing_strategy(to_string(s)) == s);
  }
}
