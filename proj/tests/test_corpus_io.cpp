#include "doctest.h"
#include "support.hpp"
#include "wrapforge/corpus_io.hpp"

#include <random>

using namespace wrapforge;
using wrapforge::testing::TempDir;

namespace {

std::string repeat_words(std::size_t n, const std::string& w = "w") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + w + std::to_string(i);
  return out;
}

std::vector<std::string> token_strings(std::string_view text, TokenScheme s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text, s)) out.emplace_back(t.view(text));
  return out;
}

}  // namespace

TEST_CASE("parse_document_line validation") {
  const Document d = parse_document_line(R"({"id":"a","text":"hi","source":"c4","meta":{"k":"v"}})");
  CHECK(d.id == "a");
  CHECK(d.meta.at("k") == "v");
  CHECK_THROWS_AS(parse_document_line(R"({"id":"a","text":"hi"})"), CorpusError);
  CHECK_THROWS_AS(parse_document_line(R"({"id":1,"text":"hi","source":"s"})"), CorpusError);
  CHECK_THROWS_AS(parse_document_line(R"({"id":"","text":"hi","source":"s"})"), CorpusError);
  CHECK_THROWS_AS(parse_document_line(R"({"id":"a","text":"  \n","source":"s"})"), CorpusError);
  CHECK_THROWS_AS(parse_document_line(R"({"id":"a","text":"x","source":"s","meta":{"n":3}})"), CorpusError);
  CHECK_THROWS_AS(parse_document_line("[1,2]"), CorpusError);
  CHECK_THROWS_AS(parse_document_line("{oops"), CorpusError);
}

TEST_CASE("serialize_document uses a fixed key order") {
  Document d{"x", "line one\nline \"two\"", "c4", {{"b", "2"}, {"a", "1"}}};
  CHECK(serialize_document(d) ==
        R"({"id":"x","text":"line one\nline \"two\"","source":"c4","meta":{"a":"1","b":"2"}})");
  CHECK(serialize_document({"y", "t", "s", {}}) == R"({"id":"y","text":"t","source":"s"})");
}

TEST_CASE("load_shard lenient and strict") {
  TempDir dir;
  const auto path = dir / "in.jsonl";
  testing::spit(path, "{\"id\":\"1\",\"text\":\"a\",\"source\":\"s\"}\nnot json\n\n"
                      "{\"id\":\"2\",\"text\":\"b\",\"source\":\"s\"}\n{\"id\":\"1\",\"text\":\"c\",\"source\":\"s\"}\n");
  const LoadedShard lenient = load_shard(path);
  REQUIRE(lenient.documents.size() == 2);
  CHECK(lenient.documents[1].id == "2");
  REQUIRE(lenient.errors.size() == 2);
  CHECK(lenient.errors[0].line == 2);
  CHECK(lenient.errors[1].line == 5);
  CHECK(lenient.errors[1].message.find("duplicate") != std::string::npos);
  try {
    load_shard(path, ReadMode::Strict);
    FAIL("strict mode should throw");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  testing::spit(dir / "empty.jsonl", "");
  CHECK(load_shard(dir / "empty.jsonl").documents.empty());
  CHECK_THROWS_AS(load_shard(dir / "missing.jsonl"), CorpusError);
}

TEST_CASE("write_shard rollover and manifests") {
  TempDir dir;
  std::vector<Document> docs;
  for (int i = 0; i < 5; ++i) docs.push_back({"d" + std::to_string(i), "one two", i < 4 ? "c4" : "syn", {}});
  const auto manifests = write_shard(docs, dir / "out", 2);
  REQUIRE(manifests.size() == 3);
  CHECK(manifests[0].path == (dir / "out-00000.jsonl").string());
  CHECK(manifests[2].path == (dir / "out-00002.jsonl").string());
  CHECK(manifests[0].record_count == 2);
  CHECK(manifests[2].record_count == 1);
  CHECK(manifests[1].token_count == 4);
  CHECK(manifests[1].source == "c4");
  CHECK(manifests[2].source == "syn");
  CHECK(write_shard({}, dir / "none", 2).empty());
  CHECK(!std::filesystem::exists(dir / "none-00000.jsonl"));
  const auto one = write_shard(std::span(docs).first(2), dir / "two", 10);
  REQUIRE(one.size() == 1);
  CHECK(one[0].record_count == 2);
  CHECK_THROWS_AS(write_shard(docs, dir / "bad", 0), CorpusError);

  std::vector<Document> mixed = {docs[3], docs[4]};
  CHECK(write_shard(mixed, dir / "mixed", 5)[0].source == "mixed");
}

TEST_CASE("manifest counts equal a re-scan") {
  TempDir dir;
  std::mt19937_64 rng(5);
  std::vector<Document> docs;
  for (int i = 0; i < 37; ++i) {
    std::string text = testing::random_text(rng, 30);
    if (trim(text).empty()) text = "filler";
    docs.push_back({"id" + std::to_string(i), text, "c4", {}});
  }
  for (const auto& m : write_shard(docs, dir / "s", 10)) {
    const auto loaded = load_shard(m.path, ReadMode::Strict);
    std::size_t tokens = 0;
    for (const auto& d : loaded.documents) tokens += count_tokens(d.text, TokenScheme::WhitespaceWords);
    CHECK(loaded.documents.size() == m.record_count);
    CHECK(tokens == m.token_count);
  }
}

TEST_CASE("shard round trip with unicode, newlines and long texts") {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i) {
    std::string text = testing::random_text(rng, i % 10 == 0 ? 3000 : 50);
    if (trim(text).empty()) text = "ünïcødé — text";
    Document d{"doc/" + std::to_string(i), text, i % 2 ? "c4" : "synthetic-qa", {}};
    if (i % 3 == 0) d.meta = {{"parent_id", "p" + std::to_string(i)}, {"note", "tab\there \"quoted\""}};
    docs.push_back(std::move(d));
  }
  std::vector<Document> back;
  for (const auto& m : write_shard(docs, dir / "rt", 64)) {
    for (auto& d : load_shard(m.path, ReadMode::Strict).documents) back.push_back(std::move(d));
  }
  CHECK(back == docs);
}

TEST_CASE("chunker examples") {
  SUBCASE("fits in one chunk") {
    const Document d{"a", repeat_words(120) + ".", "c4", {}};
    const auto chunks = chunk_document(d, 300);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].token_count == 120);
    CHECK(chunks[0].text == d.text);
  }
  SUBCASE("single oversized sentence is cut on tokens") {
    const Document d{"b", repeat_words(301), "c4", {}};
    const auto chunks = chunk_document(d, 300);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].token_count == 300);
    CHECK(chunks[1].token_count == 1);
    CHECK(chunks[1].text == "w300");
  }
  SUBCASE("greedy sentence packing") {
    const std::string s1 = "Alpha " + repeat_words(149, "a") + ".";
    const std::string s2 = "Beta " + repeat_words(149, "b") + ".";
    const std::string s3 = "Gamma " + repeat_words(149, "c") + ".";
    const Document d{"c", s1 + " " + s2 + " " + s3, "c4", {}};
    const auto chunks = chunk_document(d, 300);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == s1 + " " + s2);
    CHECK(chunks[1].text == s3);
    CHECK(chunks[0].index == 0);
    CHECK(chunks[1].index == 1);
    CHECK(chunks[1].parent_id == "c");
  }
  SUBCASE("empty document") {
    CHECK(chunk_document({"e", "   ", "c4", {}}, 300).empty());
    CHECK_THROWS_AS(chunk_document({"e", "x", "c4", {}}, 0), std::invalid_argument);
  }
  SUBCASE("opening quote stays with its sentence") {
    const Document d{"q", "One two three. \"Four five six.\"", "c4", {}};
    const auto chunks = chunk_document(d, 3);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[1].text == "\"Four five six.\"");
  }
}

TEST_CASE("chunker bound and losslessness on random documents") {
  std::mt19937_64 rng(2024);
  for (const TokenScheme scheme : {TokenScheme::WhitespaceWords, TokenScheme::UnicodeWords}) {
    for (int iter = 0; iter < 500; ++iter) {
      const Document d{"r", testing::random_text(rng, 400), "c4", {}};
      const std::size_t max_tokens = testing::uniform(rng, 1, 60);
      const auto chunks = chunk_document(d, max_tokens, scheme);
      std::vector<std::string> rebuilt;
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        REQUIRE(chunks[c].index == c);
        REQUIRE(chunks[c].token_count >= 1);
        REQUIRE(chunks[c].token_count <= max_tokens);
        const auto toks = token_strings(chunks[c].text, scheme);
        REQUIRE(toks.size() == chunks[c].token_count);
        rebuilt.insert(rebuilt.end(), toks.begin(), toks.end());
      }
      REQUIRE(rebuilt == token_strings(d.text, scheme));
    }
  }
}
