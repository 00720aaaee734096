#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "tough/embeddings.hpp"
#include "tough/errors.hpp"

using namespace tough;
using Catch::Matchers::WithinAbs;

namespace {

EmbeddingTable parse(const std::string& text, LoadOptions opts = {}) {
  std::istringstream in(text);
  return EmbeddingTable::load(in, opts);
}

}  // namespace

TEST_CASE("GloVe text format loads in frequency order") {
  auto t = parse("the 0.1 0.2 0.3\nup 1 0 0\r\ndown 0.9 0.1 0\n\nUp 5 5 5\n");
  REQUIRE(t.dimension() == 3);
  REQUIRE(t.size() == 4);
  REQUIRE(t.frequency_rank("the") == 0u);
  REQUIRE(t.frequency_rank("down") == 2u);
  REQUIRE(t.frequency_rank("Up") == 3u);
  REQUIRE(t.find("DOWN") == 2u);
  REQUIRE_FALSE(t.find("left"));
  REQUIRE(t.is_top_k("up", 2));
  REQUIRE_FALSE(t.is_top_k("down", 2));
}

TEST_CASE("duplicates keep the first row and max_vocab truncates") {
  auto t = parse("a 1 0\nb 0 1\na 5 5\nc 1 1\n");
  REQUIRE(t.size() == 3);
  REQUIRE(t.dropped_duplicates() == 1);
  REQUIRE(t.vector(0)[0] == 1.0f);
  LoadOptions opts;
  opts.max_vocab = 2;
  REQUIRE(parse("a 1 0\nb 0 1\nc 1 1\n", opts).size() == 2);
  opts = {};
  opts.case_policy = CasePolicy::fold_lower;
  auto folded = parse("Paris 1 0\nparis 0 1\n", opts);
  REQUIRE(folded.size() == 1);
}

TEST_CASE("malformed embedding files are rejected with a line number") {
  REQUIRE_THROWS_AS(parse(""), FormatError);
  REQUIRE_THROWS_AS(parse("a 1 0\nb 1\n"), FormatError);
  REQUIRE_THROWS_AS(parse("a 1 x\n"), FormatError);
  REQUIRE_THROWS_AS(parse("a 1 nan\n"), FormatError);
  try {
    parse("a 1 0\nb 1 0\nc 1\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(e.line() == 3);
  }
}

TEST_CASE("cosine similarity") {
  std::vector<double> a{1, 0}, b{1, 1}, z{0, 0};
  REQUIRE_THAT(cosine(a, b), WithinAbs(1 / std::sqrt(2.0), 1e-12));
  REQUIRE_THROWS_AS(cosine(a, z), UndefinedSimilarityError);
  std::vector<double> c{1, 0, 0};
  REQUIRE_THROWS_AS(cosine(a, c), PreconditionError);
}

TEST_CASE("nearest neighbours: exclusions, zero vectors, unknown query") {
  auto t = EmbeddingTable::from_rows({{"up", {1, 0}},
                                      {"down", {0.9, 0.1}},
                                      {"Down", {0.9, 0.1}},
                                      {"zero", {0, 0}},
                                      {"left", {0, 1}}});
  auto n = t.nearest_neighbors("up", 10);
  REQUIRE(n.size() == 3);
  REQUIRE(n[0].word == "down");
  REQUIRE(n[1].word == "Down");  // exact tie, lower rank first
  std::vector<std::string> excl{"DOWN"};
  auto m = t.nearest_neighbors("up", 10, excl);
  REQUIRE(m.size() == 1);
  REQUIRE(m[0].word == "left");
  REQUIRE_THROWS_AS(t.nearest_neighbors("sideways", 3), OovError);
  REQUIRE_THROWS_AS(t.nearest_neighbors("zero", 3), UndefinedSimilarityError);
  REQUIRE(t.nearest_neighbors("up", 0).empty());
}

TEST_CASE("nearest neighbours equal a brute-force scan") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto rows = testing::random_rows(seed, 300, 8, 20);
    auto t = EmbeddingTable::from_rows(rows);
    for (std::size_t k : {1u, 5u, 10u}) {
      const auto& q = rows[seed * 7 % rows.size()].first;
      auto fast = t.nearest_neighbors(q, k, {}, 3);
      auto slow = testing::brute_force_neighbors(t, q, k);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t i = 0; i < fast.size(); ++i) {
        REQUIRE(fast[i].word == slow[i].word);
        REQUIRE_THAT(fast[i].similarity, WithinAbs(slow[i].similarity, 1e-12));
      }
    }
  }
}
