#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "tough/errors.hpp"
#include "tough/toymodel.hpp"

using namespace tough;
using tough::testing::random_toy_fixture;

TEST_CASE("candidate spans") {
  auto s = candidate_spans(3, 2);
  REQUIRE(s == std::vector<TokenSpan>{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  REQUIRE_THROWS_AS(candidate_spans(0, 2), PreconditionError);
  REQUIRE_THROWS_AS(candidate_spans(3, 0), PreconditionError);
}

TEST_CASE("pooling prefers content words and flags all-OOV text") {
  auto table = EmbeddingTable::from_rows({{"the", {1, 1}}, {"cat", {2, 0}}, {"dog", {0, 4}}});
  std::vector<std::string> toks{"the", "cat", "dog", "zebra"};
  auto rep = pooled_rep(toks, table, {}, default_stopwords());
  REQUIRE(rep.vector.isApprox(Eigen::Vector2d(1, 2)));
  std::vector<std::string> only_stop{"the", "of"};
  REQUIRE(pooled_rep(only_stop, table, {}, default_stopwords()).vector.isApprox(Eigen::Vector2d(1, 1)));
  std::vector<std::string> oov{"zebra"};
  auto none = pooled_rep(oov, table, {}, default_stopwords());
  REQUIRE(none.all_oov);
  REQUIRE(none.vector.isZero());

  std::map<std::string, Eigen::VectorXd> over{{"cat", Eigen::Vector2d(0, 0)}};
  REQUIRE(pooled_rep(toks, table, over, default_stopwords()).vector.isApprox(Eigen::Vector2d(0, 2)));
}

TEST_CASE("prediction agrees with an exhaustive span search") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto f = random_toy_fixture(seed);
    ToyModel model(f.params, f.table);
    auto got = model.predict(f.example.context, f.example.question);
    auto want = testing::exhaustive_best_span(f.params, f.table, f.example.context,
                                              f.example.question);
    INFO("seed " << seed);
    REQUIRE(*got.answer.score == Catch::Approx(want.score).margin(1e-9));
    if (std::fabs(*got.answer.score - want.score) > 1e-9) continue;
    REQUIRE(got.span == TokenSpan{want.start, want.end});
  }
}

TEST_CASE("answers carry character offsets") {
  auto table = EmbeddingTable::from_rows({{"łódź", {1, 0}}, {"city", {0, 1}}});
  ToyModel model(ToyModelParams::identity(2), table);
  auto p = model.predict("Żółw city łódź", "łódź?");
  REQUIRE(p.answer.answer_text == "łódź");
  REQUIRE(*p.answer.span == CharSpan{10, 14});
  REQUIRE_FALSE(p.degenerate);
  REQUIRE(model.predict("city łódź", "unknownword").degenerate);
}

TEST_CASE("ties go to the shorter, then leftmost span") {
  auto table = EmbeddingTable::from_rows({{"a", {1, 0}}, {"b", {1, 0}}, {"q", {1, 0}}});
  ToyModel model(ToyModelParams::identity(2), table);
  REQUIRE(model.predict("b a", "q").span == TokenSpan{0, 1});
}

TEST_CASE("dimension mismatch is a configuration error") {
  auto table = EmbeddingTable::from_rows({{"a", {1, 0}}});
  REQUIRE_THROWS_AS(ToyModel(ToyModelParams::identity(3), table), ConfigError);
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    INFO("seed " << seed);
    REQUIRE(testing::finite_difference_error(random_toy_fixture(seed), 1e-4) < 1e-4);
  }
}

TEST_CASE("loss is the softmax cross-entropy of the gold span") {
  auto table = EmbeddingTable::from_rows({{"x", {1.0}}, {"y", {2.0}}, {"q", {1.0}}});
  ToyModelConfig cfg;
  cfg.max_span_len = 1;
  auto params = ToyModelParams::identity(1, cfg);
  QAExample ex{"e", "x y", "q", {Gold{"y", 2}}};
  auto lg = loss_and_grads(params, table, ex, 0);
  REQUIRE(lg);
  REQUIRE(lg->gold == TokenSpan{1, 2});
  REQUIRE(lg->loss == Catch::Approx(std::log(std::exp(1.0) + std::exp(2.0)) - 2.0));
  REQUIRE(lg->grad_embeddings.empty());

  QAExample none{"n", "x y", "q", {Gold{"zebra", -1}}};
  REQUIRE_FALSE(loss_and_grads(params, table, none, 0));
}

TEST_CASE("training lowers the loss and keeps frozen embeddings") {
  auto f = random_toy_fixture(5);
  std::vector<QAExample> data{f.example};
  TrainConfig cfg;
  cfg.epochs = 20;
  auto frozen = train(f.params, f.table, data, cfg);
  REQUIRE(frozen.epoch_mean_loss.back() < frozen.epoch_mean_loss.front());
  REQUIRE(frozen.params.embedding_overrides.size() == f.params.embedding_overrides.size());
  for (const auto& [w, v] : f.params.embedding_overrides)
    REQUIRE(frozen.params.embedding_overrides.at(w) == v);

  cfg.grad_top_k = f.table.size();
  auto tuned = train(f.params, f.table, data, cfg);
  REQUIRE(tuned.params.embedding_overrides.size() > f.params.embedding_overrides.size());

  auto again = train(f.params, f.table, data, cfg);
  REQUIRE(again.params == tuned.params);

  std::vector<QAExample> hopeless{{"h", "w1 w2", "w3", {Gold{"zebra", -1}}}};
  REQUIRE_THROWS_AS(train(f.params, f.table, hopeless, cfg), ValidationError);
  REQUIRE_THROWS_AS(train(f.params, f.table, {}, cfg), PreconditionError);
}

TEST_CASE("non-finite losses are reported as divergence") {
  auto f = random_toy_fixture(2);
  f.params.interaction(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::vector<QAExample> data{f.example};
  TrainConfig cfg;
  REQUIRE_THROWS_AS(train(f.params, f.table, data, cfg), DivergenceError);
}

TEST_CASE("snapshots round-trip bit for bit") {
  auto f = random_toy_fixture(9);
  f.params.interaction(0, 0) = 0.1 + 0.2;
  f.params.interaction(1, 0) = -0.0;
  f.params.embedding_overrides["w0"] = Eigen::VectorXd::Constant(f.params.dimension(), 1e-310);
  std::stringstream ss;
  save_params(ss, f.params);
  auto loaded = load_params(ss);
  REQUIRE(loaded == f.params);
  REQUIRE(std::signbit(loaded.interaction(1, 0)));

  std::stringstream again;
  save_params(again, loaded);
  std::stringstream first;
  save_params(first, f.params);
  REQUIRE(again.str() == first.str());
}

TEST_CASE("malformed snapshots") {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return load_params(in);
  };
  REQUIRE_THROWS_AS(bad("nope\n"), FormatError);
  REQUIRE_THROWS_AS(bad("tough-toymodel v1\ndimension 2\n"), FormatError);
  REQUIRE_THROWS_AS(bad("tough-toymodel v1\ndimension 1\nmax_span_len 2\nmax_context_tokens 9\n"
                        "stopwords 0\ninteraction\nzz\noverrides 0\nend\n"),
                    FormatError);
  REQUIRE_NOTHROW(bad("tough-toymodel v1\ndimension 1\nmax_span_len 2\nmax_context_tokens 9\n"
                      "stopwords 0\ninteraction\n1p+0\noverrides 0\nend\n"));
}
