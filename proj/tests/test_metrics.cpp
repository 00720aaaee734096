#include <catch_amalgamated.hpp>

#include <fstream>

#include "tough/errors.hpp"
#include "tough/metrics.hpp"

using namespace tough;

namespace {

QAExample example(std::string id, std::string gold) {
  return QAExample{std::move(id), "ctx " + gold, "q?", {Gold{gold, 4}}};
}

PerturbedExample perturbed(const QAExample& base, Mode mode, std::optional<bool> ok = {}) {
  PerturbedExample p;
  p.base = base;
  p.mode = mode;
  p.keyword = "q";
  p.replacement = "r";
  p.perturbed_question = "r?";
  p.semantic_ok = ok;
  return p;
}

ModelAnswer said(std::string text) { return ModelAnswer{std::move(text), {}, {}}; }

}  // namespace

TEST_CASE("normalisation") {
  REQUIRE(normalize_answer("The  Eiffel, Tower!") == "eiffel tower");
  REQUIRE(normalize_answer("an apple a day") == "apple day");
  REQUIRE(normalize_answer("theatre") == "theatre");
  REQUIRE(normalize_answer("ΣΟΦΟΣ") == "σοφος");
  REQUIRE(normalize_answer("a\xC2\xA0" "b") == "b");
  REQUIRE(normalize_answer("") == "");
}

TEST_CASE("EM and F1 agree with the reference evaluator on the golden pairs") {
  std::ifstream in(std::string(TOUGH_SOURCE_DIR) + "/tests/fixtures/squad_goldens.json");
  REQUIRE(in);
  auto cases = Json::parse(in);
  REQUIRE(cases.size() >= 25);
  for (const auto& c : cases) {
    auto prediction = c.at("prediction").get<std::string>();
    auto golds = c.at("golds").get<std::vector<std::string>>();
    INFO(prediction);
    REQUIRE(exact_match(prediction, golds) == c.at("em").get<int>());
    REQUIRE(token_f1(prediction, golds) == Catch::Approx(c.at("f1").get<double>()).margin(1e-12));
  }
}

TEST_CASE("F1 edge cases") {
  std::vector<std::string> empty_gold{""};
  REQUIRE(token_f1("", empty_gold) == 1.0);
  REQUIRE(token_f1("the", empty_gold) == 1.0);
  REQUIRE(token_f1("x", empty_gold) == 0.0);
  std::vector<std::string> none;
  REQUIRE_THROWS_AS(token_f1("x", none), PreconditionError);
  REQUIRE_THROWS_AS(exact_match("x", none), PreconditionError);
}

TEST_CASE("correctness specs") {
  REQUIRE(Correctness::parse("em").kind == Correctness::Kind::exact_match);
  auto f = Correctness::parse("f1:0.5");
  REQUIRE(f.kind == Correctness::Kind::f1_threshold);
  REQUIRE(f.threshold == 0.5);
  std::vector<std::string> g{"big red house"};
  REQUIRE(f.is_correct("red house", g));
  REQUIRE_FALSE(Correctness::em().is_correct("red house", g));
  for (const char* bad : {"f1:0", "f1:1.5", "f1:", "f1:x", "acc"})
    REQUIRE_THROWS_AS(Correctness::parse(bad), ConfigError);
}

TEST_CASE("evaluate counts only originally-correct examples") {
  auto a = example("a", "paris");
  auto b = example("b", "rome");
  auto c = example("c", "oslo");
  std::vector<AnsweredOriginal> originals{{a, said("Paris")}, {b, said("Rome")}, {c, said("no")}};
  std::vector<AnsweredPerturbed> perturbations{
      {perturbed(a, Mode::numeric, false), said("Paris")},
      {perturbed(b, Mode::numeric, false), said("x")},
      {perturbed(c, Mode::numeric, false), said("oslo")},  // original wrong: skipped
      {perturbed(a, Mode::synonym), said("paris")},
      {perturbed(b, Mode::synonym), said("rome")},
      {perturbed(a, Mode::random, true), said("x")},
  };
  PerMode gen_skips{0, 1, 2};
  auto r = evaluate("m", originals, perturbations, Correctness::em(), gen_skips);
  REQUIRE(r.model_id == "m");
  REQUIRE(r.counts.total == 3);
  REQUIRE(r.counts.evaluated_per_mode == PerMode{2, 2, 1});
  REQUIRE(r.counts.skipped_per_mode == PerMode{1, 1, 2});
  REQUIRE(r.original_em == Catch::Approx(2.0 / 3.0));
  REQUIRE(*r.numeric_accuracy == 0.5);
  REQUIRE(*r.synonym_accuracy == 1.0);
  REQUIRE(*r.random_accuracy == 0.0);
  REQUIRE(*r.decision_change_rate == 0.5);
  REQUIRE(*r.stability_margin == 0.5);
  REQUIRE(r.semantically_stable);
  REQUIRE(r.accuracy(Mode::random) == r.random_accuracy);

  auto dc = decision_change_rate(perturbations, originals);
  REQUIRE(dc.flagged == 2);
  REQUIRE(dc.changed == 1);
}

TEST_CASE("absent modes stay absent") {
  auto a = example("a", "paris");
  std::vector<AnsweredOriginal> originals{{a, said("paris")}};
  auto r = evaluate("m", originals, {});
  REQUIRE_FALSE(r.numeric_accuracy);
  REQUIRE_FALSE(r.decision_change_rate);
  REQUIRE_FALSE(r.stability_margin);
  REQUIRE_FALSE(r.semantically_stable);
}

TEST_CASE("evaluate rejects inconsistent inputs") {
  auto a = example("a", "paris");
  std::vector<AnsweredOriginal> none;
  REQUIRE_THROWS_AS(evaluate("m", none, {}), ValidationError);
  std::vector<AnsweredOriginal> dup{{a, said("p")}, {a, said("p")}};
  REQUIRE_THROWS_AS(evaluate("m", dup, {}), ValidationError);
  std::vector<AnsweredOriginal> one{{a, said("p")}};
  std::vector<AnsweredPerturbed> stray{{perturbed(example("z", "x"), Mode::synonym), said("")}};
  REQUIRE_THROWS_AS(evaluate("m", one, stray), ValidationError);
}

TEST_CASE("synonym accuracy below numeric accuracy is not stable") {
  EvalReport r;
  r.numeric_accuracy = 0.69;
  r.synonym_accuracy = 0.64;
  auto v = stability_verdict(r);
  REQUIRE_FALSE(v.semantically_stable);
  REQUIRE(*v.margin == Catch::Approx(-0.05));
  r.synonym_accuracy = 0.69;
  REQUIRE_FALSE(stability_verdict(r).semantically_stable);
  r.synonym_accuracy = 0.70;
  REQUIRE(stability_verdict(r).semantically_stable);
}
