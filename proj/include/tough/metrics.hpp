#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tough/perturb.hpp"
#include "tough/qa.hpp"

namespace tough {

// SQuAD v1.1 normalisation: lowercase, strip ASCII punctuation, drop the
// articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

int exact_match(std::string_view prediction, std::span<const std::string> golds);

// Max over golds of bag-of-tokens F1 after normalisation. Both sides empty
// scores 1, exactly one side empty scores 0.
double token_f1(std::string_view prediction, std::span<const std::string> golds);

struct Correctness {
  enum class Kind { exact_match, f1_threshold };
  Kind kind = Kind::exact_match;
  double threshold = 1.0;

  static Correctness em() { return {}; }
  static Correctness f1_at_least(double t) { return {Kind::f1_threshold, t}; }
  // "em" or "f1:<t>"
  static Correctness parse(std::string_view text);
  std::string describe() const;

  bool is_correct(std::string_view prediction, std::span<const std::string> golds) const;
};

// Indexed by mode in kAllModes order: numeric, synonym, random.
using PerMode = std::array<std::size_t, 3>;
std::size_t mode_slot(Mode mode);

struct EvalCounts {
  std::size_t total = 0;
  PerMode evaluated_per_mode{};
  PerMode skipped_per_mode{};
  bool operator==(const EvalCounts&) const = default;
};

struct EvalReport {
  std::string model_id;
  EvalCounts counts;
  double original_em = 0.0;
  double original_f1 = 0.0;
  std::optional<double> numeric_accuracy;
  std::optional<double> synonym_accuracy;
  std::optional<double> random_accuracy;
  std::optional<double> decision_change_rate;
  std::optional<double> stability_margin;
  bool semantically_stable = false;
  bool operator==(const EvalReport&) const = default;

  std::optional<double> accuracy(Mode mode) const;
};

using AnsweredOriginal = std::pair<QAExample, ModelAnswer>;
using AnsweredPerturbed = std::pair<PerturbedExample, ModelAnswer>;

struct DecisionChange {
  std::optional<double> rate;
  std::size_t flagged = 0;  // denominator
  std::size_t changed = 0;
};

// Over numeric perturbations flagged semantic_ok = false whose original
// was answered correctly: fraction now answered incorrectly.
DecisionChange decision_change_rate(std::span<const AnsweredPerturbed> perturbed,
                                    std::span<const AnsweredOriginal> originals,
                                    const Correctness& correctness = {});

// generation_skips: per-mode count of generator skip records, added to
// skipped_per_mode so evaluated + skipped equals the mode's inputs.
EvalReport evaluate(std::string model_id, std::span<const AnsweredOriginal> originals,
                    std::span<const AnsweredPerturbed> perturbed,
                    const Correctness& correctness = {},
                    const PerMode& generation_skips = {});

struct StabilityVerdict {
  std::optional<double> margin;
  bool semantically_stable = false;
};

StabilityVerdict stability_verdict(const EvalReport& report);

}  // namespace tough
