#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tough/embeddings.hpp"
#include "tough/qa.hpp"
#include "tough/text.hpp"

namespace tough {

enum class Mode { synonym, numeric, random };

inline constexpr Mode kAllModes[] = {Mode::numeric, Mode::synonym, Mode::random};

std::string_view to_string(Mode mode);
// Throws ValidationError for anything but synonym|numeric|random.
Mode parse_mode(std::string_view s);

enum class RandomPolicy { literal, sampled };

struct Candidate {
  std::string word;
  std::optional<double> context_score;
  bool operator==(const Candidate&) const = default;
};

struct PerturbedExample {
  QAExample base;
  Mode mode = Mode::numeric;
  std::size_t keyword_index = 0;
  std::string keyword;
  std::string replacement;
  std::string perturbed_question;
  std::vector<Candidate> candidates;
  // Set by human review; absent until annotated.
  std::optional<bool> semantic_ok;
  // Synonym candidates were ranked by lexicon order (no context scores).
  bool lexicon_order_fallback = false;
  bool operator==(const PerturbedExample&) const = default;
};

struct SkipRecord {
  std::string id;
  Mode mode = Mode::numeric;
  std::string reason;
  bool operator==(const SkipRecord&) const = default;
};

using Generated = std::variant<PerturbedExample, SkipRecord>;

// headword (lowercase) -> ordered synonym candidates.
class SynonymLexicon {
 public:
  // TSV: headword<TAB>cand1,cand2,...
  static SynonymLexicon load(std::istream& in);
  void add(std::string_view headword, std::vector<std::string> candidates);
  const std::vector<std::string>* find(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

// Replaces one token in place, keeping all other bytes. The replacement is
// capitalised when the original token was capitalised and sentence-initial.
std::string apply_swap(std::string_view question, std::size_t keyword_index,
                       std::string_view replacement);

// Number of neighbors kept in PerturbedExample::candidates.
inline constexpr std::size_t kNumericCandidates = 10;

Generated gen_numeric(const QAExample& example, std::size_t keyword_index,
                      const EmbeddingTable& table);

Generated gen_synonym(const QAExample& example, std::size_t keyword_index,
                      const SynonymLexicon& lexicon, const EmbeddingTable& table,
                      const StopwordSet& stopwords = default_stopwords());

Generated gen_random(const QAExample& example, std::size_t keyword_index,
                     RandomPolicy policy, const EmbeddingTable* table, std::uint64_t seed);

// Review CSV: id,mode,question,keyword_index,keyword,candidate_1,candidate_2,
// candidate_3,chosen,semantic_ok
std::size_t export_review(std::span<const PerturbedExample> perturbed, std::ostream& sink);

// Rows are matched to originals by (id, mode). An edited `chosen` column
// re-runs apply_swap; semantic_ok is "", "yes" or "no".
std::vector<PerturbedExample> import_review(std::istream& source,
                                            std::span<const PerturbedExample> originals);

}  // namespace tough
