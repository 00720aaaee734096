#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tough {

enum class CasePolicy { preserve, fold_lower };

struct LoadOptions {
  std::optional<std::size_t> max_vocab;
  CasePolicy case_policy = CasePolicy::preserve;
};

struct Neighbor {
  std::string word;
  double similarity = 0.0;
  bool operator==(const Neighbor&) const = default;
};

double cosine(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const float> a, std::span<const float> b);

// Word vectors in GloVe text format. Load order is kept as the frequency
// rank (distributed GloVe files are sorted by corpus frequency).
// Immutable after construction.
class EmbeddingTable {
 public:
  static EmbeddingTable load(std::istream& in, const LoadOptions& options = {});
  static EmbeddingTable load_file(const std::filesystem::path& path,
                                  const LoadOptions& options = {});
  // Builds a table from in-memory rows with the same validation as load().
  static EmbeddingTable from_rows(
      const std::vector<std::pair<std::string, std::vector<double>>>& rows,
      CasePolicy case_policy = CasePolicy::preserve);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }
  std::size_t dropped_duplicates() const { return dropped_duplicates_; }
  CasePolicy case_policy() const { return case_policy_; }

  const std::string& word(std::size_t rank) const { return words_[rank]; }
  std::span<const float> vector(std::size_t rank) const {
    return {values_.data() + rank * dimension_, dimension_};
  }

  // Exact lookup (after the case policy), then lowercase fallback.
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  // Absent for out-of-vocabulary words.
  std::optional<std::size_t> frequency_rank(std::string_view word) const {
    return find(word);
  }
  bool is_top_k(std::string_view word, std::size_t k) const;

  // Cosine similarity between two table rows.
  double similarity(std::size_t a, std::size_t b) const;

  // Exact top-k by cosine, descending, ties by ascending rank. Excludes the
  // query row and any word whose lowercase form is in the lowercased
  // exclusion list. Zero vectors never appear as neighbors.
  std::vector<Neighbor> nearest_neighbors(std::string_view query, std::size_t k,
                                          std::span<const std::string> exclusions = {},
                                          std::size_t jobs = 1) const;

 private:
  void append_row(std::string word, std::span<const double> values, std::size_t line);
  void finalize();

  std::size_t dimension_ = 0;
  CasePolicy case_policy_ = CasePolicy::preserve;
  std::vector<std::string> words_;
  std::vector<float> values_;
  std::vector<double> inv_norms_;  // 0 for zero vectors
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dropped_duplicates_ = 0;
};

}  // namespace tough
