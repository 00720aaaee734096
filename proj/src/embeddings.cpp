#include "tough/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <thread>

#include "tough/errors.hpp"
#include "tough/text.hpp"

namespace tough {
namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size())
    throw PreconditionError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0)
    throw UndefinedSimilarityError("cosine similarity is undefined for a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

struct Scored {
  double sim;
  std::size_t rank;
};

bool better(const Scored& a, const Scored& b) {
  return a.sim > b.sim || (a.sim == b.sim && a.rank < b.rank);
}

double parse_real(std::string_view field, std::size_t line) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("invalid real '" + std::string(field) + "'", line);
  if (!std::isfinite(v) || !std::isfinite(static_cast<float>(v)))
    throw FormatError("non-finite value '" + std::string(field) + "'", line);
  return v;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  return cosine_impl(a, b);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

EmbeddingTable EmbeddingTable::load(std::istream& in, const LoadOptions& options) {
  EmbeddingTable table;
  table.case_policy_ = options.case_policy;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (options.max_vocab && table.size() >= *options.max_vocab) break;

    std::string_view rest(line);
    auto sp = rest.find(' ');
    if (sp == std::string_view::npos || sp == 0)
      throw FormatError("expected 'word v1 ... vd'", line_no);
    std::string word(rest.substr(0, sp));
    rest.remove_prefix(sp + 1);

    values.clear();
    while (!rest.empty()) {
      auto next = rest.find(' ');
      auto field = rest.substr(0, next);
      // a single trailing space is tolerated
      if (field.empty() && next == std::string_view::npos) break;
      if (field.empty()) throw FormatError("empty field", line_no);
      values.push_back(parse_real(field, line_no));
      if (next == std::string_view::npos) break;
      rest.remove_prefix(next + 1);
    }
    table.append_row(std::move(word), values, line_no);
  }
  if (table.size() == 0 && table.dropped_duplicates_ == 0)
    throw FormatError("embedding file is empty");
  table.finalize();
  return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::filesystem::path& path,
                                         const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding file " + path.string());
  return load(in, options);
}

EmbeddingTable EmbeddingTable::from_rows(
    const std::vector<std::pair<std::string, std::vector<double>>>& rows,
    CasePolicy case_policy) {
  EmbeddingTable table;
  table.case_policy_ = case_policy;
  std::size_t line = 0;
  for (const auto& [word, vec] : rows) {
    ++line;
    for (double v : vec) {
      if (!std::isfinite(v)) throw FormatError("non-finite value", line);
    }
    table.append_row(word, vec, line);
  }
  if (table.size() == 0) throw FormatError("embedding table is empty");
  table.finalize();
  return table;
}

void EmbeddingTable::append_row(std::string word, std::span<const double> values,
                                std::size_t line) {
  if (values.empty()) throw FormatError("entry has no vector components", line);
  if (dimension_ == 0) {
    dimension_ = values.size();
  } else if (values.size() != dimension_) {
    throw FormatError("inconsistent dimension: expected " + std::to_string(dimension_) +
                          ", got " + std::to_string(values.size()),
                      line);
  }
  if (case_policy_ == CasePolicy::fold_lower) word = to_lower(word);
  if (index_.contains(word)) {
    ++dropped_duplicates_;
    return;
  }
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  for (double v : values) values_.push_back(static_cast<float>(v));
}

void EmbeddingTable::finalize() {
  inv_norms_.resize(words_.size());
  for (std::size_t r = 0; r < words_.size(); ++r) {
    double n = 0.0;
    for (float x : vector(r)) n += double(x) * double(x);
    inv_norms_[r] = n > 0.0 ? 1.0 / std::sqrt(n) : 0.0;
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  std::string key(word);
  if (case_policy_ == CasePolicy::fold_lower) key = to_lower(key);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  auto lower = to_lower(key);
  if (lower != key) {
    if (auto it = index_.find(lower); it != index_.end()) return it->second;
  }
  return std::nullopt;
}

bool EmbeddingTable::is_top_k(std::string_view word, std::size_t k) const {
  auto r = find(word);
  return r && *r < k;
}

double EmbeddingTable::similarity(std::size_t a, std::size_t b) const {
  if (inv_norms_[a] == 0.0 || inv_norms_[b] == 0.0)
    throw UndefinedSimilarityError("cosine similarity is undefined for a zero vector");
  auto va = vector(a), vb = vector(b);
  double dot = 0.0;
  for (std::size_t i = 0; i < dimension_; ++i) dot += double(va[i]) * double(vb[i]);
  return std::clamp(dot * inv_norms_[a] * inv_norms_[b], -1.0, 1.0);
}

std::vector<Neighbor> EmbeddingTable::nearest_neighbors(
    std::string_view query, std::size_t k, std::span<const std::string> exclusions,
    std::size_t jobs) const {
  auto q = find(query);
  if (!q) throw OovError(std::string(query));
  if (inv_norms_[*q] == 0.0)
    throw UndefinedSimilarityError("query '" + std::string(query) + "' has a zero vector");
  if (k == 0) return {};

  std::set<std::string, std::less<>> excluded;
  for (const auto& e : exclusions) excluded.insert(to_lower(e));
  const bool any_excluded = !excluded.empty();

  auto scan = [&](std::size_t lo, std::size_t hi) {
    // min-heap on "better": the worst kept candidate sits on top
    std::vector<Scored> heap;
    heap.reserve(k + 1);
    for (std::size_t r = lo; r < hi; ++r) {
      if (r == *q || inv_norms_[r] == 0.0) continue;
      if (any_excluded && excluded.contains(to_lower(words_[r]))) continue;
      Scored s{similarity(*q, r), r};
      if (heap.size() < k) {
        heap.push_back(s);
        std::push_heap(heap.begin(), heap.end(), better);
      } else if (better(s, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), better);
        heap.back() = s;
        std::push_heap(heap.begin(), heap.end(), better);
      }
    }
    return heap;
  };

  std::vector<Scored> merged;
  jobs = std::max<std::size_t>(1, std::min(jobs, size() / 4096 + 1));
  if (jobs == 1) {
    merged = scan(0, size());
  } else {
    std::vector<std::vector<Scored>> parts(jobs);
    std::vector<std::thread> workers;
    std::size_t chunk = (size() + jobs - 1) / jobs;
    for (std::size_t j = 0; j < jobs; ++j) {
      std::size_t lo = std::min(size(), j * chunk), hi = std::min(size(), lo + chunk);
      workers.emplace_back([&, j, lo, hi] { parts[j] = scan(lo, hi); });
    }
    for (auto& w : workers) w.join();
    for (auto& p : parts) merged.insert(merged.end(), p.begin(), p.end());
  }
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > k) merged.resize(k);

  std::vector<Neighbor> out;
  out.reserve(merged.size());
  for (const auto& s : merged) out.push_back({words_[s.rank], s.sim});
  return out;
}

}  // namespace tough
