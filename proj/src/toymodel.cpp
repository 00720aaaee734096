#include "tough/toymodel.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "tough/errors.hpp"
#include "tough/metrics.hpp"
#include "tough/rng.hpp"

namespace tough {
namespace {

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data(),
                    [](double x, double y) { return std::bit_cast<std::uint64_t>(x) ==
                                                    std::bit_cast<std::uint64_t>(y); });
}

// Per-token lookup results for one piece of text.
struct TokenInfo {
  std::optional<std::size_t> rank;
  bool content = false;
};

std::vector<TokenInfo> token_info(std::span<const std::string> tokens, const EmbeddingTable& table,
                                  const StopwordSet& stopwords) {
  std::vector<TokenInfo> out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out[i].rank = table.find(tokens[i]);
    out[i].content = is_content_token(tokens[i], stopwords);
  }
  return out;
}

// Pools rows [lo, hi) of `info`; vectors come from the per-rank cache.
template <typename VectorOf>
PooledRep pool(std::span<const TokenInfo> info, std::size_t lo, std::size_t hi,
               std::size_t dim, VectorOf&& vector_of) {
  PooledRep rep;
  rep.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = lo; i < hi; ++i)
    if (info[i].rank && info[i].content) rep.members.push_back(*info[i].rank);
  if (rep.members.empty()) {
    for (std::size_t i = lo; i < hi; ++i)
      if (info[i].rank) rep.members.push_back(*info[i].rank);
  }
  if (rep.members.empty()) {
    rep.all_oov = true;
    return rep;
  }
  for (auto r : rep.members) rep.vector += vector_of(r);
  rep.vector /= static_cast<double>(rep.members.size());
  return rep;
}

class VectorCache {
 public:
  VectorCache(const EmbeddingTable& table, const std::map<std::string, Eigen::VectorXd>& overrides)
      : table_(table), overrides_(overrides) {}
  const Eigen::VectorXd& operator()(std::size_t rank) {
    auto it = cache_.find(rank);
    if (it == cache_.end()) it = cache_.emplace(rank, effective_vector(rank, table_, overrides_)).first;
    return it->second;
  }

 private:
  const EmbeddingTable& table_;
  const std::map<std::string, Eigen::VectorXd>& overrides_;
  std::map<std::size_t, Eigen::VectorXd> cache_;
};

struct PreparedContext {
  std::vector<Token> tokens;
  std::vector<std::string> texts;
  std::vector<TokenSpan> spans;
};

PreparedContext prepare_context(std::string_view context, const ToyModelConfig& config) {
  PreparedContext pc;
  pc.tokens = tokenize(context);
  if (pc.tokens.empty()) throw PreconditionError("toy model: empty context");
  if (pc.tokens.size() > config.max_context_tokens) pc.tokens.resize(config.max_context_tokens);
  for (const auto& t : pc.tokens) pc.texts.push_back(t.text);
  pc.spans = candidate_spans(pc.tokens.size(), config.max_span_len);
  return pc;
}

// Ties prefer the shorter span, then the leftmost.
bool preferred(double score, const TokenSpan& span, double best_score, const TokenSpan& best) {
  if (score != best_score) return score > best_score;
  if (span.length() != best.length()) return span.length() < best.length();
  return span.start < best.start;
}

std::string span_text(std::string_view context, const PreparedContext& pc, const TokenSpan& s) {
  auto b = pc.tokens[s.start].begin;
  auto e = pc.tokens[s.end - 1].end;
  return std::string(context.substr(b, e - b));
}

void write_hex(std::ostream& out, double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
  out.write(buf, ptr - buf);
}

double read_hex(std::string_view field, std::size_t line) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x,
                                   std::chars_format::hex);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("invalid hex float '" + std::string(field) + "'", line);
  return x;
}

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

constexpr const char* kSnapshotMagic = "tough-toymodel v1";

}  // namespace

ToyModelParams ToyModelParams::identity(std::size_t dimension, ToyModelConfig config) {
  ToyModelParams p;
  p.interaction = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dimension),
                                            static_cast<Eigen::Index>(dimension));
  p.config = std::move(config);
  return p;
}

bool ToyModelParams::operator==(const ToyModelParams& other) const {
  if (!(config == other.config) || !same_bits(interaction, other.interaction)) return false;
  if (embedding_overrides.size() != other.embedding_overrides.size()) return false;
  for (const auto& [w, v] : embedding_overrides) {
    auto it = other.embedding_overrides.find(w);
    if (it == other.embedding_overrides.end() || !same_bits(v, it->second)) return false;
  }
  return true;
}

std::vector<TokenSpan> candidate_spans(std::size_t n_tokens, std::size_t max_span_len) {
  if (n_tokens == 0) throw PreconditionError("candidate_spans: empty context");
  if (max_span_len == 0) throw PreconditionError("candidate_spans: max_span_len must be positive");
  std::vector<TokenSpan> spans;
  for (std::size_t s = 0; s < n_tokens; ++s)
    for (std::size_t len = 1; len <= max_span_len && s + len <= n_tokens; ++len)
      spans.push_back({s, s + len});
  return spans;
}

Eigen::VectorXd effective_vector(std::size_t rank, const EmbeddingTable& table,
                                 const std::map<std::string, Eigen::VectorXd>& overrides) {
  if (auto it = overrides.find(table.word(rank)); it != overrides.end()) return it->second;
  auto v = table.vector(rank);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

PooledRep pooled_rep(std::span<const std::string> tokens, const EmbeddingTable& table,
                     const std::map<std::string, Eigen::VectorXd>& overrides,
                     const StopwordSet& stopwords) {
  auto info = token_info(tokens, table, stopwords);
  VectorCache vectors(table, overrides);
  return pool(std::span<const TokenInfo>(info), 0, info.size(), table.dimension(), vectors);
}

ToyModel::ToyModel(ToyModelParams params, const EmbeddingTable& table, std::string model_id)
    : params_(std::move(params)), table_(table), model_id_(std::move(model_id)) {
  if (params_.dimension() != table_.dimension() ||
      params_.interaction.cols() != params_.interaction.rows())
    throw ConfigError("toy model dimension " + std::to_string(params_.dimension()) +
                      " does not match embedding dimension " +
                      std::to_string(table_.dimension()));
}

Prediction ToyModel::predict(std::string_view context, std::string_view question) const {
  if (trim(question).empty()) throw PreconditionError("toy model: empty question");
  auto pc = prepare_context(context, params_.config);
  auto q_texts = token_texts(question);

  VectorCache vectors(table_, params_.embedding_overrides);
  const auto dim = table_.dimension();
  auto q_info = token_info(q_texts, table_, params_.config.stopwords);
  auto q = pool(std::span<const TokenInfo>(q_info), 0, q_info.size(), dim, vectors);
  const Eigen::VectorXd u = params_.interaction.transpose() * q.vector;

  auto c_info = token_info(pc.texts, table_, params_.config.stopwords);
  double best_score = -std::numeric_limits<double>::infinity();
  TokenSpan best = pc.spans.front();
  for (const auto& s : pc.spans) {
    auto rep = pool(std::span<const TokenInfo>(c_info), s.start, s.end, dim, vectors);
    double score = u.dot(rep.vector);
    if (preferred(score, s, best_score, best)) {
      best_score = score;
      best = s;
    }
  }

  Prediction p;
  p.span = best;
  p.degenerate = q.all_oov;
  p.answer.answer_text = span_text(context, pc, best);
  auto b = pc.tokens[best.start].begin, e = pc.tokens[best.end - 1].end;
  p.answer.span = CharSpan{static_cast<long>(byte_to_char_offset(context, b)),
                           static_cast<long>(byte_to_char_offset(context, e))};
  p.answer.score = best_score;
  return p;
}

std::optional<LossGrads> loss_and_grads(const ToyModelParams& params,
                                        const EmbeddingTable& table,
                                        const QAExample& example, std::size_t grad_top_k) {
  auto pc = prepare_context(example.context, params.config);
  const auto golds = example.gold_texts();

  std::optional<std::size_t> gold;
  double gold_f1 = 0.0;
  for (std::size_t j = 0; j < pc.spans.size(); ++j) {
    double f1 = token_f1(span_text(example.context, pc, pc.spans[j]), golds);
    if (f1 <= 0.0) continue;
    if (!gold || preferred(f1, pc.spans[j], gold_f1, pc.spans[*gold])) {
      gold = j;
      gold_f1 = f1;
    }
  }
  if (!gold) return std::nullopt;

  const auto dim = table.dimension();
  VectorCache vectors(table, params.embedding_overrides);
  auto q_texts = token_texts(example.question);
  auto q_info = token_info(q_texts, table, params.config.stopwords);
  auto q = pool(std::span<const TokenInfo>(q_info), 0, q_info.size(), dim, vectors);
  auto c_info = token_info(pc.texts, table, params.config.stopwords);

  const auto n = pc.spans.size();
  std::vector<PooledRep> reps;
  reps.reserve(n);
  const Eigen::VectorXd u = params.interaction.transpose() * q.vector;
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    reps.push_back(pool(std::span<const TokenInfo>(c_info), pc.spans[j].start, pc.spans[j].end,
                        dim, vectors));
    z[static_cast<Eigen::Index>(j)] = u.dot(reps.back().vector);
  }
  const double zmax = z.maxCoeff();
  Eigen::VectorXd p = (z.array() - zmax).exp();
  const double partition = p.sum();
  p /= partition;

  LossGrads out;
  out.gold = pc.spans[*gold];
  out.loss = (zmax + std::log(partition)) - z[static_cast<Eigen::Index>(*gold)];

  // g_j = p_j - [j == gold]
  Eigen::VectorXd g = p;
  g[static_cast<Eigen::Index>(*gold)] -= 1.0;
  Eigen::VectorXd weighted_s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < n; ++j) weighted_s += g[static_cast<Eigen::Index>(j)] * reps[j].vector;
  out.grad_interaction = q.vector * weighted_s.transpose();

  if (grad_top_k == 0) return out;

  auto accumulate = [&](std::size_t rank, const Eigen::VectorXd& grad) {
    if (rank >= grad_top_k) return;
    auto [it, inserted] = out.grad_embeddings.try_emplace(table.word(rank), grad);
    if (!inserted) it->second += grad;
  };
  if (!q.all_oov) {
    const Eigen::VectorXd dq =
        params.interaction * weighted_s / static_cast<double>(q.members.size());
    for (auto r : q.members) accumulate(r, dq);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (reps[j].all_oov) continue;
    const double gj = g[static_cast<Eigen::Index>(j)];
    if (gj == 0.0) continue;
    const Eigen::VectorXd ds = gj * u / static_cast<double>(reps[j].members.size());
    for (auto r : reps[j].members) accumulate(r, ds);
  }
  return out;
}

TrainResult train(ToyModelParams params, const EmbeddingTable& table,
                  std::span<const QAExample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw PreconditionError("train: empty dataset");
  TrainResult result;
  result.params = std::move(params);
  if (config.epochs == 0) return result;

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto& p = result.params;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[uniform_below(rng, i)]);

    double loss_sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      auto lg = loss_and_grads(p, table, dataset[order[step]], config.grad_top_k);
      if (!lg) {
        ++skipped;
        continue;
      }
      if (!std::isfinite(lg->loss))
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch + 1) + ", step " + std::to_string(step + 1) +
                              " (example '" + dataset[order[step]].id + "')");
      loss_sum += lg->loss;
      ++used;
      p.interaction -= config.learning_rate_interaction * lg->grad_interaction;
      for (const auto& [word, grad] : lg->grad_embeddings) {
        auto rank = *table.find(word);
        Eigen::VectorXd updated =
            effective_vector(rank, table, p.embedding_overrides) -
            config.learning_rate_embeddings * grad;
        p.embedding_overrides[word] = std::move(updated);
      }
    }
    if (used == 0) throw ValidationError("train: no example has a gold span with positive F1");
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(used));
    if (epoch == 0) result.skipped_examples = skipped;
  }
  return result;
}

void save_params(std::ostream& out, const ToyModelParams& params) {
  const auto d = params.interaction.rows();
  out << kSnapshotMagic << '\n';
  out << "dimension " << d << '\n';
  out << "max_span_len " << params.config.max_span_len << '\n';
  out << "max_context_tokens " << params.config.max_context_tokens << '\n';
  out << "stopwords " << params.config.stopwords.size() << '\n';
  for (const auto& w : params.config.stopwords) out << w << '\n';
  out << "interaction\n";
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c) out << ' ';
      write_hex(out, params.interaction(r, c));
    }
    out << '\n';
  }
  out << "overrides " << params.embedding_overrides.size() << '\n';
  for (const auto& [w, v] : params.embedding_overrides) {
    out << w;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out << ' ';
      write_hex(out, v[i]);
    }
    out << '\n';
  }
  out << "end\n";
  if (!out) throw Error("save_params: write failed");
}

ToyModelParams load_params(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw FormatError("truncated toy model snapshot", line_no + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto keyed_count = [&](const std::string& key) -> std::size_t {
    auto f = split_spaces(next());
    std::size_t v = 0;
    if (f.size() != 2 || f[0] != key ||
        std::from_chars(f[1].data(), f[1].data() + f[1].size(), v).ec != std::errc())
      throw FormatError("expected '" + key + " <count>'", line_no);
    return v;
  };

  if (next() != kSnapshotMagic) throw FormatError("not a toy model snapshot (bad header)", line_no);
  ToyModelParams p;
  const auto d = keyed_count("dimension");
  if (d == 0) throw FormatError("dimension must be positive", line_no);
  p.config.max_span_len = keyed_count("max_span_len");
  p.config.max_context_tokens = keyed_count("max_context_tokens");
  p.config.stopwords.clear();
  for (std::size_t i = 0, n = keyed_count("stopwords"); i < n; ++i) p.config.stopwords.insert(next());
  if (next() != "interaction") throw FormatError("expected 'interaction'", line_no);
  const auto di = static_cast<Eigen::Index>(d);
  p.interaction.resize(di, di);
  for (Eigen::Index r = 0; r < di; ++r) {
    auto f = split_spaces(next());
    if (f.size() != d) throw FormatError("interaction row has wrong length", line_no);
    for (Eigen::Index c = 0; c < di; ++c)
      p.interaction(r, c) = read_hex(f[static_cast<std::size_t>(c)], line_no);
  }
  for (std::size_t i = 0, n = keyed_count("overrides"); i < n; ++i) {
    auto f = split_spaces(next());
    if (f.size() != d + 1) throw FormatError("override row has wrong length", line_no);
    Eigen::VectorXd v(di);
    for (Eigen::Index k = 0; k < di; ++k) {
      v[k] = read_hex(f[static_cast<std::size_t>(k) + 1], line_no);
      if (!std::isfinite(v[k])) throw FormatError("non-finite override value", line_no);
    }
    p.embedding_overrides.emplace(f[0], std::move(v));
  }
  if (next() != "end") throw FormatError("expected 'end'", line_no);
  return p;
}

}  // namespace tough
