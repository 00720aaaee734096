#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tough/embeddings.hpp"
#include "tough/qa.hpp"
#include "tough/text.hpp"

namespace tough {

struct ToyModelConfig {
  std::size_t max_span_len = 5;
  std::size_t max_context_tokens = 150;
  StopwordSet stopwords = default_stopwords();
  bool operator==(const ToyModelConfig&) const = default;
};

// Span scorer: score(span) = q^T M s, with q and s mean-pooled embeddings
// of the question and the span. Overrides hold fine-tuned vectors for
// table words and take precedence over the table.
struct ToyModelParams {
  Eigen::MatrixXd interaction;
  std::map<std::string, Eigen::VectorXd> embedding_overrides;
  ToyModelConfig config;

  static ToyModelParams identity(std::size_t dimension, ToyModelConfig config = {});
  std::size_t dimension() const { return static_cast<std::size_t>(interaction.rows()); }
  bool operator==(const ToyModelParams& other) const;
};

// Half-open token span [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - start; }
  bool operator==(const TokenSpan&) const = default;
};

// All spans with 1 <= length <= max_span_len, ordered by (start, length).
std::vector<TokenSpan> candidate_spans(std::size_t n_tokens, std::size_t max_span_len);

struct PooledRep {
  Eigen::VectorXd vector;
  // Table ranks of the pooled tokens, with repetition.
  std::vector<std::size_t> members;
  bool all_oov = false;
};

// Mean of in-vocabulary content tokens; if none, mean of all in-vocabulary
// tokens; zero vector (all_oov) if every token is out of vocabulary.
PooledRep pooled_rep(std::span<const std::string> tokens, const EmbeddingTable& table,
                     const std::map<std::string, Eigen::VectorXd>& overrides,
                     const StopwordSet& stopwords);

// Effective embedding of a table row: override if present, else the table.
Eigen::VectorXd effective_vector(std::size_t rank, const EmbeddingTable& table,
                                 const std::map<std::string, Eigen::VectorXd>& overrides);

struct Prediction {
  ModelAnswer answer;
  TokenSpan span;
  bool degenerate = false;  // question had no in-vocabulary token
};

class ToyModel : public AnswerProvider {
 public:
  ToyModel(ToyModelParams params, const EmbeddingTable& table, std::string model_id = "toy");

  Prediction predict(std::string_view context, std::string_view question) const;
  std::string model_id() const override { return model_id_; }
  const ToyModelParams& params() const { return params_; }

 protected:
  ModelAnswer do_answer(std::string_view context, std::string_view question) const override {
    return predict(context, question).answer;
  }

 private:
  ToyModelParams params_;
  const EmbeddingTable& table_;
  std::string model_id_;
};

struct LossGrads {
  double loss = 0.0;
  Eigen::MatrixXd grad_interaction;
  // Keyed by table word; only words with frequency rank < grad_top_k.
  std::map<std::string, Eigen::VectorXd> grad_embeddings;
  TokenSpan gold;
};

// Softmax cross-entropy of the gold span (max token-F1 against the golds;
// ties shorter, then leftmost). nullopt when no span has positive F1.
std::optional<LossGrads> loss_and_grads(const ToyModelParams& params,
                                        const EmbeddingTable& table,
                                        const QAExample& example, std::size_t grad_top_k);

struct TrainConfig {
  double learning_rate_interaction = 0.1;
  double learning_rate_embeddings = 0.01;
  std::size_t epochs = 5;
  std::size_t grad_top_k = 0;  // 0 disables embedding updates
  std::uint64_t seed = 0;
};

struct TrainResult {
  ToyModelParams params;
  std::vector<double> epoch_mean_loss;
  std::size_t skipped_examples = 0;  // per epoch
};

// Plain SGD, one example per step, order reshuffled every epoch.
TrainResult train(ToyModelParams params, const EmbeddingTable& table,
                  std::span<const QAExample> dataset, const TrainConfig& config);

// Versioned text snapshot with hex-float reals; load(save(p)) == p bitwise.
void save_params(std::ostream& out, const ToyModelParams& params);
ToyModelParams load_params(std::istream& in);

}  // namespace tough
