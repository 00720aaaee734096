#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tough/qa.hpp"
#include "tough/text.hpp"

namespace tough {

// 1 = token kept.
using Mask = std::vector<std::uint8_t>;

struct LimeConfig {
  std::size_t n_samples = 1000;
  double sigma = 0.25;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  StopwordSet stopwords = default_stopwords();
  // Rank tokens by |coefficient| instead of the signed value.
  bool absolute_importance = false;
  // Upper bound on concurrent model queries.
  std::size_t max_in_flight = 8;
};

struct Explanation {
  std::vector<std::string> tokens;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t keyword_index = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double ridge_lambda = 0.0;
  bool operator==(const Explanation&) const = default;

  const std::string& keyword() const { return tokens[keyword_index]; }
};

// First mask is all ones; each further mask hides k tokens, k uniform in
// [1, n_tokens-1], positions uniform without replacement.
std::vector<Mask> sample_masks(std::size_t n_tokens, std::size_t n_samples,
                               std::uint64_t seed);

// exp(-D^2 / sigma^2) with D the cosine distance between the mask and the
// all-ones vector, D = 1 - sqrt(kept / length).
double kernel_weight(std::span<const std::uint8_t> mask, double sigma);

struct RidgeFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double r_squared = 0.0;
  // ||A x - b|| / ||b|| of the solved normal equations.
  double relative_residual = 0.0;
  double lambda_used = 0.0;
};

// Minimises sum_i w_i (y_i - b - x_i^T beta)^2 + lambda ||beta||^2 with the
// intercept b unpenalised, via the normal equations. A singular system at
// lambda = 0 is retried once with lambda = 1e-8.
RidgeFit fit_weighted_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            const Eigen::VectorXd& weights, double lambda);

Eigen::MatrixXd masks_to_features(std::span<const Mask> masks);

std::size_t keyword_of(std::span<const std::string> tokens,
                       std::span<const double> coefficients, const StopwordSet& stopwords,
                       bool absolute_importance = false);

inline std::size_t keyword_of(const Explanation& e, const StopwordSet& stopwords,
                              bool absolute_importance = false) {
  return keyword_of(e.tokens, e.coefficients, stopwords, absolute_importance);
}

// Masked questions are sent with the unchanged context; the surrogate
// target is token-F1 between that answer and the full-question answer.
Explanation explain_question(const AnswerProvider& model, const QAExample& example,
                             const LimeConfig& config);

}  // namespace tough
