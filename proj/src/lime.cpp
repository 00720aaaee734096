#include "tough/lime.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tough/errors.hpp"
#include "tough/metrics.hpp"
#include "tough/parallel.hpp"
#include "tough/rng.hpp"

namespace tough {
namespace {

constexpr double kSingularJitter = 1e-8;
constexpr double kResidualTolerance = 1e-8;

std::string mask_string(const Mask& m) {
  std::string s;
  for (auto b : m) s.push_back(b ? '1' : '0');
  return s;
}

struct NormalSystem {
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;
};

// Column 0 of the augmented design is the intercept.
NormalSystem build_normal_system(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double lambda) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::MatrixXd xa(n, p + 1);
  xa.col(0).setOnes();
  xa.rightCols(p) = x;
  NormalSystem sys;
  sys.lhs = xa.transpose() * w.asDiagonal() * xa;
  sys.rhs = xa.transpose() * w.cwiseProduct(y);
  for (Eigen::Index j = 1; j <= p; ++j) sys.lhs(j, j) += lambda;
  return sys;
}

double relative_residual(const NormalSystem& sys, const Eigen::VectorXd& sol) {
  double denom = std::max(sys.rhs.norm(), sys.lhs.norm() * sol.norm());
  if (denom == 0.0) return 0.0;
  return (sys.lhs * sol - sys.rhs).norm() / denom;
}

}  // namespace

std::vector<Mask> sample_masks(std::size_t n_tokens, std::size_t n_samples,
                               std::uint64_t seed) {
  if (n_tokens < 2)
    throw NotExplainableError("question needs at least 2 tokens to be explained, got " +
                              std::to_string(n_tokens));
  if (n_samples == 0) throw PreconditionError("sample_masks: n_samples must be positive");

  std::vector<Mask> masks;
  masks.reserve(n_samples);
  masks.emplace_back(n_tokens, std::uint8_t{1});

  Rng rng(seed);
  std::vector<std::size_t> order(n_tokens);
  for (std::size_t s = 1; s < n_samples; ++s) {
    std::size_t hidden = 1 + uniform_below(rng, n_tokens - 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Mask m(n_tokens, 1);
    for (std::size_t i = 0; i < hidden; ++i) {
      std::size_t j = i + uniform_below(rng, n_tokens - i);
      std::swap(order[i], order[j]);
      m[order[i]] = 0;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

double kernel_weight(std::span<const std::uint8_t> mask, double sigma) {
  if (sigma <= 0.0) throw PreconditionError("kernel_weight: sigma must be positive");
  std::size_t ones = 0;
  for (auto b : mask) ones += b ? 1 : 0;
  if (ones == 0) throw PreconditionError("kernel_weight: mask keeps no token");
  double d = 1.0 - std::sqrt(double(ones) / double(mask.size()));
  return std::exp(-(d * d) / (sigma * sigma));
}

RidgeFit fit_weighted_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            const Eigen::VectorXd& weights, double lambda) {
  if (features.rows() != targets.size() || features.rows() != weights.size())
    throw PreconditionError("fit_weighted_ridge: inconsistent dimensions");
  if (features.rows() == 0) throw PreconditionError("fit_weighted_ridge: no samples");
  if (lambda < 0.0) throw PreconditionError("fit_weighted_ridge: lambda must be >= 0");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw PreconditionError("fit_weighted_ridge: weights must be positive");
  }

  double lam = lambda;
  NormalSystem sys = build_normal_system(features, targets, weights, lam);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.lhs);
  if (!qr.isInvertible() && lam == 0.0) {
    lam = kSingularJitter;
    sys = build_normal_system(features, targets, weights, lam);
    qr.compute(sys.lhs);
  }
  if (!qr.isInvertible())
    throw SolverError("fit_weighted_ridge: singular normal equations (lambda = " +
                      std::to_string(lam) + ")");

  Eigen::VectorXd sol = qr.solve(sys.rhs);
  double res = relative_residual(sys, sol);
  // iterative refinement for ill-conditioned systems
  for (int step = 0; step < 3 && res > kResidualTolerance; ++step) {
    sol += qr.solve(sys.rhs - sys.lhs * sol);
    res = relative_residual(sys, sol);
  }

  RidgeFit fit;
  fit.intercept = sol[0];
  fit.coefficients = sol.tail(features.cols());
  fit.relative_residual = res;
  fit.lambda_used = lam;

  Eigen::VectorXd fitted = (features * fit.coefficients).array() + fit.intercept;
  double wsum = weights.sum();
  double mean = weights.dot(targets) / wsum;
  double ss_res = weights.dot((targets - fitted).cwiseAbs2());
  double ss_tot = weights.dot((targets.array() - mean).matrix().cwiseAbs2());
  if (ss_tot > 1e-12 * wsum * std::max(1.0, mean * mean))
    fit.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return fit;
}

Eigen::MatrixXd masks_to_features(std::span<const Mask> masks) {
  if (masks.empty()) return {};
  Eigen::MatrixXd x(static_cast<Eigen::Index>(masks.size()),
                    static_cast<Eigen::Index>(masks.front().size()));
  for (std::size_t i = 0; i < masks.size(); ++i)
    for (std::size_t j = 0; j < masks[i].size(); ++j) x(i, j) = masks[i][j] ? 1.0 : 0.0;
  return x;
}

std::size_t keyword_of(std::span<const std::string> tokens,
                       std::span<const double> coefficients, const StopwordSet& stopwords,
                       bool absolute_importance) {
  auto score = [&](std::size_t i) {
    return absolute_importance ? std::abs(coefficients[i]) : coefficients[i];
  };
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!is_content_token(tokens[i], stopwords)) continue;
    if (!best || score(i) > score(*best)) best = i;
  }
  if (best) return *best;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < coefficients.size(); ++i)
    if (score(i) > score(arg)) arg = i;
  return arg;
}

Explanation explain_question(const AnswerProvider& model, const QAExample& example,
                             const LimeConfig& config) {
  auto tokens = tokenize(example.question);
  if (tokens.size() < 2)
    throw NotExplainableError("question '" + example.id + "' has " +
                              std::to_string(tokens.size()) + " token(s); need at least 2");

  auto masks = sample_masks(tokens.size(), config.n_samples, config.seed);

  // Identical masks produce identical questions; ask each distinct one once.
  std::vector<std::string> queries;
  std::vector<std::size_t> query_of_mask(masks.size());
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    auto q = render_kept(example.question, tokens, masks[i]);
    auto [it, inserted] = seen.emplace(q, queries.size());
    if (inserted) queries.push_back(std::move(q));
    query_of_mask[i] = it->second;
  }

  std::vector<ModelAnswer> answers(queries.size());
  std::vector<std::uint8_t> failed(queries.size(), 0);
  try {
    parallel_for(queries.size(), config.max_in_flight, [&](std::size_t i) {
      try {
        answers[i] = model.answer(example.context, queries[i]);
      } catch (const ProviderError&) {
        failed[i] = 1;
        throw;
      }
    });
  } catch (const ProviderError& e) {
    std::string failing;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (failed[query_of_mask[i]]) {
        failing = mask_string(masks[i]);
        break;
      }
    }
    throw ProviderError(std::string(e.what()) + " [example " + example.id + ", mask " +
                        failing + "]");
  }

  // masks[0] keeps every token, so queries[0] is the full question
  const std::vector<std::string> reference{answers[query_of_mask[0]].answer_text};
  const auto n = static_cast<Eigen::Index>(masks.size());
  Eigen::VectorXd targets(n), weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    targets[i] = token_f1(answers[query_of_mask[i]].answer_text, reference);
    weights[i] = kernel_weight(masks[i], config.sigma);
  }
  auto fit = fit_weighted_ridge(masks_to_features(masks), targets, weights, config.lambda);

  Explanation e;
  for (auto& t : tokens) e.tokens.push_back(std::move(t.text));
  e.coefficients.assign(fit.coefficients.data(),
                        fit.coefficients.data() + fit.coefficients.size());
  e.intercept = fit.intercept;
  e.r_squared = fit.r_squared;
  e.n_samples = masks.size();
  e.seed = config.seed;
  e.ridge_lambda = fit.lambda_used;
  e.keyword_index =
      keyword_of(e.tokens, e.coefficients, config.stopwords, config.absolute_importance);
  return e;
}

}  // namespace tough
