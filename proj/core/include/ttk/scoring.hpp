#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttk/backend.hpp"

// Sample-level scoring functions: the T-index likelihood ratio and the
// unsupervised logit/embedding baselines.
namespace ttk::scoring {

enum class Method { tindex, loglik, entropy, fdg, md, rmd, tv };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);
/// All methods in declaration order.
std::span<const Method> all_methods();
/// tindex uses two scoring models, everything else one.
constexpr bool is_pairwise(Method m) { return m == Method::tindex; }

enum class Normalization { per_token, sum };

std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view s);

struct ScoreRecord {
  std::string sample_id;
  Method method = Method::tindex;
  std::vector<std::string> model_ids;
  double value = 0.0;
  Normalization normalization = Normalization::per_token;

  bool operator==(const ScoreRecord&) const = default;
};

/// Throws ValidationError if value is not finite or the model count does not
/// match the method.
void validate(const ScoreRecord& r);
std::string serialize_score_record(const ScoreRecord& r);
ScoreRecord parse_score_record(std::string_view line);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);
std::string serialize_scores(std::span<const ScoreRecord> records);
void write_scores(std::span<const ScoreRecord> records, const std::filesystem::path& path);

/// log P_high(y|x) - log P_low(y|x). per_token compares per-token means,
/// sum compares totals. Positive means more translationese. Both records
/// must describe the same sample with the same tokenisation.
double tindex(const backend::TokenScores& low_model, const backend::TokenScores& high_model,
              Normalization normalization = Normalization::per_token);

/// Mean per-token log-probability.
double log_likelihood(const backend::TokenScores& ts);

/// Mean per-token entropy (nats). CapabilityError without entropies.
double entropy_score(const backend::TokenScores& ts);

/// Analytic Fast-DetectGPT sampling discrepancy with the scoring model as
/// its own sampling model:
///   (sum_t log p_t - sum_t E[log p]) / sqrt(sum_t Var[log p]),
/// where E[log p] = -H_t and Var[log p] = M2_t - H_t^2.
/// UndefinedScoreError when the variance sum is zero.
double fast_detect_gpt(const backend::TokenScores& ts);

/// Gaussian fitted to embedding vectors, with covariance shrinkage
/// eps = max(1e-3 * trace(cov) / dim, 1e-8) added to the diagonal.
class GaussianFit {
 public:
  GaussianFit(Eigen::VectorXd mean, Eigen::MatrixXd raw_covariance, std::size_t n_fit);

  /// A fit whose covariance is already final (for example loaded from
  /// elsewhere): no shrinkage is added. Throws unless it is positive definite.
  static GaussianFit with_covariance(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::size_t n_fit);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t n_fit() const { return n_fit_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Sample covariance (n-1 normalisation) before shrinkage.
  const Eigen::MatrixXd& raw_covariance() const { return raw_cov_; }
  /// Covariance after shrinkage; symmetric positive definite.
  const Eigen::MatrixXd& covariance() const { return cov_; }
  double shrinkage() const { return eps_; }
  const Eigen::LDLT<Eigen::MatrixXd>& factorization() const { return ldlt_; }

 private:
  GaussianFit(Eigen::VectorXd mean, Eigen::MatrixXd raw_covariance, std::size_t n_fit, double eps);

  Eigen::VectorXd mean_;
  Eigen::MatrixXd raw_cov_;
  Eigen::MatrixXd cov_;
  double eps_ = 0.0;
  std::size_t n_fit_ = 0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// Needs >= 2 vectors of a common dimension.
GaussianFit fit_gaussian(const std::vector<Eigen::VectorXd>& embeddings);

/// Squared Mahalanobis distance (z - mu)^T Sigma^-1 (z - mu) via the
/// pivoted LDL^T factorization.
double mahalanobis(const GaussianFit& fit, const Eigen::VectorXd& z);

/// mahalanobis(fit_in, z) - mahalanobis(fit_bg, z).
double relative_mahalanobis(const GaussianFit& fit_in, const GaussianFit& fit_bg, const Eigen::VectorXd& z);

/// Population variance of ||e_{l+1} - e_l|| over adjacent layers after each
/// row is scaled to unit norm. Needs at least two rows; zero-norm rows are an
/// error.
double trajectory_volatility(const backend::LayerEmbeddings& layers);

/// Last row of the layer embeddings, promoted to double.
Eigen::VectorXd last_hidden_state(const backend::LayerEmbeddings& layers);

inline double delta_tindex(double a, double b) { return a < b ? b - a : a - b; }

}  // namespace ttk::scoring
