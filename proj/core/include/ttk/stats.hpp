#pragma once

#include <Eigen/Core>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Evaluation and inference primitives. p-values are two-sided throughout;
// reductions go through ttk::pairwise_sum.
namespace ttk::stats {

/// Labels are 0 (negative, low-translationese) or 1 (positive, high).
using Labels = std::span<const int>;

struct BinaryEvalResult {
  double accuracy = 0.0;
  double auroc = 0.0;
  double threshold = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  /// Samples whose score was undefined and left out of the metrics.
  std::size_t skipped = 0;
};

/// Mann-Whitney AUROC, ties counted 0.5. Needs both classes.
double auroc(std::span<const double> scores, Labels labels);

struct ThresholdAccuracy {
  double accuracy = 0.0;
  /// May be -inf (everything positive) or +inf (everything negative).
  double threshold = 0.0;
};

/// Best accuracy of the rule "score > t => positive" over t in
/// {-inf, midpoints of adjacent unique scores, +inf}; ties go to the smallest t.
ThresholdAccuracy best_threshold_accuracy(std::span<const double> scores, Labels labels);

BinaryEvalResult evaluate_binary(std::span<const double> scores, Labels labels, std::size_t skipped = 0);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Product-moment r with p from t = r sqrt((n-2)/(1-r^2)), df = n-2.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> x);

/// Pearson on midranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);

/// Fleiss' kappa for an items x categories count matrix where each row sums
/// to raters_per_item. UndefinedScoreError when expected agreement is 1.
double fleiss_kappa(const std::vector<std::vector<int>>& counts, int raters_per_item);

enum class TTestVariant { welch, pooled };

std::string_view to_string(TTestVariant v);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Independent two-sample t-test (Welch by default). Both groups need at
/// least two values. Zero variance in both groups with equal means is an
/// UndefinedScoreError; with different means t is infinite and p = 0.
TTestResult ttest_independent(std::span<const double> a, std::span<const double> b,
                              TTestVariant variant = TTestVariant::welch);

/// One-sample t-test of mean(x) against mu0. Zero variance is undefined.
TTestResult ttest_one_sample(std::span<const double> x, double mu0 = 0.0);

/// Paired t-test as a one-sample test on a - b.
TTestResult ttest_paired(std::span<const double> a, std::span<const double> b);

struct RegressionReport {
  /// "intercept" first when fitted, then the predictor names.
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t df_residual = 0;
  /// One entry per predictor (not the intercept).
  std::vector<double> vif;
};

/// OLS through column-pivoted Householder QR. Needs n > k + 1 (with
/// intercept) and a full-rank design; rank deficiency raises a
/// ValidationError naming the dependent columns. Predictor names default
/// to x1..xk.
RegressionReport ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool with_intercept = true,
                     std::vector<std::string> predictor_names = {});

/// VIF_j = 1 / (1 - R^2_j) from regressing column j on the remaining columns
/// plus an intercept. Perfectly collinear columns (residual sum of squares at
/// or below 1e-12 of the total) get +inf. Needs >= 2 columns.
std::vector<double> vif(const Eigen::MatrixXd& x);

inline constexpr double kInfiniteVif = std::numeric_limits<double>::infinity();

/// Sentence BLEU up to 4-grams: clipped precisions, orders without candidate
/// n-grams dropped, add-one smoothing for n >= 2, brevity penalty
/// exp(1 - |ref|/|hyp|) when |hyp| < |ref|, uniform geometric mean.
double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref);

enum class Choice { A, B };

std::string_view to_string(Choice c);
Choice parse_choice(std::string_view s);
inline Choice opposite(Choice c) { return c == Choice::A ? Choice::B : Choice::A; }

struct MajorityVote {
  Choice choice = Choice::A;
  int agreement_count = 0;
};

/// Forced-choice majority; an even number of votes is a protocol error.
MajorityVote majority_vote(std::span<const Choice> votes);

/// Student-t CDF (regularised incomplete beta). df > 0.
double student_t_cdf(double t, double df);

/// 2 * P(T > |t|).
double t_two_sided_p(double t, double df);

}  // namespace ttk::stats
