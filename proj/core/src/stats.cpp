#include "ttk/stats.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ttk/error.hpp"
#include "ttk/numeric.hpp"

namespace ttk::stats {
namespace {

void check_binary(std::span<const double> scores, Labels labels, std::size_t& n_pos, std::size_t& n_neg) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  n_pos = n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
    } else if (labels[i] == 0) {
      ++n_neg;
    } else {
      throw ValidationError("label " + std::to_string(i) + " is not 0 or 1");
    }
    if (std::isnan(scores[i])) throw ValidationError("score " + std::to_string(i) + " is NaN");
  }
  if (n_pos == 0 || n_neg == 0) throw ValidationError("binary evaluation needs both classes present");
}

// Sorting first makes the sum independent of input order.
double sorted_mean(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> xs, double mu) {
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  std::sort(sq.begin(), sq.end());
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

double sum_of(const Eigen::VectorXd& v) { return pairwise_sum(std::span<const double>(v.data(), v.size())); }

}  // namespace

double auroc(std::span<const double> scores, Labels labels) {
  std::size_t n_pos = 0, n_neg = 0;
  check_binary(scores, labels, n_pos, n_neg);
  const auto ranks = midranks(scores);
  double rank_sum = 0.0;  // half-integers: exact in double for any realistic n
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

ThresholdAccuracy best_threshold_accuracy(std::span<const double> scores, Labels labels) {
  std::size_t n_pos = 0, n_neg = 0;
  check_binary(scores, labels, n_pos, n_neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  const double n = static_cast<double>(scores.size());
  // t = -inf: everything predicted positive.
  std::size_t best_correct = n_pos;
  double best_t = -std::numeric_limits<double>::infinity();
  std::size_t neg_below = 0, pos_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double v = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == v) {
      (labels[order[j]] == 1 ? pos_below : neg_below) += 1;
      ++j;
    }
    // Threshold between v and the next unique score (or +inf after the last).
    const std::size_t correct = neg_below + (n_pos - pos_below);
    if (correct > best_correct) {
      best_correct = correct;
      if (j == order.size()) {
        best_t = std::numeric_limits<double>::infinity();
      } else {
        const double next = scores[order[j]];
        double mid = v + (next - v) / 2.0;
        if (!(mid < next)) mid = v;  // adjacent doubles: v itself separates the same way
        best_t = mid;
      }
    }
    i = j;
  }
  return {static_cast<double>(best_correct) / n, best_t};
}

BinaryEvalResult evaluate_binary(std::span<const double> scores, Labels labels, std::size_t skipped) {
  BinaryEvalResult out;
  check_binary(scores, labels, out.n_pos, out.n_neg);
  const auto best = best_threshold_accuracy(scores, labels);
  out.accuracy = best.accuracy;
  out.threshold = best.threshold;
  out.auroc = auroc(scores, labels);
  out.skipped = skipped;
  return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  const auto n = x.size();
  if (n < 3) throw ValidationError("pearson needs at least 3 points");
  const double mx = mean(x), my = mean(y);
  std::vector<double> sxy(n), sxx(n), syy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy[i] = dx * dy;
    sxx[i] = dx * dx;
    syy[i] = dy * dy;
  }
  const double vx = pairwise_sum(sxx), vy = pairwise_sum(syy);
  if (!(vx > 0.0) || !(vy > 0.0)) throw UndefinedScoreError("pearson: zero variance");
  double r = pairwise_sum(sxy) / std::sqrt(vx * vy);
  r = std::clamp(r, -1.0, 1.0);
  Correlation out{r, 0.0, n};
  const double df = static_cast<double>(n - 2);
  if (std::abs(r) < 1.0) out.p = t_two_sided_p(r * std::sqrt(df / (1.0 - r * r)), df);
  return out;
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  const auto rx = midranks(x), ry = midranks(y);
  return pearson(rx, ry);
}

double fleiss_kappa(const std::vector<std::vector<int>>& counts, int raters_per_item) {
  if (raters_per_item < 2) throw ValidationError("fleiss_kappa needs at least 2 raters per item");
  if (counts.empty()) throw ValidationError("fleiss_kappa needs at least one item");
  const auto k = counts.front().size();
  if (k < 1) throw ValidationError("fleiss_kappa needs at least one category");
  const double n = raters_per_item;
  std::vector<long long> column(k, 0);
  std::vector<double> p_item;
  p_item.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != k) throw ValidationError("fleiss_kappa: row " + std::to_string(i) + " has a different width");
    long long total = 0, sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0) throw ValidationError("fleiss_kappa: negative count");
      total += row[j];
      sq += static_cast<long long>(row[j]) * row[j];
      column[j] += row[j];
    }
    if (total != raters_per_item) {
      throw ValidationError("fleiss_kappa: row " + std::to_string(i) + " sums to " + std::to_string(total) +
                            ", expected " + std::to_string(raters_per_item));
    }
    p_item.push_back((static_cast<double>(sq) - n) / (n * (n - 1.0)));
  }
  const long long grand = static_cast<long long>(counts.size()) * raters_per_item;
  for (auto c : column) {
    if (c == grand) throw UndefinedScoreError("fleiss_kappa: every rating falls in one category (P_e = 1)");
  }
  std::vector<double> pj2(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double pj = static_cast<double>(column[j]) / static_cast<double>(grand);
    pj2[j] = pj * pj;
  }
  const double p_bar = mean(p_item);
  const double p_e = pairwise_sum(pj2);
  return (p_bar - p_e) / (1.0 - p_e);
}

std::string_view to_string(TTestVariant v) { return v == TTestVariant::welch ? "welch" : "pooled"; }

TTestResult ttest_independent(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("ttest_independent needs at least 2 values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = sorted_mean(a), mb = sorted_mean(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  TTestResult out;
  double se2 = 0.0;
  if (variant == TTestVariant::pooled) {
    out.df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / out.df;
    se2 = sp2 * (1.0 / na + 1.0 / nb);
  } else {
    const double qa = va / na, qb = vb / nb;
    se2 = qa + qb;
    out.df = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) : na + nb - 2.0;
  }
  const double diff = ma - mb;
  if (!(se2 > 0.0)) {
    if (diff == 0.0) throw UndefinedScoreError("t-test: zero variance in both groups with equal means");
    out.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
    out.p = 0.0;
    return out;
  }
  out.t = diff / std::sqrt(se2);
  out.p = t_two_sided_p(out.t, out.df);
  return out;
}

TTestResult ttest_one_sample(std::span<const double> x, double mu0) {
  if (x.size() < 2) throw ValidationError("one-sample t-test needs at least 2 values");
  const double n = static_cast<double>(x.size());
  const double m = sorted_mean(x);
  const double v = sample_variance(x, m);
  if (!(v > 0.0)) throw UndefinedScoreError("t-test: zero variance");
  TTestResult out;
  out.df = n - 1.0;
  out.t = (m - mu0) / std::sqrt(v / n);
  out.p = t_two_sided_p(out.t, out.df);
  return out;
}

TTestResult ttest_paired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("paired t-test needs equal lengths");
  if (a.size() < 2) throw ValidationError("paired t-test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return ttest_one_sample(d, 0.0);
}

RegressionReport ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, bool with_intercept,
                     std::vector<std::string> predictor_names) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (y.size() != n) throw ValidationError("ols: X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
  if (k < 1) throw ValidationError("ols needs at least one predictor");
  if (predictor_names.empty()) {
    for (Eigen::Index j = 0; j < k; ++j) predictor_names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(predictor_names.size()) != k) throw ValidationError("ols: wrong number of predictor names");
  const Eigen::Index p = k + (with_intercept ? 1 : 0);
  if (n <= p) {
    throw ValidationError("ols needs more observations (" + std::to_string(n) + ") than parameters (" +
                          std::to_string(p) + ")");
  }

  RegressionReport out;
  if (with_intercept) out.names.push_back("intercept");
  out.names.insert(out.names.end(), predictor_names.begin(), predictor_names.end());

  Eigen::MatrixXd design(n, p);
  if (with_intercept) design.col(0).setOnes();
  design.rightCols(k) = x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index r = qr.rank(); r < p; ++r) {
      if (!dependent.empty()) dependent += ", ";
      dependent += out.names[static_cast<std::size_t>(perm[r])];
    }
    throw ValidationError("ols: design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                          std::to_string(p) + "); linearly dependent: " + dependent);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double rss = sum_of(resid.array().square().matrix());
  double tss = 0.0;
  if (with_intercept) {
    const double ybar = sum_of(y) / static_cast<double>(n);
    tss = sum_of((y.array() - ybar).square().matrix());
  } else {
    tss = sum_of(y.array().square().matrix());
  }
  if (!(tss > 0.0)) throw UndefinedScoreError("ols: response has zero total sum of squares");
  out.r_squared = std::clamp(1.0 - rss / tss, 0.0, 1.0);
  out.n = static_cast<std::size_t>(n);
  out.df_residual = static_cast<std::size_t>(n - p);
  const double sigma2 = rss / static_cast<double>(n - p);

  // (X^T X)^-1 = P R^-1 R^-T P^T
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation().indices();
  std::vector<double> diag(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) diag[static_cast<std::size_t>(perm[i])] = xtx_inv_perm(i, i);

  const double df = static_cast<double>(n - p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = beta[j];
    const double se = std::sqrt(sigma2 * diag[static_cast<std::size_t>(j)]);
    out.coefficients.push_back(b);
    out.std_errors.push_back(se);
    double t = 0.0, pv = 1.0;
    if (se > 0.0) {
      t = b / se;
      pv = t_two_sided_p(t, df);
    } else if (b != 0.0) {
      t = std::copysign(std::numeric_limits<double>::infinity(), b);
      pv = 0.0;
    }
    out.t_values.push_back(t);
    out.p_values.push_back(pv);
  }
  out.vif = k >= 2 ? vif(x) : std::vector<double>{1.0};
  return out;
}

std::vector<double> vif(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto k = x.cols();
  if (k < 2) throw ValidationError("vif needs at least 2 predictors");
  if (n < 2) throw ValidationError("vif needs at least 2 observations");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::MatrixXd design(n, k);
    design.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index o = 0; o < k; ++o) {
      if (o != j) design.col(c++) = x.col(o);
    }
    const Eigen::VectorXd target = x.col(j);
    const double mu = sum_of(target) / static_cast<double>(n);
    const double tss = sum_of((target.array() - mu).square().matrix());
    if (!(tss > 0.0)) {
      out.push_back(kInfiniteVif);  // constant column: collinear with the intercept
      continue;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Eigen::VectorXd beta = qr.solve(target);
    const Eigen::VectorXd resid = target - design * beta;
    const double rss = sum_of(resid.array().square().matrix());
    if (rss <= 1e-12 * tss) {
      out.push_back(kInfiniteVif);
    } else {
      out.push_back(tss / rss);  // 1 / (1 - R^2) with R^2 = 1 - rss/tss
    }
  }
  return out;
}

double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref) {
  if (hyp.empty() || ref.empty()) throw ValidationError("sentence_bleu needs non-empty hypothesis and reference");
  constexpr std::size_t kMaxOrder = 4;
  auto ngram_counts = [](std::span<const std::string> toks, std::size_t order) {
    std::unordered_map<std::string, int> counts;
    for (std::size_t i = 0; i + order <= toks.size(); ++i) {
      std::string key;
      for (std::size_t j = 0; j < order; ++j) {
        if (j) key.push_back('\x1f');
        key += toks[i + j];
      }
      ++counts[key];
    }
    return counts;
  };
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t order = 1; order <= kMaxOrder; ++order) {
    if (hyp.size() < order) break;
    const double candidates = static_cast<double>(hyp.size() - order + 1);
    const auto h = ngram_counts(hyp, order);
    const auto r = ngram_counts(ref, order);
    long long matches = 0;
    for (const auto& [gram, count] : h) {
      if (auto it = r.find(gram); it != r.end()) matches += std::min(count, it->second);
    }
    double precision;
    if (order == 1) {
      if (matches == 0) return 0.0;
      precision = static_cast<double>(matches) / candidates;
    } else {
      precision = (static_cast<double>(matches) + 1.0) / (candidates + 1.0);
    }
    log_sum += std::log(precision);
    ++orders;
  }
  const double hyp_len = static_cast<double>(hyp.size()), ref_len = static_cast<double>(ref.size());
  const double log_bp = hyp.size() < ref.size() ? 1.0 - ref_len / hyp_len : 0.0;
  return std::exp(log_bp + log_sum / orders);
}

std::string_view to_string(Choice c) { return c == Choice::A ? "A" : "B"; }

Choice parse_choice(std::string_view s) {
  if (s == "A") return Choice::A;
  if (s == "B") return Choice::B;
  throw ValidationError("choice must be \"A\" or \"B\", got \"" + std::string(s) + "\"");
}

MajorityVote majority_vote(std::span<const Choice> votes) {
  if (votes.empty()) throw ValidationError("majority_vote needs at least one vote");
  if (votes.size() % 2 == 0) {
    throw ValidationError("majority_vote needs an odd number of forced-choice votes, got " +
                          std::to_string(votes.size()));
  }
  const auto a = static_cast<int>(std::count(votes.begin(), votes.end(), Choice::A));
  const auto b = static_cast<int>(votes.size()) - a;
  return a > b ? MajorityVote{Choice::A, a} : MajorityVote{Choice::B, b};
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student_t_cdf needs df > 0");
  if (std::isnan(t)) throw ValidationError("student_t_cdf: t is NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(dist, t);
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("t_two_sided_p needs df > 0");
  if (std::isnan(t)) throw ValidationError("t_two_sided_p: t is NaN");
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

}  // namespace ttk::stats
