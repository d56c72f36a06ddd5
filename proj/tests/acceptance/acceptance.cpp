// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"
#include "ttk/backend.hpp"
#include "ttk/cli/app.hpp"
#include "ttk/cli/commands.hpp"
#include "ttk/corpus.hpp"
#include "ttk/fixture.hpp"
#include "ttk/random.hpp"
#include "ttk/scoring.hpp"
#include "ttk/shifts.hpp"
#include "ttk/stats.hpp"
#include "ttk/text.hpp"

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-9;
constexpr double kOracleBudgetSeconds = 5.0;
constexpr int kOracleInstances = 200;
constexpr double kKappaTol = 1e-12;
constexpr double kFdgTol = 1e-3;
constexpr double kBleuTol = 1e-6;
constexpr double kOlsTol = 1e-12;
constexpr double kShiftInvarianceTol = 1e-12;
constexpr double kSumConsistencyRelTol = 1e-9;
constexpr int kTindexCases = 1000;
constexpr double kFixtureMinAuroc = 0.95;
constexpr double kFixtureMinAccuracy = 0.90;
constexpr double kNullAurocLow = 0.40;
constexpr double kNullAurocHigh = 0.60;
constexpr double kFixtureBudgetSeconds = 10.0;
constexpr double kBetaTol = 1e-9;
constexpr double kR2Slack = 1e-12;
constexpr double kVifTol = 1e-6;
constexpr double kNoisySigma = 0.05;
constexpr double kNoisyMinR2 = 0.9;
constexpr double kPValueTol = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ttk::Xorshift64Star rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < kOracleInstances; ++rep) {
    // classification metrics, with rounding to force ties
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.normal() * 4) / 4;
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[n - 1] = 1;
    worst = std::max(worst, std::abs(ttk::stats::auroc(s, y) - ttk::oracle::auroc(s, y)));
    worst = std::max(worst, std::abs(ttk::stats::best_threshold_accuracy(s, y).accuracy - ttk::oracle::best_accuracy(s, y)));

    // regression: 1..4 predictors, n up to 50
    const int k = 1 + static_cast<int>(rng.below(4));
    const int m = k + 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(48 - k)));
    Eigen::MatrixXd x(m, k);
    Eigen::VectorXd yy(m);
    std::vector<std::vector<double>> xr(m, std::vector<double>(k));
    std::vector<double> yr(m);
    for (int i = 0; i < m; ++i) {
      double lin = 0.3;
      for (int j = 0; j < k; ++j) {
        xr[i][j] = x(i, j) = rng.normal() + (j > 0 ? 0.4 * x(i, j - 1) : 0.0);
        lin += (j + 1) * 0.5 * x(i, j);
      }
      yr[i] = yy(i) = lin + rng.normal();
    }
    const auto fit = ttk::stats::ols(x, yy);
    const auto ref = ttk::oracle::ols(xr, yr);
    for (int j = 0; j <= k; ++j) worst = std::max(worst, std::abs(fit.coefficients[j] - ref.beta[j]));
    worst = std::max(worst, std::abs(fit.r_squared - ref.r_squared));

    // VIF needs at least two predictors
    const int kv = 2 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd xv(m, kv);
    std::vector<std::vector<double>> xvr(m, std::vector<double>(kv));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < kv; ++j) xvr[i][j] = xv(i, j) = rng.normal() + (j > 0 ? 0.5 * xv(i, 0) : 0.0);
    const auto v = ttk::stats::vif(xv), vr = ttk::oracle::vif(xvr);
    for (int j = 0; j < kv; ++j) worst = std::max(worst, std::abs(v[j] - vr[j]) / std::max(1.0, std::abs(vr[j])));
  }
  const double secs = seconds_since(t0);
  o.require(worst <= kOracleTol, "max deviation " + fmt(worst));
  o.require(secs < kOracleBudgetSeconds, "took " + fmt(secs) + " s");
  o.detail = "max deviation " + fmt(worst) + " over " + std::to_string(kOracleInstances) + " instances in " +
             fmt(secs) + " s" + (o.pass ? "" : " (" + o.detail + ")");
  return o;
}

Outcome hand_values() {
  Outcome o;
  const double kappa = ttk::stats::fleiss_kappa({{3, 0}, {2, 1}}, 3);
  o.require(std::abs(kappa - (-0.2)) <= kKappaTol, "kappa " + fmt(kappa));

  const double p = 0.8, q = 0.2;
  const double h = -(p * std::log(p) + q * std::log(q));
  const double m2 = p * std::log(p) * std::log(p) + q * std::log(q) * std::log(q);
  ttk::backend::TokenScores ts{"x", "m", {std::log(p)}, std::vector<double>{h}, std::vector<double>{m2}, {}};
  const double fdg = ttk::scoring::fast_detect_gpt(ts);
  o.require(std::abs(fdg - 0.5002) <= kFdgTol, "fdg " + fmt(fdg));

  const std::vector<std::string> hyp{"a", "b", "c"}, ref{"a", "b", "d"};
  const double bleu = ttk::stats::sentence_bleu(hyp, ref);
  o.require(std::abs(bleu - std::cbrt(2.0 / 9.0)) <= kBleuTol, "bleu " + fmt(bleu));

  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 2, 2, 3;
  const auto fit = ttk::stats::ols(x, y);
  o.require(std::abs(fit.coefficients[0] - 0.5) <= kOlsTol && std::abs(fit.coefficients[1] - 0.6) <= kOlsTol &&
                std::abs(fit.r_squared - 0.9) <= kOlsTol,
            "ols (" + fmt(fit.coefficients[0]) + ", " + fmt(fit.coefficients[1]) + ", " + fmt(fit.r_squared) + ")");

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  cov.diagonal() << 2, 1;
  const auto g = ttk::scoring::GaussianFit::with_covariance(Eigen::Vector2d::Zero(), cov, 2);
  const double md = ttk::scoring::mahalanobis(g, Eigen::Vector2d(2, 1));
  o.require(md == 3.0, "mahalanobis " + fmt(md));
  if (o.pass) o.detail = "kappa, fdg, bleu, ols, mahalanobis all within tolerance";
  return o;
}

Outcome tindex_invariants() {
  Outcome o;
  ttk::Xorshift64Star rng(77);
  double worst_shift = 0.0, worst_sum = 0.0;
  for (int rep = 0; rep < kTindexCases; ++rep) {
    const std::size_t n = 1 + rng.below(80);
    ttk::backend::TokenScores lo{"s", "lo", {}, {}, {}, {}}, hi{"s", "hi", {}, {}, {}, {}};
    auto lo2 = lo, hi2 = hi;
    for (std::size_t i = 0; i < n; ++i) {
      lo.token_logprobs.push_back(-6 * rng.uniform());
      hi.token_logprobs.push_back(-6 * rng.uniform());
      const double c = -4 * rng.uniform();
      lo2.token_logprobs.push_back(lo.token_logprobs.back() + c);
      hi2.token_logprobs.push_back(hi.token_logprobs.back() + c);
    }
    const double t = ttk::scoring::tindex(lo, hi);
    worst_shift = std::max(worst_shift, std::abs(ttk::scoring::tindex(lo2, hi2) - t));
    const double s = ttk::scoring::tindex(lo, hi, ttk::scoring::Normalization::sum);
    worst_sum = std::max(worst_sum, std::abs(s - static_cast<double>(n) * t) / std::max(std::abs(s), 1e-300));
    if (ttk::scoring::tindex(lo, lo) != 0.0) o.require(false, "identical dumps give non-zero");
  }
  o.require(worst_shift <= kShiftInvarianceTol, "shift deviation " + fmt(worst_shift));
  o.require(worst_sum <= kSumConsistencyRelTol, "sum/per_token deviation " + fmt(worst_sum));
  const std::string d = "shift " + fmt(worst_shift) + ", sum/per_token rel " + fmt(worst_sum) + " over " +
                        std::to_string(kTindexCases) + " cases";
  o.detail = o.pass ? d : d + " (" + o.detail + ")";
  return o;
}

ttk::cli::ordered_json tindex_row(const ttk::testing::TempDir& dir, const std::string& tag, double gap) {
  ttk::fixture::FixtureSpec spec;
  spec.n_samples = 200;
  spec.gap = gap;
  const auto f = ttk::fixture::make_fixture(spec);
  ttk::backend::write_dump(f.low_model, dir / (tag + "-low.jsonl"));
  ttk::backend::write_dump(f.high_model, dir / (tag + "-high.jsonl"));
  ttk::text::write_file(dir / (tag + "-labels.jsonl"), ttk::labels::serialize_labels(f.labels));
  ttk::cli::BinaryEvalOptions opt;
  opt.dump_low = {dir / (tag + "-low.jsonl")};
  opt.dump_high = {dir / (tag + "-high.jsonl")};
  opt.labels = dir / (tag + "-labels.jsonl");
  opt.methods = {"tindex"};
  const auto report = ttk::cli::cmd_eval_binary(opt);
  for (const auto& row : report.payload["rows"]) {
    if (row["method"] == "tindex") return row;
  }
  throw std::runtime_error("no tindex row");
}

Outcome fixture_end_to_end() {
  Outcome o;
  ttk::testing::TempDir dir("acceptance-fixture");
  const auto t0 = std::chrono::steady_clock::now();
  const auto planted = tindex_row(dir, "gap1", 1.0);
  const auto null = tindex_row(dir, "gap0", 0.0);
  const double secs = seconds_since(t0);
  const double auroc = ttk::cli::to_double(planted["auroc"]);
  const double acc = ttk::cli::to_double(planted["accuracy"]);
  const double null_auroc = ttk::cli::to_double(null["auroc"]);
  o.require(auroc >= kFixtureMinAuroc, "auroc too low");
  o.require(acc >= kFixtureMinAccuracy, "accuracy too low");
  o.require(null_auroc >= kNullAurocLow && null_auroc <= kNullAurocHigh, "gap-0 auroc out of band");
  o.require(secs < kFixtureBudgetSeconds, "too slow");
  const std::string d = "gap 1: auroc " + fmt(auroc) + " accuracy " + fmt(acc) + "; gap 0: auroc " +
                        fmt(null_auroc) + "; " + fmt(secs) + " s";
  o.detail = o.pass ? d : d + " (" + o.detail + ")";
  return o;
}

Outcome shift_decomposition() {
  Outcome o;
  const auto exact = ttk::shifts::shift_regression(ttk::shifts::compute_all_shifts(ttk::testing::additive_grid(0.0, 5)));
  double beta_dev = 0.0, vif_dev = 0.0;
  for (int j = 1; j <= 3; ++j) beta_dev = std::max(beta_dev, std::abs(exact.coefficients[j] - 1.0));
  for (double v : exact.vif) vif_dev = std::max(vif_dev, std::abs(v - 1.0));
  o.require(beta_dev <= kBetaTol, "beta");
  o.require(exact.r_squared >= 1.0 - kR2Slack, "r2");
  o.require(vif_dev <= kVifTol, "vif");
  const auto noisy =
      ttk::shifts::shift_regression(ttk::shifts::compute_all_shifts(ttk::testing::additive_grid(kNoisySigma, 6)));
  o.require(noisy.r_squared >= kNoisyMinR2, "noisy r2");
  const std::string d = "exact: max |beta-1| " + fmt(beta_dev) + ", 1-R2 " + fmt(1.0 - exact.r_squared) +
                        ", max |vif-1| " + fmt(vif_dev) + "; noisy R2 " + fmt(noisy.r_squared) + " (n=" +
                        std::to_string(exact.n) + ")";
  o.detail = o.pass ? d : d + " (" + o.detail + ")";
  return o;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream os, es;
  const int code = ttk::cli::run(args, os, es);
  if (out) *out = os.str();
  return code;
}

Outcome determinism() {
  Outcome o;
  ttk::testing::TempDir dir("acceptance-determinism");
  ttk::text::write_file(dir / "ds.jsonl", ttk::testing::dataset_jsonl(2, 2, 10));
  ttk::text::write_file(dir / "grid.csv", ttk::shifts::to_csv(ttk::testing::additive_grid(0.02, 8)));
  ttk::text::write_file(dir / "low.txt", "他们今天早上一起去了学校上课。\n我们在家里看了电影。\n这是一个句子，对吧？\n");
  ttk::text::write_file(dir / "high.txt", "他去了。好。\n我来。好的。\n这是。那是。\n");

  // Every command is run twice into separate outputs; the bytes must match.
  const std::vector<std::vector<std::string>> commands{
      {"fixture", "--n", "80", "--n-train", "20", "--out", "{out}"},
      {"dataset", "split", "--dataset", dir / "ds.jsonl", "--train-n", "5", "--valid-n", "2", "--test-n", "3",
       "--seed", "11", "--out", "{out}"},
      {"dataset", "select", "--dataset", dir / "ds.jsonl", "--strategy", "mixed_domain", "--k", "6", "--seed", "3",
       "--out", "{out}"},
      {"score", "--method", "tindex", "--dump-low", dir / "fx/low.jsonl", "--dump-high", dir / "fx/high.jsonl",
       "--out", "{out}"},
      {"eval-binary", "--dump-low", dir / "fx/low.jsonl", "--dump-high", dir / "fx/high.jsonl", "--labels",
       dir / "fx/labels.jsonl", "--out", "{out}"},
      {"corpus-stats", "--low-texts", dir / "low.txt", "--high-texts", dir / "high.txt", "--out", "{out}"},
      {"shifts", "analyze", "--grid", dir / "grid.csv", "--out", "{out}"},
      {"report", "--report", dir / "shifts.json", "--format", "csv", "--out", "{out}"},
      {"report", "--report", dir / "shifts.json", "--format", "svg", "--out", "{out}"},
  };
  if (run_cli({"fixture", "--n", "80", "--n-train", "20", "--out", dir / "fx"}) != 0) o.require(false, "fixture");
  if (run_cli({"shifts", "analyze", "--grid", dir / "grid.csv", "--out", dir / "shifts.json"}) != 0)
    o.require(false, "shifts");

  auto snapshot = [](const std::filesystem::path& p) {
    std::string all;
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) all += f.filename().string() + "\n" + ttk::text::read_file(f);
    } else {
      all = ttk::text::read_file(p);
    }
    return all;
  };
  int compared = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string first;
    for (int pass = 0; pass < 2; ++pass) {
      auto args = commands[c];
      const auto out = dir / ("run" + std::to_string(c) + "-" + std::to_string(pass));
      for (auto& a : args)
        if (a == "{out}") a = out;
      if (run_cli(args) != 0) {
        o.require(false, args[0] + " failed");
        break;
      }
      const auto snap = snapshot(out);
      if (pass == 0) {
        first = snap;
      } else if (snap != first) {
        o.require(false, args[0] + " output differs between runs");
      }
    }
    ++compared;
  }

  // Split membership and fixture draws, checked against values produced by an
  // independent reimplementation of the generator.
  const auto triplets = ttk::corpus::build_triplets(ttk::testing::make_dataset(2, 2, 10)).triplets;
  const auto s = ttk::corpus::split(triplets, {5, 2, 3, 11});
  std::string valid;
  for (const auto& t : s.valid) valid += t.source.id + "/" + t.low.author + " ";
  o.require(valid ==
                "src-g0-1/a1 src-g0-6/a0 src-g0-7/a0 src-g0-7/a1 src-g1-1/a1 src-g1-2/a0 src-g1-3/a1 src-g1-9/a0 ",
            "split membership differs from reference");
  o.require(s.train.size() == 20 && s.test.size() == 12, "split sizes");

  ttk::fixture::FixtureSpec spec;
  spec.n_samples = 2;
  const auto f = ttk::fixture::make_fixture(spec);
  const bool fixture_ok = f.low_model[0].n_tokens() == 13 && f.low_model[1].n_tokens() == 22 &&
                          f.low_model[0].token_logprobs[0] == -1.761503515090263 &&
                          f.low_model[0].token_logprobs[2] == -0.9979867766255857 &&
                          f.high_model[0].token_logprobs[1] == -2.267135987735721 &&
                          f.low_model[1].token_logprobs[0] == -2.7817026873358772 &&
                          f.high_model[1].token_logprobs[2] == -2.4023752076066174 &&
                          (*f.low_model[0].token_entropies)[0] == 1.7155471659502308 &&
                          (*f.low_model[1].logp_second_moments)[0] == 1.1451876213568526;
  o.require(fixture_ok, "fixture draws differ from reference");

  ttk::Xorshift64Star rng(42);
  o.require(rng.next() == 0x31b0ece7c4f697a2ULL && rng.next() == 0x9008a3b1cb686f03ULL, "prng stream");

  const std::string d = std::to_string(compared) + " commands byte-identical across reruns; split, fixture and "
                        "generator streams match reference values";
  o.detail = o.pass ? d : o.detail;
  return o;
}

Outcome t_test_p_values() {
  Outcome o;
  double worst = 0.0;
  ttk::Xorshift64Star rng(13);
  for (double df : {1.0, 4.0, 30.0, 1000.0}) {
    for (double t : {-7.5, -2.2, -0.6, 0.05, 0.9, 1.8, 3.1, 12.0}) {
      worst = std::max(worst, std::abs(ttk::stats::t_two_sided_p(t, df) - ttk::oracle::t_two_sided_p(t, df)));
    }
    // through the test itself: one-sample test on df + 1 values
    std::vector<double> xs(static_cast<std::size_t>(df) + 1);
    for (auto& x : xs) x = 0.3 + rng.normal();
    const auto r = ttk::stats::ttest_one_sample(xs);
    if (r.df != df) o.require(false, "df mismatch");
    worst = std::max(worst, std::abs(r.p - ttk::oracle::t_two_sided_p(r.t, df)));
  }
  o.require(worst <= kPValueTol, "deviation " + fmt(worst));
  o.detail = "max |p - oracle| " + fmt(worst) + " for df in {1, 4, 30, 1000}" + (o.pass ? "" : " (" + o.detail + ")");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence},
      {"hand-values", hand_values},
      {"tindex-invariants", tindex_invariants},
      {"fixture-end-to-end", fixture_end_to_end},
      {"shift-decomposition", shift_decomposition},
      {"determinism", determinism},
      {"t-test-p-values", t_test_p_values},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
