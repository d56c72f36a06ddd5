#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ttk/backend.hpp"
#include "ttk/random.hpp"
#include "ttk/scoring.hpp"
#include "ttk/shifts.hpp"
#include "ttk/stats.hpp"

namespace {

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ttk::Xorshift64Star rng(1);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = rng.normal() + 0.5 * y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttk::stats::auroc(s, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(8)->Range(64, 32768)->Complexity();

void BM_BestThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ttk::Xorshift64Star rng(2);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = rng.normal() + 0.5 * y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttk::stats::best_threshold_accuracy(s, y));
}
BENCHMARK(BM_BestThreshold)->Arg(1024)->Arg(32768);

void BM_Ols(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ttk::Xorshift64Star rng(3);
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
    y(i) = x.row(i).sum() + rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttk::stats::ols(x, y));
}
BENCHMARK(BM_Ols)->Arg(784)->Arg(10000);

void BM_Tindex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ttk::Xorshift64Star rng(4);
  ttk::backend::TokenScores lo{"s", "lo", {}, {}, {}, {}}, hi{"s", "hi", {}, {}, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    lo.token_logprobs.push_back(-3 * rng.uniform());
    hi.token_logprobs.push_back(-3 * rng.uniform());
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttk::scoring::tindex(lo, hi));
}
BENCHMARK(BM_Tindex)->Arg(64)->Arg(1024);

void BM_SentenceBleu(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ttk::Xorshift64Star rng(5);
  std::vector<std::string> hyp(n), ref(n);
  for (std::size_t i = 0; i < n; ++i) {
    hyp[i] = std::string(1, static_cast<char>('a' + rng.below(20)));
    ref[i] = std::string(1, static_cast<char>('a' + rng.below(20)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttk::stats::sentence_bleu(hyp, ref));
}
BENCHMARK(BM_SentenceBleu)->Arg(40)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
