// Serial reference vs OpenMP kernels on representative sizes.
#include <benchmark/benchmark.h>

#include "bayes_epi/kernels.hpp"
#include "bayes_epi/rng.hpp"

namespace {

using namespace bayes_epi;

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t stream) {
  RngStream rng(7, stream);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

template <bool Parallel>
void BM_PredictiveSummary(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd design = random_matrix(n, 7, 1);
  const Eigen::MatrixXd draws = 0.3 * random_matrix(7, 4000, 2);
  for (auto _ : state) {
    auto s = Parallel ? kernels::predictive_summary(design, draws, 0.95)
                      : kernels::predictive_summary_serial(design, draws, 0.95);
    benchmark::DoNotOptimize(s.mean.data());
  }
}

template <bool Parallel>
void BM_Concordance(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::VectorXd risk = random_matrix(n, 1, 3).col(0);
  const Eigen::VectorXd time = random_matrix(n, 1, 4).col(0).array().exp();
  RngStream rng(7, 5);
  Eigen::VectorXi event(n);
  for (Eigen::Index i = 0; i < n; ++i) event(i) = rng.bernoulli(0.6) ? 1 : 0;
  for (auto _ : state) {
    auto c = Parallel ? kernels::concordance_counts(risk, time, event)
                      : kernels::concordance_counts_serial(risk, time, event);
    benchmark::DoNotOptimize(c.concordant);
  }
}

template <bool Parallel>
void BM_WeightedGram(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd x = random_matrix(n, 21, 6);
  const Eigen::VectorXd w = random_matrix(n, 1, 7).col(0).array().abs();
  for (auto _ : state) {
    auto g = Parallel ? kernels::weighted_gram(x, w) : kernels::weighted_gram_serial(x, w);
    benchmark::DoNotOptimize(g.data());
  }
}

}  // namespace

BENCHMARK(BM_PredictiveSummary<false>)->Name("predictive_summary/serial")->Arg(500)->Arg(1000);
BENCHMARK(BM_PredictiveSummary<true>)->Name("predictive_summary/openmp")->Arg(500)->Arg(1000);
BENCHMARK(BM_Concordance<false>)->Name("concordance/serial")->Arg(200)->Arg(2000);
BENCHMARK(BM_Concordance<true>)->Name("concordance/openmp")->Arg(200)->Arg(2000);
BENCHMARK(BM_WeightedGram<false>)->Name("weighted_gram/serial")->Arg(1000)->Arg(100000);
BENCHMARK(BM_WeightedGram<true>)->Name("weighted_gram/openmp")->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
