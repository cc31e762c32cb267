#include <random>

#include <benchmark/benchmark.h>

#include "elliptic/elliptic.hpp"

namespace {

using namespace elliptic;

SymmetricMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
  return SymmetricMatrix::from_matrix(m);
}

void BM_EigenDecompose(benchmark::State& state) {
  const auto x = random_symmetric(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(x));
}
BENCHMARK(BM_EigenDecompose)->DenseRange(2, 16, 2);

void BM_LoewnerLeq(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_symmetric(n, 2);
  const auto y = x + SymmetricMatrix::identity(n);
  for (auto _ : state) benchmark::DoNotOptimize(loewner_leq(x, y));
}
BENCHMARK(BM_LoewnerLeq)->Arg(2)->Arg(4)->Arg(8);

void BM_ElementarySymmetric(benchmark::State& state) {
  const auto x = random_symmetric(8, 3);
  const auto ev = eigenvalues(x);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(elementary_symmetric(k, ev));
}
BENCHMARK(BM_ElementarySymmetric)->DenseRange(1, 8);

void BM_EvaluatePLaplace(benchmark::State& state) {
  const auto op = catalog::p_laplace(4.0);
  const auto x = random_symmetric(4, 4);
  const auto w = JetPoint::with_gradient({1.0, 0.5, -0.25, 2.0});
  for (auto _ : state) benchmark::DoNotOptimize(op.evaluate(w, x));
}
BENCHMARK(BM_EvaluatePLaplace);

void BM_CheckClassM(benchmark::State& state) {
  const auto op = catalog::p_laplace(3.0);
  const auto pair = witness_p_laplace(3.0, JetPoint::with_gradient({1.0, 0.0, 0.0}));
  SampleConfig cfg;
  cfg.dim = 3;
  cfg.trials = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(check_class_m(op, pair.g1, pair.g2, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CheckClassM)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GenerateAdmissible(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = block_extract(random_symmetric(2 * n, 5));
  const auto sched = EpsilonSchedule::geometric();
  for (auto _ : state) benchmark::DoNotOptimize(generate_admissible(a, sched));
}
BENCHMARK(BM_GenerateAdmissible)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
