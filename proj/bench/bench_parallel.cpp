// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "permcast/estimator.hpp"
#include "permcast/exact_perm.hpp"
#include "permcast/flat_case.hpp"
#include "permcast/matrix.hpp"
#include "permcast/parallel.hpp"

using namespace permcast;

namespace {

void BM_RyserSerial(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const DenseMatrix a = gen_uniform(n, n, {1.0, 2.0}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(perm_ryser_serial(a));
}

void BM_RyserParallel(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const DenseMatrix a = gen_uniform(n, n, {1.0, 2.0}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(perm_ryser(a, static_cast<int>(state.range(1))));
}

void BM_LogDetSerial(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const DenseMatrix a = gen_uniform(n, n / 2, {1.0, 2.0}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(log_det_samples_serial(a, FieldKind::Real, 3, 64));
}

void BM_LogDetParallel(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const DenseMatrix a = gen_uniform(n, n / 2, {1.0, 2.0}, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_det_samples(a, FieldKind::Real, 3, 64, static_cast<int>(state.range(1))));
  }
}

void BM_Chi2Product(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_product_samples(100, 50, 4, 4096, static_cast<int>(state.range(0))));
  }
}

void thread_args(benchmark::internal::Benchmark* b, std::initializer_list<std::int64_t> sizes) {
  const std::int64_t max_threads = parallel::default_concurrency();
  for (std::int64_t n : sizes) {
    for (std::int64_t t = 1; t <= max_threads; t *= 2) b->Args({n, t});
    if ((max_threads & (max_threads - 1)) != 0) b->Args({n, max_threads});
  }
}

}  // namespace

BENCHMARK(BM_RyserSerial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RyserParallel)->Apply([](auto* b) { thread_args(b, {16, 20}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogDetSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogDetParallel)->Apply([](auto* b) { thread_args(b, {50, 200}); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Chi2Product)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
