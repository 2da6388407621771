// Serial reference vs OpenMP GEMM kernels, plus an end-to-end evaluation pass.

#include <benchmark/benchmark.h>

#include <vector>

#include "navlab/kernels.hpp"
#include "navlab/metrics.hpp"
#include "navlab/rng.hpp"
#include "navlab/training.hpp"

using namespace navlab;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return v;
}

template <auto Kernel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    std::fill(c.begin(), c.end(), 0.0);
    Kernel(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

void BM_evaluate(benchmark::State& state) {
  RunConfig c;
  c.latent.num_queries = 8;
  c.data.train_worlds = 1;
  c.data.train_episodes_per_world = 1;
  c.resolve();
  const auto bench = generate_benchmark(c);
  LatentProvider provider(c.latent, 1);
  PolicyModel model(c.policy, 2);
  LatentCache cache(provider);
  evaluate(model, cache, bench.eval, c.evaluation, 1);  // warm the latent cache
  for (auto _ : state) {
    auto report = evaluate(model, cache, bench.eval, c.evaluation, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(report.summary.sr);
  }
}

}  // namespace

BENCHMARK(BM_gemm<kernels::gemm_nn_serial>)->Name("gemm_nn/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_gemm<kernels::gemm_nn_omp>)->Name("gemm_nn/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_gemm<kernels::gemm_nt_serial>)->Name("gemm_nt/serial")->Arg(128);
BENCHMARK(BM_gemm<kernels::gemm_nt_omp>)->Name("gemm_nt/omp")->Arg(128);
BENCHMARK(BM_gemm<kernels::gemm_tn_serial>)->Name("gemm_tn/serial")->Arg(128);
BENCHMARK(BM_gemm<kernels::gemm_tn_omp>)->Name("gemm_tn/omp")->Arg(128);
BENCHMARK(BM_evaluate)->Name("evaluate/threads")->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
