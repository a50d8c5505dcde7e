// Serial reference kernels against their OpenMP counterparts on the
// paper-sized problem (N = 3000, 2x16 networks). Arg(0) is the number of
// subdomains.

#include <benchmark/benchmark.h>

#include <numbers>
#include <numeric>
#include <vector>

#include "fbpinn/kernels.hpp"

using namespace fbpinn;

namespace {

FbpinnState make(int J) {
  FbpinnConfig cfg;
  cfg.subdomains = J;
  cfg.overlap_fraction = 0.7;
  cfg.collocation_points = 3000;
  cfg.network = {2, 16};
  cfg.eval_factor = 1;
  const double L = 2.0 * std::numbers::pi;
  return make_state(problem::make_single_frequency(15.0, {-L, L}), cfg);
}

template <class Terms>
void bench_terms(benchmark::State& st, Terms terms) {
  const auto s = make(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(terms(s, s.collocation, false));
  st.SetItemsProcessed(st.iterations() * 3000);
}

template <class Steps>
void bench_steps(benchmark::State& st, Steps steps) {
  auto s = make(int(st.range(0)));
  std::vector<int> active(s.params.size());
  std::iota(active.begin(), active.end(), 0);
  for (auto _ : st) steps(s, active, 1);
}

template <class Terms, class Residuals>
void bench_residuals(benchmark::State& st, Terms terms, Residuals residuals) {
  const auto s = make(int(st.range(0)));
  const auto t = terms(s, s.collocation, false);
  for (auto _ : st) benchmark::DoNotOptimize(residuals(s, t));
}

void serial_terms(benchmark::State& st) { bench_terms(st, kernels::serial::terms); }
void omp_terms(benchmark::State& st) { bench_terms(st, kernels::omp::terms); }
void serial_steps(benchmark::State& st) { bench_steps(st, kernels::serial::local_steps); }
void omp_steps(benchmark::State& st) { bench_steps(st, kernels::omp::local_steps); }
void serial_residuals(benchmark::State& st) {
  bench_residuals(st, kernels::serial::terms, kernels::serial::squared_residuals);
}
void omp_residuals(benchmark::State& st) {
  bench_residuals(st, kernels::serial::terms, kernels::omp::squared_residuals);
}

} // namespace

BENCHMARK(serial_terms)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(omp_terms)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(serial_steps)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(omp_steps)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(serial_residuals)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(omp_residuals)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
