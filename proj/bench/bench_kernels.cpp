#include <benchmark/benchmark.h>

#include "hkt/billiards.hpp"
#include "hkt/montecarlo.hpp"
#include "hkt/spectra.hpp"

using namespace hkt;

namespace {

const Spectrum& disk_spectrum() {
  static const Spectrum s = eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 4e4);
  return s;
}

void BM_trace_series_serial(benchmark::State& st) {
  const auto grid = log_grid(1e-3, 1.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(serial::trace_series(disk_spectrum(), grid, 1e-9));
}
void BM_trace_series_parallel(benchmark::State& st) {
  const auto grid = log_grid(1e-3, 1.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(trace_series(disk_spectrum(), grid, 1e-9));
}

void BM_eigenvalues_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 1e4));
}
void BM_eigenvalues_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(eigenvalues(Domain(Disk{1.0}), BC::Dirichlet, 1e4));
}

McConfig mc_config(long long n) {
  McConfig c;
  c.n_paths = n;
  return c;
}

void BM_mc_trace_serial(benchmark::State& st) {
  const Domain d = Disk{1.0};
  for (auto _ : st) benchmark::DoNotOptimize(serial::mc_trace(d, 0.1, mc_config(st.range(0))));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
void BM_mc_trace_parallel(benchmark::State& st) {
  const Domain d = Disk{1.0};
  for (auto _ : st) benchmark::DoNotOptimize(mc_trace(d, 0.1, mc_config(st.range(0))));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_n_bounce_serial(benchmark::State& st) {
  const Domain d = Ellipse{2.0, 1.0};
  for (auto _ : st) benchmark::DoNotOptimize(serial::n_bounce_orbits(d, static_cast<int>(st.range(0))));
}
void BM_n_bounce_parallel(benchmark::State& st) {
  const Domain d = Ellipse{2.0, 1.0};
  for (auto _ : st) benchmark::DoNotOptimize(n_bounce_orbits(d, static_cast<int>(st.range(0))));
}

}  // namespace

BENCHMARK(BM_trace_series_serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trace_series_parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eigenvalues_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eigenvalues_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_trace_serial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_trace_parallel)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_n_bounce_serial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_n_bounce_parallel)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
