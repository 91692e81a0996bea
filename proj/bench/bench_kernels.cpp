// Serial reference vs OpenMP kernels at the sizes the optimizers use.
// Set OMP_NUM_THREADS to vary the parallel width.

#include <benchmark/benchmark.h>

#include <random>

#include "dseq/alamm.hpp"
#include "dseq/kernels.hpp"
#include "dseq/waveform.hpp"

using namespace dseq;
using kernels::Exec;

namespace {

struct Setup {
  CVector x;
  CMatrix phasors;
  CMatrix rows;
  CMatrix alpha;
  RVector c;
  int r;

  explicit Setup(int n) : r(5) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    x = gen_random_polyphase(n, 3).values();
    const ZoneOfOperation zone = ZoneOfOperation::from_bins(r, -2.0, 2.0, 41, n);
    phasors = kernels::doppler_phasors(zone.doppler(), n);
    rows = kernels::dtft_rows(SpectralMask::from_bands(n, {{0.1, 0.2}}, 50, 20.0).bins(), n);
    alpha = CMatrix(2 * r + 1, zone.doppler_count());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha(i) = cdouble(g(rng), g(rng));
    c = RVector(rows.rows());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = std::abs(g(rng));
  }
};

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(1) ? "parallel" : "serial"); }

void BM_ambiguity_block(benchmark::State& st) {
  const Setup s(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::ambiguity_block(s.x, s.phasors, s.r, exec_of(st)));
  label(st);
}

void BM_shift_sum_apply(benchmark::State& st) {
  const Setup s(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::shift_sum_apply(s.alpha, s.phasors, s.x, exec_of(st)));
  label(st);
}

void BM_rank_one_sum_apply(benchmark::State& st) {
  const Setup s(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::rank_one_sum_apply(s.c, s.rows, s.x, exec_of(st)));
  label(st);
}

void BM_dtft_energy(benchmark::State& st) {
  const Setup s(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::dtft_energy(s.x, s.rows, exec_of(st)));
  label(st);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {64, 128, 512})
    for (int par : {0, 1}) b->Args({n, par});
}

}  // namespace

BENCHMARK(BM_ambiguity_block)->Apply(sizes);
BENCHMARK(BM_shift_sum_apply)->Apply(sizes);
BENCHMARK(BM_rank_one_sum_apply)->Apply(sizes);
BENCHMARK(BM_dtft_energy)->Apply(sizes);

BENCHMARK_MAIN();
