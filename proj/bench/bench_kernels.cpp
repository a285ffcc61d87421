// Serial reference vs OpenMP path for each kernel; arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vscope/kernels.hpp"
#include "vscope/solver.hpp"

using namespace vscope;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = N(rng);
  return v;
}

Exec policy(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void set_label(benchmark::State& s) {
  s.SetLabel(s.range(0) ? "parallel, " + std::to_string(max_threads()) + " threads" : "serial");
}

void BM_blocked_sum(benchmark::State& s) {
  const auto v = noise(std::size_t(1) << 21, 1);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::blocked_sum(v, 4096, policy(s)));
  s.SetBytesProcessed(std::int64_t(s.iterations()) * std::int64_t(v.size() * sizeof(double)));
  set_label(s);
}

void BM_cross(benchmark::State& s) {
  const std::size_t n = std::size_t(1) << 18;
  const auto ax = noise(n, 1), ay = noise(n, 2), az = noise(n, 3), bx = noise(n, 4), by = noise(n, 5), bz = noise(n, 6);
  std::vector<double> ox(n), oy(n), oz(n);
  for (auto _ : s) {
    kernels::cross(ax, ay, az, bx, by, bz, ox, oy, oz, policy(s));
    benchmark::ClobberMemory();
  }
  set_label(s);
}

void BM_box_sum(benchmark::State& s) {
  const int n = 64;
  const auto f = noise(std::size_t(n) * n * n, 7);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::box_sum(f, n, 4, policy(s)));
  set_label(s);
}

void BM_mean_oscillations(benchmark::State& s) {
  const int n = 64;
  const auto f = noise(std::size_t(n) * n * n, 8);
  for (auto _ : s) benchmark::DoNotOptimize(kernels::mean_oscillations(f, n, 8, 4, policy(s)));
  set_label(s);
}

void BM_vorticity_rhs(benchmark::State& s) {
  const GridSpec g{int(s.range(0)), 6.283185307179586, 0.01};
  VectorField w(g);
  for (int c = 0; c < 3; ++c) w[c].values = noise(w.size(), 10 + c);
  for (auto _ : s) benchmark::DoNotOptimize(vorticity_rhs(w));
}

}  // namespace

BENCHMARK(BM_blocked_sum)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_cross)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_box_sum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mean_oscillations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_vorticity_rhs)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
