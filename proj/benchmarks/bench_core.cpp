#include <benchmark/benchmark.h>

#include <vector>

#include "rfbm/fbm.hpp"
#include "rfbm/grid.hpp"
#include "rfbm/mvn.hpp"
#include "rfbm/numeric.hpp"
#include "rfbm/pickands.hpp"
#include "rfbm/storage.hpp"

namespace {

using rfbm::StreamKey;
using rfbm::fbm::HurstParameter;

void BM_CirculantFgn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const HurstParameter h(0.7);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfbm::fbm::sample_fgn_circulant(n, 0.01, h, StreamKey::root(1).child(rep++)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CirculantFgn)->RangeMultiplier(8)->Range(1 << 10, 1 << 22)->Unit(benchmark::kMicrosecond);

void BM_DenseSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = 0.01 * static_cast<double>(i + 1);
  const rfbm::fbm::DenseFbmSampler sampler(times, HurstParameter(0.3));
  rfbm::NormalSource noise(StreamKey::root(2));
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(noise));
}
BENCHMARK(BM_DenseSample)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);

void BM_SlidingMin(benchmark::State& state) {
  std::vector<double> x(1 << 20);
  rfbm::NormalSource noise(StreamKey::root(3));
  noise.fill_normal(x);
  for (auto _ : state) benchmark::DoNotOptimize(rfbm::sliding_min(x, static_cast<std::size_t>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_SlidingMin)->Arg(16)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_Lindley(benchmark::State& state) {
  const auto inc = rfbm::fbm::sample_fgn_circulant(1 << 20, 0.01, HurstParameter(0.5), StreamKey::root(4));
  for (auto _ : state) benchmark::DoNotOptimize(rfbm::storage::lindley(0.0, inc, 0.01));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(inc.size()));
}
BENCHMARK(BM_Lindley)->Unit(benchmark::kMillisecond);

void BM_Bivariate(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0)) / 1000.0;
  double a = -1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfbm::mvn::bivariate_cdf(a, 0.7, rho));
    a = a > 2.0 ? -1.5 : a + 0.01;
  }
}
BENCHMARK(BM_Bivariate)->Arg(300)->Arg(-950)->Arg(999);

void BM_Orthant(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  rfbm::NormalSource noise(StreamKey::root(5));
  const auto corr = rfbm::mvn::random_correlation(n, noise);
  const std::vector<double> u(n, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(rfbm::mvn::orthant_cdf(u, corr));
}
BENCHMARK(BM_Orthant)->DenseRange(2, 4)->Unit(benchmark::kMicrosecond);

void BM_PickandsTheta(benchmark::State& state) {
  rfbm::pickands::ThetaParams p;
  p.theta = 0.1;
  p.span = 64;
  p.reps = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rfbm::pickands::estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(6)));
  }
}
BENCHMARK(BM_PickandsTheta)->Unit(benchmark::kMillisecond);

void BM_GridCheck(benchmark::State& state) {
  rfbm::grid::GridCheckParams p;
  p.theta = 0.3;
  p.v = 2.72;
  p.reps = 256;
  for (auto _ : state) benchmark::DoNotOptimize(rfbm::grid::grid_vs_continuum_experiment(HurstParameter(0.7), p));
}
BENCHMARK(BM_GridCheck)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
