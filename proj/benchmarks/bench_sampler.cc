#include <vector>

#include <benchmark/benchmark.h>

#include "orbitdp/sampler.h"
#include "orbitdp/selftest.h"

namespace orbitdp {
namespace {

void BM_HaarUnitary(benchmark::State& state) {
  Rng rng(1);
  const int d = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(haar_unitary(d, rng));
}
BENCHMARK(BM_HaarUnitary)->Arg(2)->Arg(8)->Arg(32);

void BM_Rank1Exact(benchmark::State& state) {
  Rng rng(2);
  const int d = static_cast<int>(state.range(0));
  std::vector<double> g(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] = 1.0 / (1.0 + i);
  Rank1ExactSampler s(HermitianMatrix::diagonal(g), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample(rng));
}
BENCHMARK(BM_Rank1Exact)->Arg(2)->Arg(4)->Arg(8);

void BM_McmcChain(benchmark::State& state) {
  Rng rng(3);
  const int d = static_cast<int>(state.range(0));
  const auto m = random_psd(d, rng);
  const auto lambda = random_orbit_spectrum(d, d / 2, 1.0, rng);
  SamplerConfig cfg;
  cfg.chain_length = 5000;
  cfg.burn_in = 1000;
  cfg.diagnostics_on = false;
  for (auto _ : state) benchmark::DoNotOptimize(sample_orbit_mcmc(m, lambda, 1.0, cfg, rng));
  state.SetItemsProcessed(state.iterations() * cfg.chain_length);
}
BENCHMARK(BM_McmcChain)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace orbitdp
