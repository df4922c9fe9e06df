#include <vector>

#include <benchmark/benchmark.h>

#include "orbitdp/bounds.h"
#include "orbitdp/mechanisms.h"
#include "orbitdp/selftest.h"

namespace orbitdp {
namespace {

void BM_PrivatizeEigenvalues(benchmark::State& state) {
  Rng rng(4);
  const std::vector<double> v(static_cast<std::size_t>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(privatize_eigenvalues(v, 1.0, rng));
}
BENCHMARK(BM_PrivatizeEigenvalues)->Arg(4)->Arg(64);

void BM_Algorithm2(benchmark::State& state) {
  Rng rng(5);
  const int d = static_cast<int>(state.range(0));
  const auto m = random_psd(d, rng);
  SamplerConfig cfg;
  cfg.chain_length = 4000;
  cfg.burn_in = 1000;
  cfg.diagnostics_on = false;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(algorithm2(m, 2, 1.0, cfg, ++seed));
}
BENCHMARK(BM_Algorithm2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_EvaluateBounds(benchmark::State& state) {
  const Spectrum s(std::vector<double>{3.0, 2.0, 1.0, 0.5, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_bounds(s, s, 6, 3, 1.0, 0.1));
}
BENCHMARK(BM_EvaluateBounds);

}  // namespace
}  // namespace orbitdp
