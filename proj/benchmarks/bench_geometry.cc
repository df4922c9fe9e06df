#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "orbitdp/geometry.h"
#include "orbitdp/selftest.h"

namespace orbitdp {
namespace {

void BM_PrincipalAngles(benchmark::State& state) {
  Rng rng(6);
  const int d = static_cast<int>(state.range(0));
  const auto a = ProjectionPoint::haar(d, d / 2, rng);
  const auto b = ProjectionPoint::haar(d, d / 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(principal_angles(a, b));
}
BENCHMARK(BM_PrincipalAngles)->Arg(4)->Arg(16);

void BM_PackingMapPhi(benchmark::State& state) {
  Rng rng(7);
  const Spectrum lambda(std::vector<double>{4.0, 3.0, 2.0, 1.0, 0.0});
  const auto p = ProjectionPoint::haar(4, 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(packing_map_phi(p, lambda, 2, 4));
}
BENCHMARK(BM_PackingMapPhi);

void BM_PackingConstruct(benchmark::State& state) {
  const Spectrum lambda(std::vector<double>{3.0, 2.0, 1.0, 0.0});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(++seed);
    benchmark::DoNotOptimize(packing_lower_construct(lambda, 1, 4, 0.5, 2.0, rng));
  }
}
BENCHMARK(BM_PackingConstruct)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace orbitdp
