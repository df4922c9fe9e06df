#ifndef ORBITDP_SELFTEST_H_
#define ORBITDP_SELFTEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "orbitdp/matrix_io.h"
#include "orbitdp/random.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

// Random instances shared by the invariant suites.
ComplexVector random_unit_vector(int d, Rng& rng);
HermitianMatrix random_hermitian(int d, Rng& rng);  // Gaussian entries, unit variance
HermitianMatrix random_psd(int d, Rng& rng);        // G G^* / d
// Non-increasing values in [0, scale) with rank zeros padded after index k.
Spectrum random_orbit_spectrum(int d, int k, double scale, Rng& rng);
Dataset random_dataset(int d, int n, Rng& rng);

struct InvariantResult {
  std::string name;
  int cases = 0;
  int violations = 0;
  double worst = 0.0;  // largest violation margin observed (<= 0 when all hold)
  std::string detail;

  bool passed() const { return violations == 0; }
};

struct SelftestReport {
  std::uint64_t seed = 0;
  std::vector<InvariantResult> results;

  bool passed() const;
};

SelftestReport run_selftest(std::uint64_t seed);

Json selftest_report_to_json(const SelftestReport& r);
std::string selftest_report_to_csv(const SelftestReport& r);

}  // namespace orbitdp

#endif  // ORBITDP_SELFTEST_H_
