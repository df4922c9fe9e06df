#ifndef ORBITDP_SAMPLER_H_
#define ORBITDP_SAMPLER_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitdp/matrix_io.h"
#include "orbitdp/random.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

enum class SamplerMethod {
  kAuto,        // exact sampler for rank-1 targets, MCMC otherwise
  kMcmc,
  kExactRank1,  // rank-1 targets only
};

std::string to_string(SamplerMethod method);
SamplerMethod sampler_method_from_string(const std::string& name);

struct SamplerConfig {
  int chain_length = 20000;  // total steps per chain, burn-in included
  int burn_in = 5000;
  double step_size = 0.3;    // std. deviation of the Givens angle
  bool diagnostics_on = true;
  int num_chains = 4;        // parallel chains for R-hat when diagnostics_on
  // Robbins-Monro adaptation of the step size, burn-in only. The post-burn-in
  // kernel is fixed, so the chain targets the exact density.
  bool adapt_step = true;
  double target_acceptance = 0.35;
  SamplerMethod method = SamplerMethod::kAuto;

  void validate() const;
};

Json sampler_config_to_json(const SamplerConfig& cfg);
SamplerConfig sampler_config_from_json(const Json& j);

struct ChainDiagnostics {
  std::string method;
  double acceptance_rate = 1.0;
  std::vector<double> utility_trace;  // post-burn-in scores <M, H>, chain 0
  double split_rhat = 1.0;
  double step_size = 0.0;
  double envelope_acceptance = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> flags;

  bool flagged() const { return !flags.empty(); }
};

// Serializes diagnostics; the trace is down-sampled to at most
// `max_trace_points` entries.
Json diagnostics_to_json(const ChainDiagnostics& d, std::size_t max_trace_points = 4096);

struct OrbitSample {
  OrbitPoint point;
  ChainDiagnostics diagnostics;
};

// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
// of diag(R) folded into Q.
ComplexMatrix haar_unitary(int d, Rng& rng);

// U diag(lambda) U^* with U Haar, i.e. a draw from the base measure on the orbit.
OrbitPoint haar_orbit_point(const Spectrum& lambda, Rng& rng);

// A unitary whose first column is the unit vector u.
ComplexMatrix unitary_with_first_column(const ComplexVector& u);

// Exact sampler for the density proportional to exp(coeff * u^* M u) against
// the uniform measure on the complex unit sphere.
//
// In the eigenbasis of M the squared moduli t_i = |w_i|^2 are uniform on the
// simplex under the base measure, so the target on (t_1, ..., t_{d-1}) is a
// product of exponentials with rates coeff * (gamma_0 - gamma_i) restricted
// to sum t_i <= 1. Each attempt draws independent truncated exponentials on
// [0, 1] and accepts when they fit in the simplex. Phases are uniform.
class Rank1ExactSampler {
 public:
  Rank1ExactSampler(const HermitianMatrix& m, double coeff);

  // nullopt once the running acceptance rate drops below 1e-4 (after at
  // least 10^4 attempts) or a single draw exhausts its attempt budget.
  std::optional<ComplexVector> sample(Rng& rng);

  double acceptance_rate() const;
  bool envelope_failed() const { return failed_; }
  int dim() const { return static_cast<int>(rates_.size()); }

 private:
  ComplexMatrix basis_;
  std::vector<double> rates_;  // rates_[0] unused (reference coordinate)
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
  bool failed_ = false;
};

struct Rank1Draw {
  ComplexVector u;
  double envelope_acceptance;
  bool fell_back_to_mcmc;
};

Rank1Draw sample_rank1_exact(const HermitianMatrix& m, double coeff, Rng& rng,
                             const SamplerConfig& fallback_cfg = {});

// Metropolis chain on U(d): proposals right-multiply U by a Givens rotation
// on a random column pair (angle ~ N(0, step^2), uniform phase). Accepts with
// min(1, exp(coeff * (<M, H'> - <M, H>))). Returns chain 0's final state.
OrbitSample sample_orbit_mcmc(const HermitianMatrix& m, const Spectrum& lambda,
                              double coeff, const SamplerConfig& cfg, Rng& rng);

// One chain; after burn-in records every `thin`-th state until `count`
// states are collected.
std::vector<OrbitPoint> mcmc_thinned_samples(const HermitianMatrix& m,
                                             const Spectrum& lambda, double coeff,
                                             const SamplerConfig& cfg, int thin,
                                             int count, Rng& rng);

// Dispatches on cfg.method: exact rank-1 sampler (with MCMC fallback) or MCMC.
OrbitSample sample_orbit(const HermitianMatrix& m, const Spectrum& lambda,
                         double coeff, const SamplerConfig& cfg, Rng& rng);

// Split R-hat over the halves of each chain. Returns 1 for constant traces.
double split_rhat(std::span<const std::vector<double>> chains);

// For d = 2 rank-1 points H = lambda_1 u u^*: t = |u_1|^2.
double rank1_marginal(const OrbitPoint& p);

// 0.5 * sum_bins |empirical - oracle| on the t-marginal of d = 2 rank-1
// samples. The oracle density on [0, 1] need not be normalized.
double tv_distance_diagnostic(std::span<const OrbitPoint> samples,
                              const std::function<double(double)>& oracle_density,
                              int bins);

// Same statistic on precomputed t values.
double tv_distance_on_marginal(std::span<const double> t_values,
                               const std::function<double(double)>& oracle_density,
                               int bins);

}  // namespace orbitdp

#endif  // ORBITDP_SAMPLER_H_
