#ifndef ORBITDP_MECHANISMS_H_
#define ORBITDP_MECHANISMS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitdp/matrix_io.h"
#include "orbitdp/random.h"
#include "orbitdp/sampler.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

// Pure epsilon-DP budget split across named stages. Fractions lie in (0, 1]
// and sum to 1.
struct PrivacyBudget {
  struct Stage {
    std::string name;
    double fraction;
  };

  double epsilon = 1.0;
  std::vector<Stage> stages;

  static PrivacyBudget single(double epsilon, std::string stage = "orbit_sampling");
  // {eigenvalues: eigen_fraction, orbit_sampling: 1 - eigen_fraction}
  static PrivacyBudget split(double epsilon, double eigen_fraction);

  void validate() const;
  double stage_epsilon(const std::string& name) const;
  double total_spent() const;
};

Json budget_to_json(const PrivacyBudget& b);

// Density (1 / 2b) exp(-|x| / b), by inverse CDF.
double laplace_noise(double scale_b, Rng& rng);

// lambda_i + Lap(2 / epsilon), coordinate-wise. Not sorted; may be negative.
std::vector<double> privatize_eigenvalues(std::span<const double> values, double epsilon,
                                          Rng& rng);
std::vector<double> privatize_eigenvalues(const Spectrum& spectrum, double epsilon, Rng& rng);

// Top-k entries of `noisy` in non-increasing order with negatives clamped to
// 0, padded with zeros to length `dim` (default: noisy.size()), rank k.
Spectrum sort_clip_eigenvalues(std::span<const double> noisy, int k, int dim = -1);

// lambda_1: the largest change of <M, H> between neighbors, for H in the orbit.
double sensitivity_bound(const Spectrum& lambda);

// Target density proportional to exp(coeff <m, H>) against the orbit's Haar
// measure.
struct ExponentialTarget {
  HermitianMatrix m;
  Spectrum lambda;
  double coeff;
  double sensitivity;

  double log_density(const OrbitPoint& h) const;
};

// coeff = epsilon / (4 lambda_1); 0 for the zero spectrum.
ExponentialTarget algorithm1_target(const HermitianMatrix& m, const Spectrum& lambda,
                                    double epsilon);

// Sampler prepared once for a fixed target. Rank-1 targets with method auto
// or exact reuse one eigendecomposition across draws.
class OrbitMechanism {
 public:
  OrbitMechanism(ExponentialTarget target, SamplerConfig cfg);

  OrbitSample sample(Rng& rng);

  // Rank-1 targets only: the unit vector u of H = lambda_1 u u^*. Falls back
  // to MCMC when the exact envelope fails.
  ComplexVector sample_direction(Rng& rng);

  const ExponentialTarget& target() const { return target_; }
  bool uses_exact_sampler() const { return exact_.has_value(); }

 private:
  ExponentialTarget target_;
  SamplerConfig cfg_;
  std::optional<Rank1ExactSampler> exact_;
};

struct MechanismTranscript {
  std::uint64_t seed = 0;
  std::string mechanism;
  PrivacyBudget budget;
  int k = 0;
  double coefficient = 0.0;
  double sensitivity = 0.0;
  std::optional<std::vector<double>> noisy_eigenvalues;  // raw, before sort/clip
  Spectrum target_spectrum{std::vector<double>{0.0}};
  OrbitPoint output{ComplexMatrix::Identity(1, 1), Spectrum(std::vector<double>{0.0})};
  double utility = 0.0;          // <M, H>
  double optimum = 0.0;          // Schur-Horn optimum for the target spectrum
  double utility_gap = 0.0;      // optimum - utility
  double frobenius_error = 0.0;  // ||M - H||_F^2
  ChainDiagnostics diagnostics;
  std::vector<std::string> flags;     // diagnostic problems (strict mode fails on these)
  std::vector<std::string> warnings;  // parameter warnings, e.g. epsilon outside (0, 1)

  bool flagged() const { return !flags.empty() || diagnostics.flagged(); }
};

Json transcript_to_json(const MechanismTranscript& t);
// Header line plus one row.
std::string transcript_to_csv(const MechanismTranscript& t);

// Samples H from exp((epsilon / (4 lambda_1)) <m, H>) on the orbit of lambda.
MechanismTranscript algorithm1(const HermitianMatrix& m, const Spectrum& lambda,
                               double epsilon, const SamplerConfig& cfg,
                               std::uint64_t seed);

// Privatizes the top-k eigenvalues of m with Lap(4 / epsilon), sorts and
// clips them, then samples on the private orbit with coefficient
// epsilon / (8 lambda~_1).
MechanismTranscript algorithm2(const HermitianMatrix& m, int k, double epsilon,
                               const SamplerConfig& cfg, std::uint64_t seed);
MechanismTranscript algorithm2(const Dataset& dataset, int k, double epsilon,
                               const SamplerConfig& cfg, std::uint64_t seed);

// P[gap > t] <= (1 + 16 lambda_1 Gamma / t)^{2dk} exp(-epsilon t / (4 lambda_1)),
// Gamma = sum(gamma), d = gamma.dim(), k = lambda.rank() unless given.
double utility_tail_bound(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                          double t, int k = -1);
double log_utility_tail_bound(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                              double t, int k = -1);
// Smallest t with utility_tail_bound <= beta (bisection; the bound is
// decreasing in t).
double utility_tail_quantile(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                             double beta, int k = -1);

// tau = (2 lambda_1 / epsilon) log(e + (2 + 8 Gamma)^{4dk} / beta) + lambda_1,
// evaluated in log space.
double utility_tau(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                   double beta, int k = -1);

}  // namespace orbitdp

#endif  // ORBITDP_MECHANISMS_H_
