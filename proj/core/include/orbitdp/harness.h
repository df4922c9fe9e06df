#ifndef ORBITDP_HARNESS_H_
#define ORBITDP_HARNESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitdp/bounds.h"
#include "orbitdp/matrix_io.h"
#include "orbitdp/mechanisms.h"
#include "orbitdp/random.h"
#include "orbitdp/sampler.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

// ---------------------------------------------------------------------------
// Instance generators

// top_eig * P for a Haar-random rank-k projection P.
HermitianMatrix gen_projection_instance(int d, int k, double top_eig, Rng& rng);

// scale * X X^* for a d x m complex Gaussian X with E|X_ij|^2 = 1. The
// default scale (<= 0) is 1 / m.
HermitianMatrix gen_wishart_instance(int d, int m, Rng& rng, double scale = 0.0);

// top for i <= ceil(k/4), top/2 for i <= ceil(3k/4), top/3 for i <= k, then
// zeros (1-based indices).
std::vector<double> conditioned_gap_spectrum(int d, int k, double top_eig);
// The spectrum above conjugated by a Haar unitary. Requires k >= 4.
HermitianMatrix gen_conditioned_gap_instance(int d, int k, double top_eig, Rng& rng);

// ---------------------------------------------------------------------------
// Experiments

enum class Scenario { kProjection, kConditionedGap, kWishart, kCustomFile };
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ExperimentSpec {
  Scenario scenario = Scenario::kProjection;
  int d = 4;
  int k = 2;
  double epsilon = 1.0;
  double beta = 0.1;
  int trials = 200;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  std::string output_path;
  double top_eig = 1.0;
  int wishart_m = 0;               // 0: m = d
  std::string wishart_norm = "m";  // "m": 1/m, "d": 1/d
  std::string input_path;          // custom_file matrix
  std::string mechanism;           // "", "algorithm1" or "algorithm2"
  int threads = 0;                 // 0: hardware concurrency
  bool timing = false;             // record wall-clock (breaks byte-identical output)

  void validate() const;
  // algorithm2 for wishart and custom_file, algorithm1 otherwise, unless set.
  std::string resolved_mechanism() const;
};

Json experiment_spec_to_json(const ExperimentSpec& s);
ExperimentSpec experiment_spec_from_json(const Json& j);

struct TrialSummary {
  int trial = 0;
  std::uint64_t seed = 0;
  double utility = 0.0;
  double utility_gap = 0.0;
  double frob_err_sq = 0.0;
  std::vector<double> lambda_tilde;  // sorted, clipped target values (k entries)
  double acceptance_rate = 1.0;
  double rhat = 1.0;
  double wall_ms = 0.0;
  std::vector<std::string> flags;
};

struct Quantiles {
  double gap_median = 0.0;
  double gap_upper = 0.0;   // level 1 - beta
  double frob_median = 0.0;
  double frob_upper = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::string mechanism;
  std::vector<double> gamma;   // instance spectrum
  std::vector<double> lambda;  // algorithm1 target (top-k of gamma)
  std::vector<TrialSummary> per_trial;
  Quantiles quantiles;
  BoundReport bounds;
  std::optional<bool> tau_dominates;  // gap_upper <= tau; algorithm1 only
  int flagged_trials = 0;
  double wall_clock_seconds = 0.0;
};

// Nearest rank: sorted[ceil(q n) - 1].
double nearest_rank_quantile(std::vector<double> values, double q);

HermitianMatrix make_instance(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

Json experiment_result_to_json(const ExperimentResult& r);
std::string experiment_result_to_csv(const ExperimentResult& r);

// ---------------------------------------------------------------------------
// Privacy audit (d = 2, rank-1 target diag(1, 0))

struct NeighborPair {
  std::string name;
  Dataset a;
  Dataset b;
};

// Datasets of n copies of a unit vector y against the same with one copy
// replaced by x (x orthogonal to y, or x = 0), over several n and bases.
std::vector<NeighborPair> adversarial_pairs(int count);

enum class AuditMechanism {
  kCorrect,          // coefficient epsilon / (4 lambda_1)
  kMutatedCoeff,     // coefficient epsilon / lambda_1
};

struct AuditConfig {
  double epsilon = 1.0;
  int runs_per_pair = 100000;
  int bins = 24;        // polar bands x 2 azimuth halves
  int min_count = 200;
  std::uint64_t seed = 0;
  AuditMechanism mechanism = AuditMechanism::kCorrect;

  void validate() const;
};

struct AuditBin {
  int index = 0;
  std::int64_t count_a = 0;
  std::int64_t count_b = 0;
  bool audited = false;
  double ratio = 0.0;       // (count_a / N) / (count_b / N)
  double half_width = 0.0;  // relative standard error of the ratio
  double threshold = 0.0;   // e^eps (1 + 4 half_width)
  bool violation = false;   // either direction exceeds the threshold
};

struct AuditPairReport {
  std::string name;
  std::vector<AuditBin> bins;
  int excluded_bins = 0;
  double max_ratio = 1.0;        // max over audited bins and both directions
  double max_ratio_excess = 0.0; // max of ratio / threshold
  bool pass = true;
};

struct AuditReport {
  AuditConfig config;
  std::vector<AuditPairReport> pairs;
  bool pass = true;
  std::vector<std::string> notes;
};

// Bin of the output direction u of H = u u^*: band of t = |u_1|^2 (equal
// area on the Bloch sphere) and the sign of the relative phase.
int audit_bin(const ComplexVector& u, int bins);

AuditReport audit_privacy(const AuditConfig& cfg, std::span<const NeighborPair> pairs);

Json audit_report_to_json(const AuditReport& r, bool include_bins = true);
std::string audit_report_to_csv(const AuditReport& r);

}  // namespace orbitdp

#endif  // ORBITDP_HARNESS_H_
