#include "orbitdp/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <utility>

namespace orbitdp {
namespace {

void require_epsilon(double epsilon, const char* what) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInputError(std::string(what) + ": epsilon must be positive and finite");
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int resolve_rank(const Spectrum& lambda, int k) {
  if (k < 0) return lambda.rank();
  if (k < 1 || k > lambda.dim()) throw InvalidInputError("k must satisfy 1 <= k <= d");
  return k;
}

Spectrum spectrum_of(const HermitianMatrix& m) { return Spectrum(eigenvalues(m)); }

void finish_transcript(MechanismTranscript& t, const HermitianMatrix& m) {
  const auto h = t.output.materialize();
  t.utility = frobenius_inner(m, h);
  t.optimum = schur_horn_optimum(spectrum_of(m), t.target_spectrum);
  t.utility_gap = t.optimum - t.utility;
  const double fe = frobenius_distance(m, h);
  t.frobenius_error = fe * fe;
  if (t.budget.epsilon >= 1.0) t.warnings.push_back("epsilon_outside_unit_interval");
}

OrbitPoint zero_output(const Spectrum& lambda) {
  const int d = lambda.dim();
  return OrbitPoint(ComplexMatrix::Identity(d, d), lambda);
}

}  // namespace

// ---------------------------------------------------------------------------
// PrivacyBudget

PrivacyBudget PrivacyBudget::single(double epsilon, std::string stage) {
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.stages.push_back({std::move(stage), 1.0});
  b.validate();
  return b;
}

PrivacyBudget PrivacyBudget::split(double epsilon, double eigen_fraction) {
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.stages.push_back({"eigenvalues", eigen_fraction});
  b.stages.push_back({"orbit_sampling", 1.0 - eigen_fraction});
  b.validate();
  return b;
}

void PrivacyBudget::validate() const {
  require_epsilon(epsilon, "PrivacyBudget");
  if (stages.empty()) throw InvalidInputError("PrivacyBudget: no stages");
  double sum = 0.0;
  for (const auto& s : stages) {
    if (!(s.fraction > 0.0 && s.fraction <= 1.0)) {
      throw InvalidInputError("PrivacyBudget: stage fraction must lie in (0, 1]");
    }
    sum += s.fraction;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidInputError("PrivacyBudget: fractions must sum to 1");
}

double PrivacyBudget::stage_epsilon(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s.fraction * epsilon;
  }
  throw InvalidInputError("PrivacyBudget: unknown stage '" + name + "'");
}

double PrivacyBudget::total_spent() const {
  double total = 0.0;
  for (const auto& s : stages) total += s.fraction * epsilon;
  return total;
}

Json budget_to_json(const PrivacyBudget& b) {
  Json stages = Json::array();
  for (const auto& s : b.stages) {
    Json j;
    j["name"] = s.name;
    j["fraction"] = s.fraction;
    j["epsilon"] = s.fraction * b.epsilon;
    stages.push_back(std::move(j));
  }
  Json out;
  out["epsilon"] = b.epsilon;
  out["stages"] = std::move(stages);
  return out;
}

// ---------------------------------------------------------------------------
// Laplace stage

double laplace_noise(double scale_b, Rng& rng) {
  if (!(scale_b > 0.0) || !std::isfinite(scale_b)) {
    throw InvalidInputError("laplace_noise: scale must be positive and finite");
  }
  const double u = uniform_open(rng) - 0.5;
  const double magnitude = -scale_b * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

std::vector<double> privatize_eigenvalues(std::span<const double> values, double epsilon,
                                          Rng& rng) {
  require_epsilon(epsilon, "privatize_eigenvalues");
  const double b = 2.0 / epsilon;
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v += laplace_noise(b, rng);
  return out;
}

std::vector<double> privatize_eigenvalues(const Spectrum& spectrum, double epsilon, Rng& rng) {
  return privatize_eigenvalues(spectrum.values(), epsilon, rng);
}

Spectrum sort_clip_eigenvalues(std::span<const double> noisy, int k, int dim) {
  if (dim < 0) dim = static_cast<int>(noisy.size());
  if (k < 1 || static_cast<std::size_t>(k) > noisy.size() || k > dim) {
    throw InvalidInputError("sort_clip_eigenvalues: need 1 <= k <= len(noisy) and k <= dim");
  }
  std::vector<double> sorted(noisy.begin(), noisy.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw InvalidInputError("sort_clip_eigenvalues: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> top(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) top[static_cast<std::size_t>(i)] = std::max(0.0, sorted[static_cast<std::size_t>(i)]);
  return Spectrum::orbit_target(top, dim);
}

double sensitivity_bound(const Spectrum& lambda) {
  if (!lambda.is_orbit_target()) {
    throw InvalidInputError("sensitivity_bound: not a valid orbit spectrum");
  }
  return lambda.top();
}

// ---------------------------------------------------------------------------
// Exponential target and prepared sampler

double ExponentialTarget::log_density(const OrbitPoint& h) const {
  return coeff * frobenius_inner(m, h.materialize());
}

ExponentialTarget algorithm1_target(const HermitianMatrix& m, const Spectrum& lambda,
                                    double epsilon) {
  require_epsilon(epsilon, "algorithm1_target");
  if (m.dim() != lambda.dim()) throw InvalidInputError("algorithm1_target: dimension mismatch");
  const double sens = sensitivity_bound(lambda);
  const double coeff = sens > 0.0 ? epsilon / (4.0 * sens) : 0.0;
  return {m, lambda, coeff, sens};
}

OrbitMechanism::OrbitMechanism(ExponentialTarget target, SamplerConfig cfg)
    : target_(std::move(target)), cfg_(cfg) {
  cfg_.validate();
  if (target_.m.dim() != target_.lambda.dim()) {
    throw InvalidInputError("OrbitMechanism: dimension mismatch");
  }
  const auto& l = target_.lambda;
  bool rank1 = l.top() > 0.0;
  for (int i = 1; i < l.dim() && rank1; ++i) rank1 = l[i] == 0.0;
  if (cfg_.method == SamplerMethod::kExactRank1 && !rank1) {
    throw InvalidInputError("OrbitMechanism: exact sampler requires a rank-1 target");
  }
  if (rank1 && cfg_.method != SamplerMethod::kMcmc) {
    exact_.emplace(target_.m, target_.coeff * l.top());
  }
}

OrbitSample OrbitMechanism::sample(Rng& rng) {
  if (!exact_) return sample_orbit_mcmc(target_.m, target_.lambda, target_.coeff, cfg_, rng);
  if (auto u = exact_->sample(rng)) {
    ChainDiagnostics diag;
    diag.method = "exact_rank1";
    diag.envelope_acceptance = exact_->acceptance_rate();
    return {OrbitPoint(unitary_with_first_column(*u), target_.lambda), std::move(diag)};
  }
  auto fallback = sample_orbit_mcmc(target_.m, target_.lambda, target_.coeff, cfg_, rng);
  fallback.diagnostics.method = "exact_rank1_fallback_mcmc";
  fallback.diagnostics.envelope_acceptance = exact_->acceptance_rate();
  fallback.diagnostics.flags.push_back("exact_envelope_fallback");
  return fallback;
}

ComplexVector OrbitMechanism::sample_direction(Rng& rng) {
  if (!exact_) {
    auto s = sample_orbit_mcmc(target_.m, target_.lambda, target_.coeff, cfg_, rng);
    return s.point.unitary().col(0);
  }
  if (auto u = exact_->sample(rng)) return std::move(*u);
  return sample(rng).point.unitary().col(0);
}

// ---------------------------------------------------------------------------
// Transcripts

Json transcript_to_json(const MechanismTranscript& t) {
  Json j;
  j["seed"] = t.seed;
  j["mechanism"] = t.mechanism;
  j["budget"] = budget_to_json(t.budget);
  j["dim"] = t.output.dim();
  j["k"] = t.k;
  j["coefficient"] = t.coefficient;
  j["sensitivity"] = t.sensitivity;
  if (t.noisy_eigenvalues) {
    j["noisy_eigenvalues"] = *t.noisy_eigenvalues;
  } else {
    j["noisy_eigenvalues"] = nullptr;
  }
  j["target_spectrum"] = spectrum_to_json(t.target_spectrum);
  j["utility"] = t.utility;
  j["optimum"] = t.optimum;
  j["utility_gap"] = t.utility_gap;
  j["frobenius_error"] = t.frobenius_error;
  j["diagnostics"] = diagnostics_to_json(t.diagnostics);
  j["flags"] = t.flags;
  j["warnings"] = t.warnings;
  j["output"] = orbit_point_to_json(t.output);
  j["output_matrix"] = hermitian_to_json(t.output.materialize());
  return j;
}

std::string transcript_to_csv(const MechanismTranscript& t) {
  std::ostringstream out;
  out << "seed,mechanism,epsilon,utility,optimum,utility_gap,frob_err_sq";
  for (int i = 1; i <= t.k; ++i) out << ",lambda_tilde_" << i;
  out << ",acceptance_rate,rhat,flags\n";
  out << t.seed << ',' << t.mechanism << ',' << fmt(t.budget.epsilon) << ','
      << fmt(t.utility) << ',' << fmt(t.optimum) << ',' << fmt(t.utility_gap) << ','
      << fmt(t.frobenius_error);
  for (int i = 0; i < t.k; ++i) out << ',' << fmt(t.target_spectrum[i]);
  out << ',' << fmt(t.diagnostics.acceptance_rate) << ',' << fmt(t.diagnostics.split_rhat) << ',';
  std::vector<std::string> all = t.flags;
  all.insert(all.end(), t.diagnostics.flags.begin(), t.diagnostics.flags.end());
  for (std::size_t i = 0; i < all.size(); ++i) out << (i ? ";" : "") << all[i];
  out << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Mechanisms

MechanismTranscript algorithm1(const HermitianMatrix& m, const Spectrum& lambda,
                               double epsilon, const SamplerConfig& cfg,
                               std::uint64_t seed) {
  require_epsilon(epsilon, "algorithm1");
  cfg.validate();
  if (m.dim() != lambda.dim()) throw InvalidInputError("algorithm1: dimension mismatch");
  if (!lambda.is_orbit_target()) throw InvalidInputError("algorithm1: lambda must be a non-negative orbit spectrum");
  if (!m.is_psd()) throw InvalidInputError("algorithm1: input matrix must be PSD");

  MechanismTranscript t;
  t.seed = seed;
  t.mechanism = "algorithm1";
  t.budget = PrivacyBudget::single(epsilon);
  t.k = lambda.rank();
  t.target_spectrum = lambda;

  Rng rng(seed);
  auto target = algorithm1_target(m, lambda, epsilon);
  t.coefficient = target.coeff;
  t.sensitivity = target.sensitivity;
  if (lambda.is_zero()) {
    t.output = zero_output(lambda);
    t.diagnostics.method = "zero_spectrum";
  } else {
    OrbitMechanism mech(std::move(target), cfg);
    auto s = mech.sample(rng);
    t.output = std::move(s.point);
    t.diagnostics = std::move(s.diagnostics);
  }
  finish_transcript(t, m);
  return t;
}

MechanismTranscript algorithm2(const HermitianMatrix& m, int k, double epsilon,
                               const SamplerConfig& cfg, std::uint64_t seed) {
  require_epsilon(epsilon, "algorithm2");
  cfg.validate();
  const int d = m.dim();
  if (k < 1 || k > d) throw InvalidInputError("algorithm2: need 1 <= k <= d");
  if (!m.is_psd()) throw InvalidInputError("algorithm2: input matrix must be PSD");

  MechanismTranscript t;
  t.seed = seed;
  t.mechanism = "algorithm2";
  t.budget = PrivacyBudget::split(epsilon, 0.5);
  t.k = k;
  if (std::abs(t.budget.total_spent() - epsilon) > 1e-12 * epsilon) {
    throw std::logic_error("algorithm2: budget stages do not compose to epsilon");
  }

  Rng rng(seed);
  const auto gamma = eigenvalues(m);
  const std::span<const double> top(gamma.data(), static_cast<std::size_t>(k));
  // Lap(2 / (epsilon / 2)) = Lap(4 / epsilon).
  auto noisy = privatize_eigenvalues(top, t.budget.stage_epsilon("eigenvalues"), rng);
  t.target_spectrum = sort_clip_eigenvalues(noisy, k, d);
  t.noisy_eigenvalues = std::move(noisy);

  if (t.target_spectrum.is_zero()) {
    t.output = zero_output(t.target_spectrum);
    t.diagnostics.method = "zero_spectrum";
    t.flags.push_back("zero_private_spectrum");
  } else {
    // (epsilon / 2) / (4 lambda~_1) = epsilon / (8 lambda~_1).
    auto target = algorithm1_target(m, t.target_spectrum, t.budget.stage_epsilon("orbit_sampling"));
    t.coefficient = target.coeff;
    t.sensitivity = target.sensitivity;
    OrbitMechanism mech(std::move(target), cfg);
    auto s = mech.sample(rng);
    t.output = std::move(s.point);
    t.diagnostics = std::move(s.diagnostics);
  }
  finish_transcript(t, m);
  return t;
}

MechanismTranscript algorithm2(const Dataset& dataset, int k, double epsilon,
                               const SamplerConfig& cfg, std::uint64_t seed) {
  return algorithm2(dataset.covariance(), k, epsilon, cfg, seed);
}

// ---------------------------------------------------------------------------
// Tail bounds

double log_utility_tail_bound(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                              double t, int k) {
  require_epsilon(epsilon, "utility_tail_bound");
  if (!(t > 0.0)) throw InvalidInputError("utility_tail_bound: t must be positive");
  if (gamma.dim() != lambda.dim()) throw InvalidInputError("utility_tail_bound: dimension mismatch");
  const double l1 = lambda.top();
  if (l1 <= 0.0) return -std::numeric_limits<double>::infinity();
  const double d = gamma.dim();
  const double rank = resolve_rank(lambda, k);
  const double big_gamma = gamma.sum();
  return 2.0 * d * rank * std::log1p(16.0 * l1 * big_gamma / t) - epsilon * t / (4.0 * l1);
}

double utility_tail_bound(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                          double t, int k) {
  return std::exp(log_utility_tail_bound(gamma, lambda, epsilon, t, k));
}

double utility_tail_quantile(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                             double beta, int k) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInputError("utility_tail_quantile: beta must lie in (0, 1)");
  if (lambda.top() <= 0.0) return 0.0;
  const double log_beta = std::log(beta);
  auto f = [&](double t) { return log_utility_tail_bound(gamma, lambda, epsilon, t, k) - log_beta; };
  double lo = 0.0;
  double hi = lambda.top();
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid > 0.0 && f(mid) > 0.0 ? lo : hi) = mid;
  }
  return hi;
}

double utility_tau(const Spectrum& gamma, const Spectrum& lambda, double epsilon,
                   double beta, int k) {
  require_epsilon(epsilon, "utility_tau");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInputError("utility_tau: beta must lie in (0, 1)");
  if (gamma.dim() != lambda.dim()) throw InvalidInputError("utility_tau: dimension mismatch");
  const double l1 = lambda.top();
  if (l1 <= 0.0) return 0.0;
  const double d = gamma.dim();
  const double rank = resolve_rank(lambda, k);
  const double big_gamma = gamma.sum();
  // log(e + e^L) with L = 4dk log(2 + 8 Gamma) - log(beta).
  const double big_l = 4.0 * d * rank * std::log(2.0 + 8.0 * big_gamma) - std::log(beta);
  const double log_term = std::max(1.0, big_l) + std::log1p(std::exp(-std::abs(big_l - 1.0)));
  return 2.0 * l1 / epsilon * log_term + l1;
}

}  // namespace orbitdp
