#include "orbitdp/sampler.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace orbitdp {
namespace {

constexpr int kReorthonormalizeEvery = 256;
constexpr double kMinStep = 1e-4;
constexpr double kMaxStep = std::numbers::pi;
constexpr std::uint64_t kExactMinAttemptsForRate = 10000;
constexpr std::uint64_t kExactMaxAttemptsPerDraw = 200000;
constexpr double kExactMinAcceptance = 1e-4;

// Truncated exponential on [0, 1] with density proportional to exp(-rate t).
double truncated_exponential(double rate, Rng& rng) {
  const double u = uniform_open(rng);
  if (rate < 1e-12) return u;
  return -std::log1p(u * std::expm1(-rate)) / rate;
}

// Quadratic form v^* M v for Hermitian M.
double quadratic_form(const ComplexMatrix& m, const ComplexVector& v) {
  return v.dot(m * v).real();
}

class OrbitChain {
 public:
  OrbitChain(const ComplexMatrix& m, const Spectrum& lambda, double coeff,
             ComplexMatrix u0, double step)
      : m_(m), lambda_(lambda.values().begin(), lambda.values().end()),
        coeff_(coeff), u_(std::move(u0)), step_(step),
        column_scores_(lambda_.size(), 0.0) {
    const int d = static_cast<int>(lambda_.size());
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        if (lambda_[p] != lambda_[q]) pairs_.emplace_back(p, q);
      }
    }
    refresh();
  }

  bool has_moves() const { return !pairs_.empty(); }

  bool step(Rng& rng) {
    const auto [p, q] = pairs_[static_cast<std::size_t>(
        std::uniform_int_distribution<std::size_t>(0, pairs_.size() - 1)(rng))];
    const double theta = step_ * standard_normal(rng);
    const double phi = uniform_phase(rng);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex e_minus = std::polar(1.0, -phi);
    const Complex e_plus = std::polar(1.0, phi);

    ComplexVector new_p = c * u_.col(p) + (e_minus * s) * u_.col(q);
    ComplexVector new_q = (-e_plus * s) * u_.col(p) + c * u_.col(q);

    const double qp = lambda_[p] != 0.0 ? quadratic_form(m_, new_p) : 0.0;
    const double qq = lambda_[q] != 0.0 ? quadratic_form(m_, new_q) : 0.0;
    const double delta = lambda_[p] * (qp - column_scores_[p]) +
                         lambda_[q] * (qq - column_scores_[q]);
    const double log_ratio = coeff_ * delta;
    const bool accept = log_ratio >= 0.0 || std::log(uniform_open(rng)) < log_ratio;
    if (accept) {
      u_.col(p) = std::move(new_p);
      u_.col(q) = std::move(new_q);
      column_scores_[p] = qp;
      column_scores_[q] = qq;
      score_ += delta;
    }
    if (++since_refresh_ >= kReorthonormalizeEvery) refresh();
    return accept;
  }

  double score() const { return score_; }
  double step_size() const { return step_; }
  void set_step_size(double s) { step_ = std::clamp(s, kMinStep, kMaxStep); }

  ComplexMatrix final_unitary() {
    refresh();
    return u_;
  }

 private:
  void refresh() {
    reorthonormalize(u_);
    score_ = 0.0;
    for (std::size_t j = 0; j < lambda_.size(); ++j) {
      column_scores_[j] =
          lambda_[j] != 0.0 ? quadratic_form(m_, u_.col(static_cast<Eigen::Index>(j))) : 0.0;
      score_ += lambda_[j] * column_scores_[j];
    }
    since_refresh_ = 0;
  }

  const ComplexMatrix& m_;
  std::vector<double> lambda_;
  double coeff_;
  ComplexMatrix u_;
  double step_;
  std::vector<double> column_scores_;
  std::vector<std::pair<int, int>> pairs_;
  double score_ = 0.0;
  int since_refresh_ = 0;
};

struct ChainRun {
  ComplexMatrix final_u;
  std::vector<double> trace;
  double acceptance_rate = 1.0;
  double step_size = 0.0;
};

// Runs burn-in (with optional adaptation) and then the fixed kernel. The
// callback sees every post-burn-in step index and the chain.
template <typename OnStep>
ChainRun run_chain(const HermitianMatrix& m, const Spectrum& lambda, double coeff,
                   const SamplerConfig& cfg, int post_steps, Rng& rng, OnStep&& on_step,
                   bool keep_trace) {
  OrbitChain chain(m.matrix(), lambda, coeff, haar_unitary(m.dim(), rng), cfg.step_size);
  ChainRun run;
  if (!chain.has_moves()) {
    run.final_u = chain.final_unitary();
    if (keep_trace) run.trace.assign(static_cast<std::size_t>(post_steps), chain.score());
    run.step_size = cfg.step_size;
    return run;
  }
  double log_step = std::log(cfg.step_size);
  for (int t = 0; t < cfg.burn_in; ++t) {
    const bool accepted = chain.step(rng);
    if (cfg.adapt_step) {
      const double gain = 1.0 / std::sqrt(static_cast<double>(t) + 10.0);
      log_step += gain * ((accepted ? 1.0 : 0.0) - cfg.target_acceptance);
      log_step = std::clamp(log_step, std::log(kMinStep), std::log(kMaxStep));
      chain.set_step_size(std::exp(log_step));
    }
  }
  std::uint64_t accepted = 0;
  if (keep_trace) run.trace.reserve(static_cast<std::size_t>(post_steps));
  for (int t = 0; t < post_steps; ++t) {
    if (chain.step(rng)) ++accepted;
    if (keep_trace) run.trace.push_back(chain.score());
    on_step(t, chain);
  }
  run.acceptance_rate =
      post_steps > 0 ? static_cast<double>(accepted) / static_cast<double>(post_steps) : 1.0;
  run.step_size = chain.step_size();
  run.final_u = chain.final_unitary();
  return run;
}

bool is_rank1_target(const Spectrum& lambda) {
  for (int i = 1; i < lambda.dim(); ++i) {
    if (lambda[i] != 0.0) return false;
  }
  return lambda[0] > 0.0;
}

bool constant_score_target(const Spectrum& lambda) {
  for (int i = 1; i < lambda.dim(); ++i) {
    if (lambda[i] != lambda[0]) return false;
  }
  return true;
}

void check_spectrum_conservation(const OrbitPoint& p, ChainDiagnostics& diag) {
  const auto values = eigenvalues(p.materialize());
  double worst = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    worst = std::max(worst, std::abs(values[static_cast<std::size_t>(i)] - p.spectrum()[i]));
  }
  if (worst > 1e-8 * std::max(1.0, p.spectrum().top())) {
    diag.flags.push_back("spectrum_drift");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(SamplerMethod method) {
  switch (method) {
    case SamplerMethod::kAuto: return "auto";
    case SamplerMethod::kMcmc: return "mcmc";
    case SamplerMethod::kExactRank1: return "exact_rank1";
  }
  return "auto";
}

SamplerMethod sampler_method_from_string(const std::string& name) {
  if (name == "auto") return SamplerMethod::kAuto;
  if (name == "mcmc") return SamplerMethod::kMcmc;
  if (name == "exact_rank1" || name == "exact") return SamplerMethod::kExactRank1;
  throw InvalidInputError("unknown sampler method '" + name + "'");
}

void SamplerConfig::validate() const {
  if (chain_length < 1) throw InvalidInputError("SamplerConfig: chain_length must be positive");
  if (burn_in < 1) throw InvalidInputError("SamplerConfig: burn_in must be positive");
  if (burn_in >= chain_length) throw InvalidInputError("SamplerConfig: burn_in must be < chain_length");
  if (!(step_size > 0.0 && step_size <= std::numbers::pi)) {
    throw InvalidInputError("SamplerConfig: step_size must lie in (0, pi]");
  }
  if (num_chains < 1) throw InvalidInputError("SamplerConfig: num_chains must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw InvalidInputError("SamplerConfig: target_acceptance must lie in (0, 1)");
  }
}

Json sampler_config_to_json(const SamplerConfig& cfg) {
  Json j;
  j["chain_length"] = cfg.chain_length;
  j["burn_in"] = cfg.burn_in;
  j["step_size"] = cfg.step_size;
  j["diagnostics_on"] = cfg.diagnostics_on;
  j["num_chains"] = cfg.num_chains;
  j["adapt_step"] = cfg.adapt_step;
  j["target_acceptance"] = cfg.target_acceptance;
  j["method"] = to_string(cfg.method);
  return j;
}

SamplerConfig sampler_config_from_json(const Json& j) {
  SamplerConfig cfg;
  if (!j.is_object()) throw InvalidInputError("sampler config must be a JSON object");
  if (j.contains("chain_length")) cfg.chain_length = j.at("chain_length").get<int>();
  if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<int>();
  if (j.contains("step_size")) cfg.step_size = j.at("step_size").get<double>();
  if (j.contains("diagnostics_on")) cfg.diagnostics_on = j.at("diagnostics_on").get<bool>();
  if (j.contains("num_chains")) cfg.num_chains = j.at("num_chains").get<int>();
  if (j.contains("adapt_step")) cfg.adapt_step = j.at("adapt_step").get<bool>();
  if (j.contains("target_acceptance")) cfg.target_acceptance = j.at("target_acceptance").get<double>();
  if (j.contains("method")) cfg.method = sampler_method_from_string(j.at("method").get<std::string>());
  cfg.validate();
  return cfg;
}

Json diagnostics_to_json(const ChainDiagnostics& d, std::size_t max_trace_points) {
  Json j;
  j["method"] = d.method;
  j["acceptance_rate"] = d.acceptance_rate;
  j["split_rhat"] = d.split_rhat;
  j["step_size"] = d.step_size;
  if (std::isnan(d.envelope_acceptance)) {
    j["envelope_acceptance"] = nullptr;
  } else {
    j["envelope_acceptance"] = d.envelope_acceptance;
  }
  j["flags"] = d.flags;
  Json trace = Json::array();
  const std::size_t n = d.utility_trace.size();
  if (n > 0 && max_trace_points > 0) {
    const std::size_t stride = (n + max_trace_points - 1) / max_trace_points;
    for (std::size_t i = 0; i < n; i += stride) trace.push_back(d.utility_trace[i]);
  }
  j["utility_trace"] = std::move(trace);
  return j;
}

// ---------------------------------------------------------------------------

ComplexMatrix haar_unitary(int d, Rng& rng) {
  if (d < 1) throw InvalidInputError("haar_unitary: d must be >= 1");
  ComplexMatrix g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = complex_normal(rng);
  }
  reorthonormalize(g);
  return g;
}

OrbitPoint haar_orbit_point(const Spectrum& lambda, Rng& rng) {
  return OrbitPoint(haar_unitary(lambda.dim(), rng), lambda);
}

ComplexMatrix unitary_with_first_column(const ComplexVector& u) {
  const auto d = u.size();
  const double norm = u.norm();
  if (std::abs(norm - 1.0) > 1e-10) {
    throw InvalidInputError("unitary_with_first_column: vector is not unit norm");
  }
  const double mag0 = std::abs(u(0));
  const Complex alpha = mag0 > 0.0 ? u(0) / mag0 : Complex(1.0, 0.0);
  ComplexVector v = u;
  v(0) -= alpha;
  ComplexMatrix q = ComplexMatrix::Identity(d, d);
  const double vv = v.squaredNorm();
  if (vv > 1e-28) q -= (2.0 / vv) * v * v.adjoint();
  // q is a Hermitian reflector with q u = alpha e_0, hence q e_0 = u / alpha.
  q.col(0) *= alpha;
  reorthonormalize(q);
  return q;
}

Rank1ExactSampler::Rank1ExactSampler(const HermitianMatrix& m, double coeff) {
  if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
    throw InvalidInputError("Rank1ExactSampler: coefficient must be finite and >= 0");
  }
  auto eig = eig_hermitian(m);
  basis_ = std::move(eig.vectors);
  rates_.assign(static_cast<std::size_t>(m.dim()), 0.0);
  for (int i = 1; i < m.dim(); ++i) {
    rates_[static_cast<std::size_t>(i)] = coeff * (eig.values[0] - eig.values[i]);
  }
}

std::optional<ComplexVector> Rank1ExactSampler::sample(Rng& rng) {
  if (failed_) return std::nullopt;
  const int d = dim();
  std::vector<double> t(static_cast<std::size_t>(d), 0.0);
  for (std::uint64_t attempt = 0; attempt < kExactMaxAttemptsPerDraw; ++attempt) {
    ++attempts_;
    double total = 0.0;
    for (int i = 1; i < d; ++i) {
      t[static_cast<std::size_t>(i)] = truncated_exponential(rates_[static_cast<std::size_t>(i)], rng);
      total += t[static_cast<std::size_t>(i)];
    }
    if (total <= 1.0) {
      ++accepted_;
      t[0] = 1.0 - total;
      ComplexVector w(d);
      for (int i = 0; i < d; ++i) {
        w(i) = std::polar(std::sqrt(t[static_cast<std::size_t>(i)]), uniform_phase(rng));
      }
      ComplexVector u = basis_ * w;
      u.normalize();
      return u;
    }
    if (attempts_ >= kExactMinAttemptsForRate && acceptance_rate() < kExactMinAcceptance) {
      failed_ = true;
      return std::nullopt;
    }
  }
  failed_ = true;
  return std::nullopt;
}

double Rank1ExactSampler::acceptance_rate() const {
  return attempts_ == 0 ? 1.0
                        : static_cast<double>(accepted_) / static_cast<double>(attempts_);
}

Rank1Draw sample_rank1_exact(const HermitianMatrix& m, double coeff, Rng& rng,
                             const SamplerConfig& fallback_cfg) {
  Rank1ExactSampler sampler(m, coeff);
  if (auto u = sampler.sample(rng)) {
    return {std::move(*u), sampler.acceptance_rate(), false};
  }
  std::vector<double> unit(static_cast<std::size_t>(m.dim()), 0.0);
  unit[0] = 1.0;
  auto fallback = sample_orbit_mcmc(m, Spectrum(unit, 1), coeff, fallback_cfg, rng);
  return {fallback.point.unitary().col(0), sampler.acceptance_rate(), true};
}

OrbitSample sample_orbit_mcmc(const HermitianMatrix& m, const Spectrum& lambda,
                              double coeff, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  if (m.dim() != lambda.dim()) throw InvalidInputError("sample_orbit_mcmc: dimension mismatch");
  if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
    throw InvalidInputError("sample_orbit_mcmc: coefficient must be finite and >= 0");
  }
  ChainDiagnostics diag;
  diag.method = "mcmc";
  diag.step_size = cfg.step_size;
  if (lambda.is_zero()) {
    diag.method = "zero_spectrum";
    return {OrbitPoint(ComplexMatrix::Identity(lambda.dim(), lambda.dim()), lambda), diag};
  }
  if (constant_score_target(lambda)) {
    // H = lambda_1 I for every U.
    diag.method = "degenerate_spectrum";
    return {OrbitPoint(ComplexMatrix::Identity(lambda.dim(), lambda.dim()), lambda), diag};
  }

  const int post_steps = cfg.chain_length - cfg.burn_in;
  const int chains = cfg.diagnostics_on ? cfg.num_chains : 1;
  const std::uint64_t base = rng();
  std::vector<ChainRun> runs;
  runs.reserve(static_cast<std::size_t>(chains));
  for (int c = 0; c < chains; ++c) {
    Rng chain_rng(derive_seed(base, static_cast<std::uint64_t>(c)));
    runs.push_back(run_chain(m, lambda, coeff, cfg, post_steps, chain_rng,
                             [](int, const OrbitChain&) {}, true));
  }

  std::vector<std::vector<double>> traces;
  traces.reserve(runs.size());
  double acceptance = 0.0;
  for (auto& r : runs) {
    acceptance += r.acceptance_rate;
    traces.push_back(r.trace);
  }
  diag.acceptance_rate = acceptance / static_cast<double>(runs.size());
  diag.split_rhat = split_rhat(traces);
  diag.step_size = runs.front().step_size;
  diag.utility_trace = std::move(runs.front().trace);

  OrbitPoint point(std::move(runs.front().final_u), lambda);
  if (cfg.diagnostics_on) {
    if (diag.split_rhat > 1.1) diag.flags.push_back("rhat_above_1.1");
    check_spectrum_conservation(point, diag);
  }
  // High acceptance at the largest step means a nearly flat target, not a
  // stuck chain.
  const bool step_saturated = diag.step_size >= std::numbers::pi * (1.0 - 1e-9);
  if (coeff > 0.0 &&
      (diag.acceptance_rate < 0.1 || (diag.acceptance_rate > 0.9 && !step_saturated))) {
    diag.flags.push_back("acceptance_out_of_range");
  }
  return {std::move(point), std::move(diag)};
}

std::vector<OrbitPoint> mcmc_thinned_samples(const HermitianMatrix& m,
                                             const Spectrum& lambda, double coeff,
                                             const SamplerConfig& cfg, int thin,
                                             int count, Rng& rng) {
  cfg.validate();
  if (thin < 1 || count < 1) throw InvalidInputError("mcmc_thinned_samples: thin and count must be positive");
  if (m.dim() != lambda.dim()) throw InvalidInputError("mcmc_thinned_samples: dimension mismatch");
  std::vector<OrbitPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  if (lambda.is_zero() || constant_score_target(lambda)) {
    for (int i = 0; i < count; ++i) out.push_back(haar_orbit_point(lambda, rng));
    return out;
  }
  const int post_steps = thin * count;
  std::vector<ComplexMatrix> states;
  states.reserve(static_cast<std::size_t>(count));
  auto on_step = [&states, thin](int t, OrbitChain& chain) {
    if ((t + 1) % thin == 0) states.push_back(chain.final_unitary());
  };
  run_chain(m, lambda, coeff, cfg, post_steps, rng, on_step, false);
  for (auto& u : states) out.emplace_back(std::move(u), lambda);
  return out;
}

OrbitSample sample_orbit(const HermitianMatrix& m, const Spectrum& lambda,
                         double coeff, const SamplerConfig& cfg, Rng& rng) {
  const bool rank1 = is_rank1_target(lambda);
  const bool use_exact = cfg.method == SamplerMethod::kExactRank1 ||
                         (cfg.method == SamplerMethod::kAuto && rank1);
  if (!use_exact) return sample_orbit_mcmc(m, lambda, coeff, cfg, rng);
  if (!rank1) {
    throw InvalidInputError("sample_orbit: exact sampler requires a rank-1 target spectrum");
  }
  if (m.dim() != lambda.dim()) throw InvalidInputError("sample_orbit: dimension mismatch");
  // <M, lambda_1 u u^*> = lambda_1 u^* M u, so the sphere coefficient is coeff * lambda_1.
  Rank1ExactSampler sampler(m, coeff * lambda[0]);
  ChainDiagnostics diag;
  diag.method = "exact_rank1";
  if (auto u = sampler.sample(rng)) {
    diag.envelope_acceptance = sampler.acceptance_rate();
    return {OrbitPoint(unitary_with_first_column(*u), lambda), std::move(diag)};
  }
  auto fallback = sample_orbit_mcmc(m, lambda, coeff, cfg, rng);
  fallback.diagnostics.envelope_acceptance = sampler.acceptance_rate();
  fallback.diagnostics.method = "exact_rank1_fallback_mcmc";
  fallback.diagnostics.flags.push_back("exact_envelope_fallback");
  return fallback;
}

double split_rhat(std::span<const std::vector<double>> chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    const std::size_t n = c.size() / 2;
    if (n < 2) continue;
    halves.emplace_back(c.data(), n);
    halves.emplace_back(c.data() + (c.size() - n), n);
  }
  if (halves.size() < 2) return 1.0;
  const std::size_t n = std::min_element(halves.begin(), halves.end(), [](auto a, auto b) {
                           return a.size() < b.size();
                         })->size();
  const double nd = static_cast<double>(n);
  std::vector<double> means;
  std::vector<double> vars;
  for (auto h : halves) {
    h = h.first(n);
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / nd;
    double ss = 0.0;
    for (double x : h) ss += (x - mean) * (x - mean);
    means.push_back(mean);
    vars.push_back(ss / (nd - 1.0));
  }
  const double md = static_cast<double>(means.size());
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / md;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (md - 1.0);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / md;
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  // Values below 1 are sampling noise of the between-chain estimate.
  return std::max(1.0, std::sqrt(var_plus / w));
}

double rank1_marginal(const OrbitPoint& p) {
  if (p.dim() != 2 || p.spectrum().rank() != 1 || !(p.spectrum()[0] > 0.0)) {
    throw InvalidInputError("rank1_marginal: requires a d = 2 rank-1 orbit point");
  }
  const Complex u0 = p.unitary()(0, 0);
  return std::norm(u0);
}

double tv_distance_on_marginal(std::span<const double> t_values,
                               const std::function<double(double)>& oracle_density,
                               int bins) {
  if (bins < 1) throw InvalidInputError("tv_distance: bins must be positive");
  if (t_values.empty()) throw InvalidInputError("tv_distance: no samples");
  std::vector<double> empirical(static_cast<std::size_t>(bins), 0.0);
  for (double t : t_values) {
    auto b = static_cast<int>(std::floor(t * bins));
    b = std::clamp(b, 0, bins - 1);
    empirical[static_cast<std::size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(t_values.size());
  for (double& e : empirical) e /= n;

  // Composite Simpson per bin.
  constexpr int kPanels = 32;
  std::vector<double> oracle(static_cast<std::size_t>(bins), 0.0);
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins;
    const double h = 1.0 / (static_cast<double>(bins) * kPanels);
    double s = oracle_density(lo) + oracle_density(lo + kPanels * h);
    for (int i = 1; i < kPanels; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * oracle_density(lo + i * h);
    oracle[static_cast<std::size_t>(b)] = s * h / 3.0;
    total += oracle[static_cast<std::size_t>(b)];
  }
  if (!(total > 0.0)) throw InvalidInputError("tv_distance: oracle density integrates to zero");
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) {
    tv += std::abs(empirical[static_cast<std::size_t>(b)] - oracle[static_cast<std::size_t>(b)] / total);
  }
  return 0.5 * tv;
}

double tv_distance_diagnostic(std::span<const OrbitPoint> samples,
                              const std::function<double(double)>& oracle_density,
                              int bins) {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& p : samples) t.push_back(rank1_marginal(p));
  return tv_distance_on_marginal(t, oracle_density, bins);
}

}  // namespace orbitdp
