#include "orbitdp/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

namespace orbitdp {
namespace {

constexpr std::uint64_t kInstanceStream = 0xffffffffULL;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require_dims(int d, int k, const char* what) {
  if (d < 1) throw InvalidInputError(std::string(what) + ": d must be positive");
  if (k < 1 || k > d) throw InvalidInputError(std::string(what) + ": need 1 <= k <= d");
}

void require_top(double top_eig, const char* what) {
  if (!(top_eig >= 0.0) || !std::isfinite(top_eig)) {
    throw InvalidInputError(std::string(what) + ": top_eig must be finite and >= 0");
  }
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generators

HermitianMatrix gen_projection_instance(int d, int k, double top_eig, Rng& rng) {
  require_dims(d, k, "gen_projection_instance");
  require_top(top_eig, "gen_projection_instance");
  const auto u = haar_unitary(d, rng);
  std::vector<double> w(static_cast<std::size_t>(d), 0.0);
  std::fill_n(w.begin(), k, top_eig);
  return HermitianMatrix::from_eigenpairs(u, w);
}

HermitianMatrix gen_wishart_instance(int d, int m, Rng& rng, double scale) {
  if (d < 1 || m < 1) throw InvalidInputError("gen_wishart_instance: d and m must be positive");
  ComplexMatrix x(d, m);
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < d; ++r) x(r, c) = complex_normal(rng);
  }
  const double s = scale > 0.0 ? scale : 1.0 / m;
  ComplexMatrix w = s * (x * x.adjoint());
  return HermitianMatrix(ComplexMatrix(0.5 * (w + w.adjoint())));
}

std::vector<double> conditioned_gap_spectrum(int d, int k, double top_eig) {
  require_dims(d, k, "conditioned_gap_spectrum");
  require_top(top_eig, "conditioned_gap_spectrum");
  if (k < 4) throw InvalidInputError("conditioned_gap_spectrum: need k >= 4");
  const int first = ceil_div(k, 4);
  const int second = ceil_div(3 * k, 4);
  std::vector<double> values(static_cast<std::size_t>(d), 0.0);
  for (int i = 1; i <= k; ++i) {
    double v = top_eig / 3.0;
    if (i <= first) {
      v = top_eig;
    } else if (i <= second) {
      v = top_eig / 2.0;
    }
    values[static_cast<std::size_t>(i - 1)] = v;
  }
  return values;
}

HermitianMatrix gen_conditioned_gap_instance(int d, int k, double top_eig, Rng& rng) {
  const auto values = conditioned_gap_spectrum(d, k, top_eig);
  return HermitianMatrix::from_eigenpairs(haar_unitary(d, rng), values);
}

// ---------------------------------------------------------------------------
// Experiment spec

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kProjection: return "projection";
    case Scenario::kConditionedGap: return "conditioned_gap";
    case Scenario::kWishart: return "wishart";
    case Scenario::kCustomFile: return "custom_file";
  }
  return "projection";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "projection") return Scenario::kProjection;
  if (name == "conditioned_gap") return Scenario::kConditionedGap;
  if (name == "wishart") return Scenario::kWishart;
  if (name == "custom_file") return Scenario::kCustomFile;
  throw InvalidInputError("unknown scenario '" + name + "'");
}

void ExperimentSpec::validate() const {
  require_dims(d, k, "ExperimentSpec");
  if (trials < 1) throw InvalidInputError("ExperimentSpec: trials must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInputError("ExperimentSpec: epsilon must be positive");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInputError("ExperimentSpec: beta must lie in (0, 1)");
  require_top(top_eig, "ExperimentSpec");
  if (scenario == Scenario::kConditionedGap && k < 4) {
    throw InvalidInputError("ExperimentSpec: conditioned_gap needs k >= 4");
  }
  if (wishart_m < 0) throw InvalidInputError("ExperimentSpec: wishart_m must be >= 0");
  if (wishart_norm != "m" && wishart_norm != "d") {
    throw InvalidInputError("ExperimentSpec: wishart_norm must be \"m\" or \"d\"");
  }
  if (scenario == Scenario::kCustomFile && input_path.empty()) {
    throw InvalidInputError("ExperimentSpec: custom_file needs input_path");
  }
  if (!mechanism.empty() && mechanism != "algorithm1" && mechanism != "algorithm2") {
    throw InvalidInputError("ExperimentSpec: mechanism must be algorithm1 or algorithm2");
  }
  if (threads < 0) throw InvalidInputError("ExperimentSpec: threads must be >= 0");
  sampler.validate();
}

std::string ExperimentSpec::resolved_mechanism() const {
  if (!mechanism.empty()) return mechanism;
  return scenario == Scenario::kWishart || scenario == Scenario::kCustomFile ? "algorithm2"
                                                                             : "algorithm1";
}

Json experiment_spec_to_json(const ExperimentSpec& s) {
  Json j;
  j["scenario"] = to_string(s.scenario);
  j["d"] = s.d;
  j["k"] = s.k;
  j["epsilon"] = s.epsilon;
  j["beta"] = s.beta;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["sampler"] = sampler_config_to_json(s.sampler);
  j["output_path"] = s.output_path;
  j["top_eig"] = s.top_eig;
  j["wishart_m"] = s.wishart_m;
  j["wishart_norm"] = s.wishart_norm;
  j["input_path"] = s.input_path;
  j["mechanism"] = s.resolved_mechanism();
  j["threads"] = s.threads;
  j["timing"] = s.timing;
  return j;
}

ExperimentSpec experiment_spec_from_json(const Json& j) {
  static const std::vector<std::string> kKnown = {
      "scenario", "d", "k", "epsilon", "beta", "trials", "seed", "sampler", "output_path",
      "top_eig", "wishart_m", "wishart_norm", "input_path", "mechanism", "threads", "timing"};
  if (!j.is_object()) throw InvalidInputError("experiment spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InvalidInputError("experiment spec: unknown field '" + key + "'");
    }
  }
  ExperimentSpec s;
  try {
    if (j.contains("scenario")) s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    s.d = get_or(j, "d", s.d);
    s.k = get_or(j, "k", s.k);
    s.epsilon = get_or(j, "epsilon", s.epsilon);
    s.beta = get_or(j, "beta", s.beta);
    s.trials = get_or(j, "trials", s.trials);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    if (j.contains("sampler")) s.sampler = sampler_config_from_json(j.at("sampler"));
    s.output_path = get_or(j, "output_path", s.output_path);
    s.top_eig = get_or(j, "top_eig", s.top_eig);
    s.wishart_m = get_or(j, "wishart_m", s.wishart_m);
    s.wishart_norm = get_or(j, "wishart_norm", s.wishart_norm);
    s.input_path = get_or(j, "input_path", s.input_path);
    s.mechanism = get_or(j, "mechanism", s.mechanism);
    s.threads = get_or(j, "threads", s.threads);
    s.timing = get_or(j, "timing", s.timing);
  } catch (const Json::exception& e) {
    throw InvalidInputError(std::string("experiment spec: ") + e.what());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Experiments

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInputError("nearest_rank_quantile: empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInputError("nearest_rank_quantile: q must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

HermitianMatrix make_instance(const ExperimentSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, kInstanceStream));
  switch (spec.scenario) {
    case Scenario::kProjection:
      return gen_projection_instance(spec.d, spec.k, spec.top_eig, rng);
    case Scenario::kConditionedGap:
      return gen_conditioned_gap_instance(spec.d, spec.k, spec.top_eig, rng);
    case Scenario::kWishart: {
      const int m = spec.wishart_m > 0 ? spec.wishart_m : spec.d;
      const double scale = spec.wishart_norm == "d" ? 1.0 / spec.d : 1.0 / m;
      return gen_wishart_instance(spec.d, m, rng, scale);
    }
    case Scenario::kCustomFile: {
      auto m = hermitian_from_json(read_json_file(spec.input_path));
      if (m.dim() != spec.d) throw InvalidInputError("custom_file: matrix dimension differs from spec d");
      return m;
    }
  }
  throw InvalidInputError("make_instance: unknown scenario");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.spec = spec;
  result.mechanism = spec.resolved_mechanism();

  const auto m = make_instance(spec);
  result.gamma = eigenvalues(m);
  std::vector<double> top(result.gamma.begin(), result.gamma.begin() + spec.k);
  for (double& v : top) v = std::max(0.0, v);
  const auto lambda = Spectrum::orbit_target(top, spec.d);
  result.lambda.assign(lambda.values().begin(), lambda.values().end());
  const bool use_alg1 = result.mechanism == "algorithm1";

  result.per_trial.resize(static_cast<std::size_t>(spec.trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int i = next++; i < spec.trials; i = next++) {
      try {
        const auto trial_start = std::chrono::steady_clock::now();
        const std::uint64_t seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        auto t = use_alg1 ? algorithm1(m, lambda, spec.epsilon, spec.sampler, seed)
                          : algorithm2(m, spec.k, spec.epsilon, spec.sampler, seed);
        TrialSummary& s = result.per_trial[static_cast<std::size_t>(i)];
        s.trial = i;
        s.seed = seed;
        s.utility = t.utility;
        s.utility_gap = t.utility_gap;
        s.frob_err_sq = t.frobenius_error;
        for (int a = 0; a < spec.k; ++a) s.lambda_tilde.push_back(t.target_spectrum[a]);
        s.acceptance_rate = t.diagnostics.acceptance_rate;
        s.rhat = t.diagnostics.split_rhat;
        s.flags = t.flags;
        s.flags.insert(s.flags.end(), t.diagnostics.flags.begin(), t.diagnostics.flags.end());
        if (spec.timing) {
          s.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - trial_start)
                          .count();
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  int threads = spec.threads > 0 ? spec.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, spec.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> gaps;
  std::vector<double> errs;
  for (const auto& s : result.per_trial) {
    gaps.push_back(s.utility_gap);
    errs.push_back(s.frob_err_sq);
    if (!s.flags.empty()) ++result.flagged_trials;
  }
  const double upper = 1.0 - spec.beta;
  result.quantiles.gap_median = nearest_rank_quantile(gaps, 0.5);
  result.quantiles.gap_upper = nearest_rank_quantile(gaps, upper);
  result.quantiles.frob_median = nearest_rank_quantile(errs, 0.5);
  result.quantiles.frob_upper = nearest_rank_quantile(errs, upper);

  result.bounds = evaluate_bounds(Spectrum(result.gamma), lambda, spec.d, spec.k, spec.epsilon,
                                  spec.beta);
  if (use_alg1) result.tau_dominates = result.quantiles.gap_upper <= result.bounds.tau;
  if (spec.timing) {
    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

Json experiment_result_to_json(const ExperimentResult& r) {
  Json j;
  j["spec"] = experiment_spec_to_json(r.spec);
  j["mechanism"] = r.mechanism;
  j["gamma"] = r.gamma;
  j["lambda"] = r.lambda;
  j["quantiles"] = {{"levels", {0.5, 1.0 - r.spec.beta}},
                    {"utility_gap_median", r.quantiles.gap_median},
                    {"utility_gap_upper", r.quantiles.gap_upper},
                    {"frob_err_sq_median", r.quantiles.frob_median},
                    {"frob_err_sq_upper", r.quantiles.frob_upper}};
  j["bounds"] = bound_report_to_json(r.bounds);
  if (r.tau_dominates) {
    j["tau_dominates"] = *r.tau_dominates;
  } else {
    j["tau_dominates"] = nullptr;
  }
  j["flagged_trials"] = r.flagged_trials;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  Json trials = Json::array();
  for (const auto& s : r.per_trial) {
    Json t;
    t["trial"] = s.trial;
    t["seed"] = s.seed;
    t["utility"] = s.utility;
    t["utility_gap"] = s.utility_gap;
    t["frob_err_sq"] = s.frob_err_sq;
    t["lambda_tilde"] = s.lambda_tilde;
    t["acceptance_rate"] = s.acceptance_rate;
    t["rhat"] = s.rhat;
    t["wall_ms"] = s.wall_ms;
    t["flags"] = s.flags;
    trials.push_back(std::move(t));
  }
  j["per_trial"] = std::move(trials);
  return j;
}

std::string experiment_result_to_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "trial,utility,utility_gap,frob_err_sq";
  for (int i = 1; i <= r.spec.k; ++i) out << ",lambda_tilde_" << i;
  out << ",acceptance_rate,rhat,wall_ms\n";
  for (const auto& s : r.per_trial) {
    out << s.trial << ',' << fmt(s.utility) << ',' << fmt(s.utility_gap) << ','
        << fmt(s.frob_err_sq);
    for (double v : s.lambda_tilde) out << ',' << fmt(v);
    out << ',' << fmt(s.acceptance_rate) << ',' << fmt(s.rhat) << ',' << fmt(s.wall_ms) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Privacy audit

std::vector<NeighborPair> adversarial_pairs(int count) {
  if (count < 1) throw InvalidInputError("adversarial_pairs: count must be positive");
  struct Shape {
    int n;
    double theta;  // y = (cos theta, e^{i phi} sin theta)
    double phi;
    bool remove;   // x = 0 instead of x orthogonal to y
  };
  std::vector<Shape> shapes = {
      {1, 0.0, 0.0, false},  {2, 0.0, 0.0, false},  {4, 0.0, 0.0, false},
      {8, 0.0, 0.0, false},  {13, 0.0, 0.0, false}, {20, 0.0, 0.0, false},
      {1, 0.0, 0.0, true},   {4, 0.0, 0.0, true},   {2, 0.7853981633974483, 1.5707963267948966, false},
      {13, 0.3, 0.7, false},
  };
  for (int extra = 0; static_cast<int>(shapes.size()) < count; ++extra) {
    shapes.push_back({25 + 5 * extra, 0.2 * extra, 0.5 * extra, extra % 2 == 1});
  }
  std::vector<NeighborPair> pairs;
  for (int p = 0; p < count; ++p) {
    const auto& s = shapes[static_cast<std::size_t>(p)];
    ComplexVector y(2);
    y << std::cos(s.theta), std::polar(std::sin(s.theta), s.phi);
    ComplexVector x(2);
    if (s.remove) {
      x.setZero();
    } else {
      x << -std::polar(std::sin(s.theta), -s.phi), std::cos(s.theta);
    }
    std::vector<ComplexVector> points(static_cast<std::size_t>(s.n), y);
    Dataset a(2, points);
    Dataset b = neighbor(a, 0, x);
    std::ostringstream name;
    name << "n=" << s.n << (s.remove ? ",remove" : ",swap") << ",theta=" << s.theta
         << ",phi=" << s.phi;
    pairs.push_back({name.str(), std::move(a), std::move(b)});
  }
  return pairs;
}

void AuditConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInputError("audit: epsilon must be positive");
  if (runs_per_pair < 1) throw InvalidInputError("audit: runs_per_pair must be positive");
  if (bins < 2 || bins % 2 != 0) throw InvalidInputError("audit: bins must be even and >= 2");
  if (min_count < 1) throw InvalidInputError("audit: min_count must be positive");
}

int audit_bin(const ComplexVector& u, int bins) {
  if (u.size() != 2) throw InvalidInputError("audit_bin: d = 2 only");
  const int bands = bins / 2;
  const double t = std::norm(u(0));
  const int band = std::clamp(static_cast<int>(std::floor(t * bands)), 0, bands - 1);
  const double phase = std::arg(u(1) * std::conj(u(0)));
  return 2 * band + (phase >= 0.0 ? 0 : 1);
}

AuditReport audit_privacy(const AuditConfig& cfg, std::span<const NeighborPair> pairs) {
  cfg.validate();
  AuditReport report;
  report.config = cfg;
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  SamplerConfig sampler;
  sampler.method = SamplerMethod::kExactRank1;
  sampler.diagnostics_on = false;
  const double bound = std::exp(cfg.epsilon);

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& pair = pairs[p];
    if (pair.a.dim() != 2 || pair.b.dim() != 2) {
      throw InvalidInputError("audit_privacy: d = 2 datasets only");
    }
    std::vector<std::int64_t> counts[2] = {
        std::vector<std::int64_t>(static_cast<std::size_t>(cfg.bins), 0),
        std::vector<std::int64_t>(static_cast<std::size_t>(cfg.bins), 0)};
    for (int side = 0; side < 2; ++side) {
      const auto m = (side == 0 ? pair.a : pair.b).covariance();
      ExponentialTarget target = algorithm1_target(m, lambda, cfg.epsilon);
      if (cfg.mechanism == AuditMechanism::kMutatedCoeff) target.coeff = cfg.epsilon / target.sensitivity;
      OrbitMechanism mech(std::move(target), sampler);
      Rng rng(derive_seed(cfg.seed, 2 * p + static_cast<std::uint64_t>(side)));
      auto& c = counts[side];
      for (int r = 0; r < cfg.runs_per_pair; ++r) {
        ++c[static_cast<std::size_t>(audit_bin(mech.sample_direction(rng), cfg.bins))];
      }
    }

    AuditPairReport pr;
    pr.name = pair.name;
    const double n = cfg.runs_per_pair;
    for (int b = 0; b < cfg.bins; ++b) {
      AuditBin bin;
      bin.index = b;
      bin.count_a = counts[0][static_cast<std::size_t>(b)];
      bin.count_b = counts[1][static_cast<std::size_t>(b)];
      bin.audited = bin.count_a >= cfg.min_count && bin.count_b >= cfg.min_count;
      if (bin.audited) {
        const double ca = static_cast<double>(bin.count_a);
        const double cb = static_cast<double>(bin.count_b);
        bin.ratio = ca / cb;
        bin.half_width = std::sqrt((1.0 - ca / n) / ca + (1.0 - cb / n) / cb);
        bin.threshold = bound * (1.0 + 4.0 * bin.half_width);
        const double worst = std::max(bin.ratio, 1.0 / bin.ratio);
        bin.violation = worst > bin.threshold;
        pr.max_ratio = std::max(pr.max_ratio, worst);
        pr.max_ratio_excess = std::max(pr.max_ratio_excess, worst / bin.threshold);
        if (bin.violation) pr.pass = false;
      } else {
        ++pr.excluded_bins;
      }
      pr.bins.push_back(bin);
    }
    if (pr.excluded_bins > 0) {
      report.notes.push_back(pair.name + ": " + std::to_string(pr.excluded_bins) +
                             " bins excluded (count below " + std::to_string(cfg.min_count) + ")");
    }
    if (!pr.pass) report.pass = false;
    report.pairs.push_back(std::move(pr));
  }
  return report;
}

Json audit_report_to_json(const AuditReport& r, bool include_bins) {
  Json j;
  j["epsilon"] = r.config.epsilon;
  j["runs_per_pair"] = r.config.runs_per_pair;
  j["bins"] = r.config.bins;
  j["min_count"] = r.config.min_count;
  j["seed"] = r.config.seed;
  j["mechanism"] = r.config.mechanism == AuditMechanism::kCorrect ? "correct" : "mutated_coefficient";
  j["pass"] = r.pass;
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json pj;
    pj["name"] = p.name;
    pj["pass"] = p.pass;
    pj["max_ratio"] = p.max_ratio;
    pj["max_ratio_over_threshold"] = p.max_ratio_excess;
    pj["excluded_bins"] = p.excluded_bins;
    if (include_bins) {
      Json bins = Json::array();
      for (const auto& b : p.bins) {
        Json bj;
        bj["bin"] = b.index;
        bj["count_a"] = b.count_a;
        bj["count_b"] = b.count_b;
        bj["audited"] = b.audited;
        if (b.audited) {
          bj["ratio"] = b.ratio;
          bj["half_width"] = b.half_width;
          bj["threshold"] = b.threshold;
          bj["violation"] = b.violation;
        }
        bins.push_back(std::move(bj));
      }
      pj["bins"] = std::move(bins);
    }
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  j["notes"] = r.notes;
  return j;
}

std::string audit_report_to_csv(const AuditReport& r) {
  std::ostringstream out;
  out << "pair,bin,count_a,count_b,audited,ratio,half_width,threshold,violation\n";
  for (const auto& p : r.pairs) {
    for (const auto& b : p.bins) {
      out << '"' << p.name << "\"," << b.index << ',' << b.count_a << ',' << b.count_b << ','
          << (b.audited ? 1 : 0) << ',' << fmt(b.ratio) << ',' << fmt(b.half_width) << ','
          << fmt(b.threshold) << ',' << (b.violation ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace orbitdp
