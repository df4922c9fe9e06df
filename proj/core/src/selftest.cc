#include "orbitdp/selftest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include "orbitdp/bounds.h"
#include "orbitdp/geometry.h"
#include "orbitdp/mechanisms.h"
#include "orbitdp/sampler.h"

namespace orbitdp {
namespace {

int uniform_int(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Accumulates margins (value - allowed); positive margins are violations.
class Tally {
 public:
  explicit Tally(std::string name) { r_.name = std::move(name); r_.worst = -INFINITY; }

  void check(double margin) {
    ++r_.cases;
    if (!(margin <= 0.0)) ++r_.violations;
    if (std::isnan(margin)) {
      r_.worst = INFINITY;
    } else {
      r_.worst = std::max(r_.worst, margin);
    }
  }

  int cases() const { return r_.cases; }

  InvariantResult done(std::string detail = {}) {
    r_.detail = std::move(detail);
    if (r_.cases == 0) r_.worst = 0.0;
    return r_;
  }

 private:
  InvariantResult r_;
};

InvariantResult unitary_invariance(Rng& rng) {
  Tally t("unitary_invariance");
  for (int c = 0; c < 200; ++c) {
    const int d = uniform_int(1, 6, rng);
    const auto a = random_hermitian(d, rng);
    const auto b = random_hermitian(d, rng);
    const auto u = haar_unitary(d, rng);
    const auto ua = a.conjugated(u);
    const auto ub = b.conjugated(u);
    t.check(std::abs(frobenius_inner(ua, ub) - frobenius_inner(a, b)) - 1e-8);
    t.check(std::abs(frobenius_distance(ua, ub) - frobenius_distance(a, b)) - 1e-8);
  }
  return t.done("|<UAU*,UBU*> - <A,B>| and distance change <= 1e-8");
}

InvariantResult orbit_membership(Rng& rng) {
  Tally t("orbit_membership");
  for (int c = 0; c < 200; ++c) {
    const int d = uniform_int(1, 6, rng);
    const auto lambda = random_orbit_spectrum(d, uniform_int(1, d, rng), 5.0, rng);
    const auto h = haar_orbit_point(lambda, rng).materialize();
    const auto ev = eigenvalues(h);
    double err = 0.0;
    for (int i = 0; i < d; ++i) err = std::max(err, std::abs(ev[static_cast<std::size_t>(i)] - lambda[i]));
    t.check(err - 1e-8);
  }
  return t.done("sorted eigenvalues of U diag(lambda) U* within 1e-8 of lambda");
}

InvariantResult schur_horn_dominance(Rng& rng) {
  Tally t("schur_horn_dominance");
  for (int c = 0; c < 1000; ++c) {
    const int d = uniform_int(1, 6, rng);
    const auto m = random_psd(d, rng);
    const auto lambda = random_orbit_spectrum(d, uniform_int(1, d, rng), 3.0, rng);
    const auto h = haar_orbit_point(lambda, rng).materialize();
    const double opt = schur_horn_optimum(Spectrum(eigenvalues(m)), lambda);
    t.check(frobenius_inner(m, h) - opt - 1e-8);
  }
  return t.done("<M,H> <= sum gamma_i lambda_i + 1e-8");
}

InvariantResult frobenius_identity(Rng& rng) {
  Tally t("frobenius_identity");
  for (int c = 0; c < 1000; ++c) {
    const int d = uniform_int(1, 6, rng);
    const auto lambda = random_orbit_spectrum(d, uniform_int(1, d, rng), 4.0, rng);
    const auto u = haar_orbit_point(lambda, rng);
    const auto v = haar_orbit_point(lambda, rng);
    const auto [lhs, rhs] = frobenius_identity_check(u, v);
    t.check(std::abs(lhs - rhs) - 1e-8 * std::max(1.0, lhs));
  }
  return t.done("||ULU* - VLV*||^2 = 2<ULU*, ULU* - VLV*> to relative 1e-8");
}

InvariantResult eigenvalue_l1_stability(Rng& rng) {
  Tally t("eigenvalue_l1_stability");
  for (int c = 0; c < 1000; ++c) {
    const int d = uniform_int(1, 8, rng);
    const auto a = random_psd(d, rng);
    const ComplexVector v = random_unit_vector(d, rng) * uniform_open(rng);
    const auto m = a + HermitianMatrix(ComplexMatrix(v * v.adjoint()));
    const auto em = eigenvalues(m);
    const auto ea = eigenvalues(a);
    double sum = 0.0;
    double worst_order = -INFINITY;
    for (int i = 0; i < d; ++i) {
      sum += em[static_cast<std::size_t>(i)] - ea[static_cast<std::size_t>(i)];
      worst_order = std::max(worst_order, ea[static_cast<std::size_t>(i)] - em[static_cast<std::size_t>(i)] - 1e-10);
    }
    t.check(std::abs(sum - v.squaredNorm()) - 1e-8);
    t.check(worst_order);
  }
  return t.done("sum_i (lambda_i(M) - lambda_i(M - vv*)) = |v|^2 and interlacing");
}

InvariantResult sensitivity(Rng& rng) {
  Tally t("sensitivity");
  for (int c = 0; c < 1000; ++c) {
    const int d = uniform_int(1, 8, rng);
    const auto data = random_dataset(d, uniform_int(1, 6, rng), rng);
    const auto swapped = neighbor(data, 0, random_unit_vector(d, rng) * uniform_open(rng));
    const auto lambda = random_orbit_spectrum(d, uniform_int(1, std::min(d, 4), rng), 3.0, rng);
    const auto h = haar_orbit_point(lambda, rng).materialize();
    const double diff = frobenius_inner(data.covariance(), h) - frobenius_inner(swapped.covariance(), h);
    t.check(std::abs(diff) - sensitivity_bound(lambda) - 1e-9);
  }
  return t.done("|<A,H> - <A',H>| <= lambda_1 + 1e-9");
}

InvariantResult laplace_calibration(Rng& rng) {
  Tally t("laplace_calibration");
  constexpr int kSamples = 100000;
  constexpr double kB = 2.0;
  std::vector<double> xs(kSamples);
  double mad = 0.0;
  for (double& x : xs) {
    x = laplace_noise(kB, rng);
    mad += std::abs(x);
  }
  mad /= kSamples;
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = xs[static_cast<std::size_t>(i)];
    const double cdf = x < 0.0 ? 0.5 * std::exp(x / kB) : 1.0 - 0.5 * std::exp(-x / kB);
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / kSamples),
                   std::abs(cdf - static_cast<double>(i + 1) / kSamples)});
  }
  t.check(std::abs(mad - kB) / kB - 0.02);
  t.check(ks - 0.01);
  return t.done("mean |X| within 2% of b and KS < 0.01 at b = 2");
}

double rank1_oracle_mean(double gap_coeff) {
  // E[t] for density proportional to exp(gap_coeff * t) on [0, 1].
  if (std::abs(gap_coeff) < 1e-12) return 0.5;
  const double e = std::exp(gap_coeff);
  return (e * (gap_coeff - 1.0) + 1.0) / (gap_coeff * (e - 1.0));
}

InvariantResult exact_sampler_mean(Rng& rng) {
  Tally t("exact_sampler_mean");
  const auto m = HermitianMatrix::diagonal(std::vector<double>{2.0, 0.0});
  Rank1ExactSampler sampler(m, 1.0);
  constexpr int kSamples = 20000;
  double mean = 0.0;
  for (int i = 0; i < kSamples; ++i) mean += std::norm((*sampler.sample(rng))(0));
  mean /= kSamples;
  t.check(std::abs(mean - rank1_oracle_mean(2.0)) - 0.01);
  return t.done("E|u_1|^2 at M = diag(2,0), coeff 1 within 0.01 of the integral");
}

InvariantResult mcmc_marginal(Rng& rng) {
  Tally t("mcmc_marginal");
  const auto m = HermitianMatrix::diagonal(std::vector<double>{2.0, 0.0});
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  SamplerConfig cfg;
  cfg.burn_in = 2000;
  cfg.chain_length = 4000;
  const auto samples = mcmc_thinned_samples(m, lambda, 1.0, cfg, 10, 3000, rng);
  const double tv = tv_distance_diagnostic(samples, [](double x) { return std::exp(2.0 * x); }, 20);
  t.check(tv - 0.1);
  return t.done("MCMC t-marginal TV < 0.1 against exp(2t) at 3000 thinned samples");
}

InvariantResult sin_theta(Rng& rng) {
  Tally t("sin_theta");
  int skipped = 0;
  while (t.cases() < 300) {
    const int d = uniform_int(2, 6, rng);
    const int i = uniform_int(1, d - 1, rng);
    const auto a = random_hermitian(d, rng);
    const auto e = random_hermitian(d, rng) * (0.2 * uniform_open(rng));
    const auto a_hat = a + e;
    const auto ea = eigenvalues(a);
    const auto eh = eigenvalues(a_hat);
    const double delta = std::min(ea[static_cast<std::size_t>(i - 1)] - eh[static_cast<std::size_t>(i)],
                                  eh[static_cast<std::size_t>(i - 1)] - ea[static_cast<std::size_t>(i)]);
    if (!(delta > 1e-6)) {
      ++skipped;
      continue;
    }
    const auto r = sin_theta_check(a, a_hat, i, delta);
    t.check(r.lhs - r.rhs - 1e-8);
  }
  return t.done("||P - P_hat||_F <= ||E||_F / delta; " + std::to_string(skipped) +
                " draws without separation skipped");
}

InvariantResult alignment(Rng& rng) {
  Tally t("alignment");
  for (int c = 0; c < 500; ++c) {
    const int d = uniform_int(2, 8, rng);
    const int i = uniform_int(1, d - 1, rng);
    const auto p = ProjectionPoint::haar(d, i, rng);
    const auto w = aligned_basis(p);
    const ComplexMatrix coord = ComplexMatrix::Identity(d, d).leftCols(i);
    const double lhs = (w - coord).norm();
    const double rhs = projection_distance(p, ProjectionPoint::coordinate(d, i));
    t.check(lhs - rhs - 1e-8);
    t.check((w * w.adjoint() - p.matrix()).norm() - 1e-8);
  }
  return t.done("||W - I_i||_F <= ||p - I_i||_F and W W* = p");
}

InvariantResult phi_map(Rng& rng) {
  Tally t("phi_map");
  for (int c = 0; c < 200; ++c) {
    const int d = uniform_int(2, 6, rng);
    const int i = uniform_int(1, d - 1, rng);
    const int j = uniform_int(i + 1, d, rng);
    const int n = d - j + i + 1;
    std::vector<double> values(static_cast<std::size_t>(d));
    for (double& v : values) v = 5.0 * uniform_open(rng);
    std::sort(values.begin(), values.end(), std::greater<>());
    const Spectrum lambda(values);
    const auto p = ProjectionPoint::haar(n, i, rng);
    const auto q = ProjectionPoint::haar(n, i, rng);
    const auto hp = packing_map_phi(p, lambda, i, j).materialize();
    const auto hq = packing_map_phi(q, lambda, i, j).materialize();
    const auto center = HermitianMatrix::diagonal(values);
    const double gap = lambda[i - 1] - lambda[j - 1];
    t.check(gap * projection_distance(p, q) - frobenius_distance(hp, hq) - 1e-8);
    t.check(frobenius_distance(hp, center) -
            4.0 * lambda.top() * projection_distance(p, ProjectionPoint::coordinate(n, i)) - 1e-8);
    const auto h0 = packing_map_phi(ProjectionPoint::coordinate(n, i), lambda, i, j).materialize();
    t.check(frobenius_distance(h0, center) - 1e-12);
  }
  return t.done("distance lower bound, center upper bound and phi(I_i) = Lambda");
}

InvariantResult packing_certificate(Rng& rng) {
  Tally t("packing_certificate");
  const Spectrum lambda(std::vector<double>{3.0, 2.0, 1.0, 0.0});
  const auto cert = packing_lower_construct(lambda, 1, 4, 0.5, 2.0, rng);
  const auto check = verify_packing_certificate(cert);
  t.check(check.ok() ? -1.0 : 1.0);
  return t.done(std::to_string(cert.points.size()) + " points re-verified");
}

InvariantResult covering_sandwich(Rng& rng) {
  Tally t("covering_sandwich");
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  std::vector<HermitianMatrix> pool;
  for (int c = 0; c < 300; ++c) pool.push_back(haar_orbit_point(lambda, rng).materialize());
  for (double zeta : {0.25, 0.5}) {
    const auto fine = greedy_separated_subset(pool, zeta, true);
    const auto coarse = greedy_separated_subset(pool, 2.0 * zeta, true);
    t.check(static_cast<double>(coarse.size()) - static_cast<double>(fine.size()));
    const auto cover = covering_construct_orbit(lambda, zeta, rng, 100);
    t.check(static_cast<double>(cover.size()) - std::pow(1.0 + 16.0 / zeta, 4.0));
  }
  return t.done("greedy count at 2 zeta <= count at zeta; cover within (1 + 16/zeta)^(2dk)");
}

InvariantResult bounds_sandwich(Rng& rng) {
  Tally t("bounds_sandwich");
  for (int c = 0; c < 200; ++c) {
    const int d = uniform_int(2, 8, rng);
    const int k = uniform_int(1, d, rng);
    const auto gamma = random_orbit_spectrum(d, d, 4.0, rng);
    const auto lambda = random_orbit_spectrum(d, k, 4.0, rng);
    const auto r = evaluate_bounds(gamma, lambda, d, k, 0.5 + uniform_open(rng), 0.1, {},
                                   0.05 + uniform_open(rng));
    t.check(r.log_packing_lower - r.log_covering_upper);
  }
  return t.done("log packing(2 zeta) <= log covering(zeta)");
}

}  // namespace

ComplexVector random_unit_vector(int d, Rng& rng) {
  ComplexVector v(d);
  for (int i = 0; i < d; ++i) v(i) = complex_normal(rng);
  return v / v.norm();
}

HermitianMatrix random_hermitian(int d, Rng& rng) {
  ComplexMatrix g(d, d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) g(r, c) = complex_normal(rng);
  }
  return HermitianMatrix(ComplexMatrix(0.5 * (g + g.adjoint())));
}

HermitianMatrix random_psd(int d, Rng& rng) {
  ComplexMatrix g(d, d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) g(r, c) = complex_normal(rng);
  }
  ComplexMatrix m = g * g.adjoint() / static_cast<double>(d);
  return HermitianMatrix(ComplexMatrix(0.5 * (m + m.adjoint())));
}

Spectrum random_orbit_spectrum(int d, int k, double scale, Rng& rng) {
  std::vector<double> top(static_cast<std::size_t>(k));
  for (double& v : top) v = scale * uniform_open(rng);
  std::sort(top.begin(), top.end(), std::greater<>());
  return Spectrum::orbit_target(top, d);
}

Dataset random_dataset(int d, int n, Rng& rng) {
  std::vector<ComplexVector> points;
  for (int i = 0; i < n; ++i) points.push_back(random_unit_vector(d, rng) * uniform_open(rng));
  return Dataset(d, std::move(points));
}

bool SelftestReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
}

SelftestReport run_selftest(std::uint64_t seed) {
  using Suite = InvariantResult (*)(Rng&);
  const Suite suites[] = {unitary_invariance, orbit_membership, schur_horn_dominance,
                          frobenius_identity, eigenvalue_l1_stability, sensitivity,
                          laplace_calibration, exact_sampler_mean, mcmc_marginal,
                          sin_theta, alignment, phi_map, packing_certificate,
                          covering_sandwich, bounds_sandwich};
  SelftestReport report;
  report.seed = seed;
  std::uint64_t index = 0;
  for (auto suite : suites) {
    Rng rng(derive_seed(seed, index++));
    report.results.push_back(suite(rng));
  }
  return report;
}

Json selftest_report_to_json(const SelftestReport& r) {
  Json j;
  j["seed"] = r.seed;
  j["passed"] = r.passed();
  Json results = Json::array();
  for (const auto& s : r.results) {
    Json e;
    e["name"] = s.name;
    e["passed"] = s.passed();
    e["cases"] = s.cases;
    e["violations"] = s.violations;
    e["worst_margin"] = s.worst;
    e["detail"] = s.detail;
    results.push_back(std::move(e));
  }
  j["results"] = std::move(results);
  return j;
}

std::string selftest_report_to_csv(const SelftestReport& r) {
  std::ostringstream out;
  out << "name,passed,cases,violations,worst_margin\n";
  for (const auto& s : r.results) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", s.worst);
    out << s.name << ',' << (s.passed() ? 1 : 0) << ',' << s.cases << ',' << s.violations << ','
        << buf << '\n';
  }
  return out.str();
}

}  // namespace orbitdp
