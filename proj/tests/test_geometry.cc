#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "orbitdp/geometry.h"
#include "orbitdp/sampler.h"
#include "orbitdp/selftest.h"

namespace orbitdp {
namespace {

ComplexVector unit(std::initializer_list<Complex> entries) {
  ComplexVector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (Complex e : entries) v(i++) = e;
  return v.normalized();
}

ProjectionPoint line(const ComplexVector& v) { return ProjectionPoint::from_basis(v); }

ComplexMatrix oracle_projector(const ComplexMatrix& basis) { return basis * basis.adjoint(); }

TEST(ProjectionPoint, ValidatesInvariants) {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(0, 0) = 0.5;
  EXPECT_THROW(ProjectionPoint{p}, InvalidInputError);
  p(0, 0) = 1.0;
  p(0, 1) = 0.1;
  EXPECT_THROW(ProjectionPoint{p}, InvalidInputError);
  Rng rng(1);
  const auto q = ProjectionPoint::haar(5, 2, rng);
  EXPECT_EQ(q.rank(), 2);
  EXPECT_LE((q.matrix() * q.matrix() - q.matrix()).norm(), 1e-10);
  EXPECT_LE((oracle_projector(q.basis()) - q.matrix()).norm(), 1e-10);
  EXPECT_LE((oracle_projector(q.complement()) + q.matrix() - ComplexMatrix::Identity(5, 5)).norm(), 1e-10);
}

TEST(PrincipalAngles, Examples) {
  Rng rng(2);
  const auto a = ProjectionPoint::haar(5, 3, rng);
  for (double t : principal_angles(a, a).angles) EXPECT_NEAR(t, 0.0, 1e-7);

  const auto e1 = line(unit({1.0, 0.0}));
  const auto e2 = line(unit({0.0, 1.0}));
  EXPECT_NEAR(principal_angles(e1, e2).angles[0], std::numbers::pi / 2, 1e-10);

  const auto f1 = line(unit({1.0, 0.0, 0.0}));
  const auto f12 = line(unit({1.0, 1.0, 0.0}));
  EXPECT_NEAR(principal_angles(f1, f12).angles[0], std::numbers::pi / 4, 1e-10);

  EXPECT_THROW(principal_angles(a, ProjectionPoint::haar(5, 2, rng)), InvalidInputError);
}

TEST(PrincipalAngles, BasesAreAlignedPrincipalVectors) {
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    const int d = 2 + n % 6;
    const int i = 1 + n % (d - 1);
    const auto a = ProjectionPoint::haar(d, i, rng);
    const auto b = ProjectionPoint::haar(d, i, rng);
    const auto pa = principal_angles(a, b);
    ASSERT_EQ(static_cast<int>(pa.angles.size()), i);
    EXPECT_TRUE(std::is_sorted(pa.angles.begin(), pa.angles.end()));
    const ComplexMatrix eye = ComplexMatrix::Identity(i, i);
    EXPECT_LE((pa.u_basis.adjoint() * pa.u_basis - eye).norm(), 1e-10);
    EXPECT_LE((pa.v_basis.adjoint() * pa.v_basis - eye).norm(), 1e-10);
    EXPECT_LE((oracle_projector(pa.u_basis) - a.matrix()).norm(), 1e-10);
    EXPECT_LE((oracle_projector(pa.v_basis) - b.matrix()).norm(), 1e-10);
    for (int l = 0; l < i; ++l) {
      const Complex c = pa.u_basis.col(l).dot(pa.v_basis.col(l));
      EXPECT_NEAR(c.real(), std::cos(pa.angles[static_cast<std::size_t>(l)]), 1e-8);
      EXPECT_NEAR(c.imag(), 0.0, 1e-8);
    }
    // ||P - Q||_F^2 = 2 sum sin^2 theta.
    double s = 0.0;
    for (double t : pa.angles) s += 2.0 * std::pow(std::sin(t), 2);
    EXPECT_NEAR(projection_distance(a, b), std::sqrt(s), 1e-8);
  }
}

TEST(SinTheta, IdenticalInputs) {
  const auto a = HermitianMatrix::diagonal(std::vector<double>{3.0, 1.0, 0.0});
  const auto r = sin_theta_check(a, a, 1, 1.0);
  EXPECT_NEAR(r.lhs, 0.0, 1e-12);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(SinTheta, QubitRotation) {
  constexpr double kEta = 0.1;
  ComplexMatrix rot(2, 2);
  rot << std::cos(kEta), -std::sin(kEta), std::sin(kEta), std::cos(kEta);
  const auto a = HermitianMatrix::diagonal(std::vector<double>{2.0, 0.0});
  const HermitianMatrix a_hat(rot * a.matrix() * rot.adjoint());
  const auto r = sin_theta_check(a, a_hat, 1, 2.0);
  // Both sides equal sqrt(2) sin(eta) here.
  EXPECT_NEAR(r.lhs, std::sqrt(2.0) * std::sin(kEta), 1e-12);
  EXPECT_NEAR(r.rhs, std::sqrt(2.0) * std::sin(kEta), 1e-12);
  EXPECT_TRUE(r.holds);
}

TEST(SinTheta, SeparationFailureIsHypothesisError) {
  const auto a = HermitianMatrix::diagonal(std::vector<double>{1.0, 0.9});
  EXPECT_THROW(sin_theta_check(a, a, 1, 0.5), HypothesisError);
  EXPECT_THROW(sin_theta_check(a, a, 0, 0.05), InvalidInputError);
}

TEST(SinTheta, RandomizedSuiteHasNoViolations) {
  Rng rng(4);
  int verified = 0;
  for (int n = 0; n < 2000 && verified < 500; ++n) {
    const int d = 2 + n % 5;
    const int i = 1 + n % (d - 1);
    std::vector<double> values(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) values[static_cast<std::size_t>(a)] = (a < i ? 3.0 : 0.0) + uniform_open(rng);
    std::sort(values.rbegin(), values.rend());
    const auto a = HermitianMatrix::from_eigenpairs(haar_unitary(d, rng), values);
    const auto e = random_hermitian(d, rng) * (0.3 * uniform_open(rng));
    const HermitianMatrix a_hat(a.matrix() + e.matrix());
    const auto ea = eigenvalues(a);
    const auto eh = eigenvalues(a_hat);
    const double delta = std::min(ea[static_cast<std::size_t>(i - 1)] - eh[static_cast<std::size_t>(i)],
                                  eh[static_cast<std::size_t>(i - 1)] - ea[static_cast<std::size_t>(i)]);
    if (!(delta > 0.0)) continue;
    const auto r = sin_theta_check(a, a_hat, i, delta);
    EXPECT_TRUE(r.holds) << r.lhs << " > " << r.rhs;
    ++verified;
  }
  EXPECT_EQ(verified, 500);
}

TEST(AlignedBasis, CoordinateProjectionIsExact) {
  for (int d = 1; d <= 5; ++d) {
    for (int i = 1; i <= d; ++i) {
      const ComplexMatrix w = aligned_basis(ProjectionPoint::coordinate(d, i));
      EXPECT_LE((w - ComplexMatrix::Identity(d, i)).norm(), 1e-14);
    }
  }
}

TEST(AlignedBasis, QubitClosedForm) {
  for (double eta : {0.05, 0.4, 1.0, 1.5}) {
    const auto p = line(unit({std::cos(eta), std::sin(eta)}));
    const ComplexMatrix w = aligned_basis(p);
    const double lhs = (w - ComplexMatrix::Identity(2, 1)).norm();
    EXPECT_NEAR(lhs, 2.0 * std::abs(std::sin(eta / 2.0)), 1e-12);
    const double rhs = (p.matrix() - ProjectionPoint::coordinate(2, 1).matrix()).norm();
    EXPECT_NEAR(rhs, std::sqrt(2.0) * std::abs(std::sin(eta)), 1e-12);
    EXPECT_LE(lhs, rhs + 1e-12);
  }
}

TEST(AlignedBasis, RandomProjectionsSatisfyInequality) {
  Rng rng(5);
  for (int n = 0; n < 1000; ++n) {
    const int d = 2 + n % 7;
    const int i = 1 + n % (d - 1);
    const auto p = ProjectionPoint::haar(d, i, rng);
    const ComplexMatrix w = aligned_basis(p);
    EXPECT_LE((w.adjoint() * w - ComplexMatrix::Identity(i, i)).norm(), 1e-10);
    EXPECT_LE((oracle_projector(w) - p.matrix()).norm(), 1e-10);
    EXPECT_LE((w - ComplexMatrix::Identity(d, i)).norm(),
              (p.matrix() - ProjectionPoint::coordinate(d, i).matrix()).norm() + 1e-8);
  }
}

TEST(PackingMap, CoordinateProjectionMapsToDiagonal) {
  const Spectrum lambda(std::vector<double>{4.0, 3.0, 2.0, 1.0, 0.0});
  for (int i = 1; i < 5; ++i) {
    for (int j = i + 1; j <= 5; ++j) {
      const auto p = ProjectionPoint::coordinate(5 - j + i + 1, i);
      const auto h = packing_map_phi(p, lambda, i, j).materialize();
      EXPECT_LE((h.matrix() - HermitianMatrix::diagonal(lambda.values()).matrix()).norm(), 1e-14);
    }
  }
}

TEST(PackingMap, ThreeDimensionalHandExample) {
  // p onto (e1 + e2)/sqrt 2 in G_{2,1}; psi is the 45 degree rotation placed
  // on coordinates {1, 3}, giving [[1,0,1],[0,1,0],[1,0,1]].
  const Spectrum lambda(std::vector<double>{2.0, 1.0, 0.0});
  const auto p = line(unit({1.0, 1.0}));
  const auto h = packing_map_phi(p, lambda, 1, 3).materialize();
  ComplexMatrix expected(3, 3);
  expected << 1, 0, 1, 0, 1, 0, 1, 0, 1;
  EXPECT_LE((h.matrix() - expected).norm(), 1e-12);

  const double p_dist = (p.matrix() - ProjectionPoint::coordinate(2, 1).matrix()).norm();
  EXPECT_NEAR(p_dist, 1.0, 1e-12);
  const double orbit_dist = (h.matrix() - HermitianMatrix::diagonal(lambda.values()).matrix()).norm();
  EXPECT_NEAR(orbit_dist, 2.0, 1e-12);
  EXPECT_GE(orbit_dist, (2.0 - 0.0) * p_dist - 1e-8);
  EXPECT_LE(orbit_dist, 4.0 * 2.0 * p_dist + 1e-8);
}

TEST(PackingMap, DistanceBoundsOnRandomPairs) {
  Rng rng(6);
  for (int n = 0; n < 500; ++n) {
    const int d = 3 + n % 4;
    const int i = 1 + n % (d - 1);
    const int j = i + 1 + static_cast<int>(n / 7) % (d - i);
    const auto lambda = random_orbit_spectrum(d, d, 3.0, rng);
    const int dim = d - j + i + 1;
    const auto p = ProjectionPoint::haar(dim, i, rng);
    const auto q = ProjectionPoint::haar(dim, i, rng);
    const auto hp = packing_map_phi(p, lambda, i, j).materialize();
    const auto hq = packing_map_phi(q, lambda, i, j).materialize();
    const double gap = lambda[i - 1] - lambda[j - 1];
    EXPECT_GE((hp.matrix() - hq.matrix()).norm(), gap * projection_distance(p, q) - 1e-8);
    const double to_center = (hp.matrix() - HermitianMatrix::diagonal(lambda.values()).matrix()).norm();
    EXPECT_LE(to_center, 4.0 * lambda.top() * projection_distance(p, ProjectionPoint::coordinate(dim, i)) + 1e-8);
    const auto ev = eigenvalues(hp);
    for (int a = 0; a < d; ++a) EXPECT_NEAR(ev[static_cast<std::size_t>(a)], lambda[a], 1e-8);
  }
}

TEST(PackingMap, RejectsBadIndices) {
  const Spectrum lambda(std::vector<double>{2.0, 1.0, 0.0});
  const auto p = ProjectionPoint::coordinate(2, 1);
  EXPECT_THROW(packing_map_phi(p, lambda, 2, 2), InvalidInputError);
  EXPECT_THROW(packing_map_phi(p, lambda, 1, 2), InvalidInputError);
}

TEST(GrassmannianDiameter, HaarPairsStayInside) {
  Rng rng(7);
  for (const auto [d, k] : {std::pair{4, 2}, std::pair{5, 1}, std::pair{6, 4}}) {
    const double diam = grassmannian_frobenius_diameter(d, k);
    EXPECT_DOUBLE_EQ(diam, std::sqrt(2.0 * std::min(k, d - k)));
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
      worst = std::max(worst, projection_distance(ProjectionPoint::haar(d, k, rng),
                                                   ProjectionPoint::haar(d, k, rng)));
    }
    EXPECT_LE(worst, diam + 1e-8);
    EXPECT_GE(worst, std::min(std::sqrt(k), std::sqrt(d - k)));
  }
}

TEST(Covering, WideRadiusGivesOneCenter) {
  Rng rng(8);
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  EXPECT_EQ(covering_construct_orbit(lambda, 1.0, rng, 200).size(), 1u);
}

TEST(Covering, QubitCountInRangeAcrossSeeds) {
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  const double ceiling = std::pow(1.0 + 16.0 / 0.5, 4);
  for (std::uint64_t s = 0; s < 8; ++s) {
    Rng rng(derive_seed(9, s));
    const auto centers = covering_construct_orbit(lambda, 0.5, rng, 200);
    EXPECT_GE(centers.size(), 2u);
    EXPECT_LE(centers.size(), 50u);
    EXPECT_LE(static_cast<double>(centers.size()), ceiling);
    for (std::size_t a = 0; a < centers.size(); ++a) {
      for (std::size_t b = a + 1; b < centers.size(); ++b) {
        const ComplexMatrix diff = centers[a].materialize().matrix() - centers[b].materialize().matrix();
        EXPECT_GT(Eigen::JacobiSVD<ComplexMatrix>(diff).singularValues()(0), 0.5);
      }
    }
  }
}

TEST(Covering, SmallerRadiusGivesMoreCenters) {
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  for (std::uint64_t s = 0; s < 8; ++s) {
    Rng a(derive_seed(10, s));
    Rng b(derive_seed(10, s));
    EXPECT_GE(covering_construct_orbit(lambda, 0.25, a, 200).size(),
              covering_construct_orbit(lambda, 0.5, b, 200).size());
  }
}

TEST(Covering, PackingCoveringSandwichOnSharedPool) {
  Rng rng(11);
  const Spectrum lambda(std::vector<double>{1.0, 0.5, 0.0}, 2);
  std::vector<HermitianMatrix> pool;
  for (int n = 0; n < 300; ++n) pool.push_back(haar_orbit_point(lambda, rng).materialize());
  for (double zeta : {0.2, 0.4, 0.8}) {
    const auto cover = greedy_separated_subset(pool, zeta, true);
    const auto pack = greedy_separated_subset(pool, 2.0 * zeta, true);
    EXPECT_LE(pack.size(), cover.size());
    EXPECT_LE(std::log(static_cast<double>(cover.size())), 2.0 * 3 * 2 * std::log1p(16.0 / zeta));
  }
}

// Exhaustive re-verification written against raw matrices.
void independent_check(const PackingCertificate& cert, const Spectrum& lambda) {
  const std::vector<double> values(lambda.values().begin(), lambda.values().end());
  std::vector<ComplexMatrix> hs;
  for (const auto& p : cert.points) hs.push_back(oracle::materialize(p.unitary(), values));
  const ComplexMatrix center = oracle::materialize(ComplexMatrix::Identity(lambda.dim(), lambda.dim()), values);
  for (std::size_t a = 0; a < hs.size(); ++a) {
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      EXPECT_GE(std::sqrt(oracle::inner(hs[a] - hs[b], hs[a] - hs[b])), cert.target_separation);
    }
    if (std::isfinite(cert.radius)) {
      EXPECT_LE(std::sqrt(oracle::inner(hs[a] - center, hs[a] - center)), cert.radius);
    }
  }
}

TEST(Packing, QubitCertificate) {
  Rng rng(12);
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  const auto cert = packing_lower_construct(lambda, 1, 2, 0.1, INFINITY, rng);
  EXPECT_GE(cert.points.size(), 2u);
  EXPECT_TRUE(verify_packing_certificate(cert).ok());
  independent_check(cert, lambda);
}

TEST(Packing, HugeSeparationGivesSinglePoint) {
  Rng rng(13);
  const Spectrum lambda(std::vector<double>{1.0, 0.0}, 1);
  const auto cert = packing_lower_construct(lambda, 1, 2, 1.01 * std::sqrt(2.0), INFINITY, rng);
  EXPECT_EQ(cert.points.size(), 1u);
  EXPECT_TRUE(verify_packing_certificate(cert).ok());
}

TEST(Packing, FourDimensionalBallCertificate) {
  Rng rng(14);
  const Spectrum lambda(std::vector<double>{3.0, 2.0, 1.0, 0.0});
  const auto cert = packing_lower_construct(lambda, 1, 4, 0.5, 2.0, rng);
  EXPECT_GE(cert.points.size(), 2u);
  const auto check = verify_packing_certificate(cert);
  EXPECT_TRUE(check.ok());
  EXPECT_LE(check.max_center_dist, 2.0);
  EXPECT_GE(check.min_pairwise_dist, 0.5);
  independent_check(cert, lambda);
  const Json j = packing_certificate_to_json(cert);
  EXPECT_EQ(j.at("points").size(), cert.points.size());
}

TEST(Packing, EqualGapThrows) {
  Rng rng(15);
  const Spectrum lambda(std::vector<double>{1.0, 1.0, 0.0});
  EXPECT_THROW(packing_lower_construct(lambda, 1, 2, 0.1, INFINITY, rng), InvalidInputError);
}

TEST(Packing, CheckerRejectsTamperedCertificates) {
  Rng rng(16);
  const Spectrum lambda(std::vector<double>{2.0, 1.0, 0.0});
  auto cert = packing_lower_construct(lambda, 1, 3, 0.5, INFINITY, rng);
  ASSERT_GE(cert.points.size(), 2u);
  auto dup = cert;
  dup.points.push_back(dup.points.front());
  EXPECT_FALSE(verify_packing_certificate(dup).separation_ok);
  auto tight = cert;
  tight.radius = 1e-3;
  EXPECT_FALSE(verify_packing_certificate(tight).containment_ok);
  auto foreign = cert;
  foreign.points.push_back(OrbitPoint(haar_unitary(3, rng), Spectrum(std::vector<double>{5.0, 0.0, 0.0}, 1)));
  EXPECT_FALSE(verify_packing_certificate(foreign).orbit_ok);
}

}  // namespace
}  // namespace orbitdp
