#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "orbitdp/matrix_io.h"
#include "orbitdp/sampler.h"
#include "orbitdp/selftest.h"
#include "orbitdp/spectra.h"

namespace orbitdp {
namespace {

TEST(HermitianMatrix, RejectsNonFiniteEntries) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_THROW(HermitianMatrix{m}, InvalidInputError);
}

TEST(HermitianMatrix, RejectsLargeAsymmetryAndRepairsSmallOnes) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = Complex(1e-6, 0.0);
  EXPECT_THROW(HermitianMatrix{m}, InvalidInputError);

  m(0, 1) = Complex(0.5, 0.25 + 1e-10);
  m(1, 0) = Complex(0.5, -0.25);
  const HermitianMatrix h(m);
  EXPECT_LE(std::abs(h(0, 1) - std::conj(h(1, 0))), 1e-12);
}

TEST(HermitianMatrix, RejectsNonSquare) {
  EXPECT_THROW(HermitianMatrix{ComplexMatrix::Zero(2, 3)}, InvalidInputError);
}

TEST(Spectrum, EnforcesOrderAndRank) {
  EXPECT_THROW(Spectrum(std::vector<double>{1.0, 2.0}), InvalidInputError);
  EXPECT_THROW(Spectrum(std::vector<double>{1.0, 0.0}, 3), InvalidInputError);
  const std::vector<double> top{2.0, 1.0};
  const auto s = Spectrum::orbit_target(top, 4);
  EXPECT_EQ(s.dim(), 4);
  EXPECT_EQ(s.rank(), 2);
  EXPECT_EQ(s[3], 0.0);
  EXPECT_TRUE(s.is_orbit_target());
}

TEST(EigHermitian, IdentityHasUnitSpectrum) {
  const auto e = eig_hermitian(HermitianMatrix::identity(3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(e.values[i], 1.0);
}

TEST(EigHermitian, DiagonalSortsWithPermutationVectors) {
  const auto e = eig_hermitian(HermitianMatrix::diagonal(std::vector<double>{3.0, 1.0, 2.0}));
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 2.0, 1e-14);
  EXPECT_NEAR(e.values[2], 1.0, 1e-14);
  const int expected_row[3] = {0, 2, 1};
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      EXPECT_NEAR(std::abs(e.vectors(r, c)), r == expected_row[c] ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(EigHermitian, RandomReconstruction) {
  Rng rng(7);
  const auto m = random_hermitian(4, rng);
  const auto e = eig_hermitian(m);
  std::vector<double> values(e.values.values().begin(), e.values.values().end());
  const double residual = (m.matrix() - oracle::materialize(e.vectors, values)).norm();
  EXPECT_LE(residual, 1e-8 * std::max(1.0, m.frobenius_norm()));
  for (int i = 1; i < 4; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);
}

TEST(FrobeniusInner, IdentityAndDisjointSupport) {
  EXPECT_DOUBLE_EQ(frobenius_inner(HermitianMatrix::identity(5), HermitianMatrix::identity(5)), 5.0);
  EXPECT_DOUBLE_EQ(frobenius_inner(HermitianMatrix::diagonal(std::vector<double>{2.0, 0.0}),
                                   HermitianMatrix::diagonal(std::vector<double>{0.0, 3.0})),
                   0.0);
}

TEST(FrobeniusInner, MatchesEntrywiseSum) {
  Rng rng(11);
  const auto a = random_psd(3, rng);
  const auto b = random_psd(3, rng);
  EXPECT_NEAR(frobenius_inner(a, b), oracle::inner(a.matrix(), b.matrix()), 1e-12);
}

TEST(FrobeniusInner, DimensionMismatchThrows) {
  EXPECT_THROW(frobenius_inner(HermitianMatrix::identity(2), HermitianMatrix::identity(3)),
               InvalidInputError);
}

TEST(SchurHorn, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(schur_horn_optimum(Spectrum(std::vector<double>{1, 1, 1}),
                                      Spectrum(std::vector<double>{1, 0, 0})),
                   1.0);
  EXPECT_DOUBLE_EQ(schur_horn_optimum(Spectrum(std::vector<double>{3, 2, 1}),
                                      Spectrum(std::vector<double>{1, 1, 0})),
                   5.0);
  EXPECT_THROW(schur_horn_optimum(Spectrum(std::vector<double>{1, 0}),
                                  Spectrum(std::vector<double>{1, 0, 0})),
               InvalidInputError);
}

TEST(SchurHorn, HaarSearchNeverExceedsAndApproachesOptimum) {
  Rng rng(5);
  const auto m = random_psd(3, rng);
  const Spectrum lambda(std::vector<double>{2.0, 1.0, 0.0});
  const double opt = schur_horn_optimum(Spectrum(eigenvalues(m)), lambda);
  double best_small = -INFINITY;
  double best = -INFINITY;
  for (int s = 0; s < 100000; ++s) {
    const ComplexMatrix u = haar_unitary(3, rng);
    const double v = oracle::inner(m.matrix(), oracle::materialize(u, {2.0, 1.0, 0.0}));
    ASSERT_LE(v, opt + 1e-8);
    best = std::max(best, v);
    if (s < 1000) best_small = best;
  }
  EXPECT_LE(opt - best, opt - best_small);
  EXPECT_LT(opt - best, 0.05 * opt);
}

TEST(OptimalOrbitPoint, Examples) {
  const auto m = HermitianMatrix::diagonal(std::vector<double>{2.0, 1.0});
  const auto h = optimal_orbit_point(m, Spectrum(std::vector<double>{1.0, 0.0})).materialize();
  EXPECT_NEAR((h.matrix() - HermitianMatrix::diagonal(std::vector<double>{1.0, 0.0}).matrix()).norm(),
              0.0, 1e-12);

  Rng rng(13);
  const auto r = random_psd(3, rng);
  const Spectrum lambda(std::vector<double>{3.0, 1.0, 0.5});
  const auto p = optimal_orbit_point(r, lambda);
  EXPECT_NEAR(frobenius_inner(r, p.materialize()), schur_horn_optimum(Spectrum(eigenvalues(r)), lambda),
              1e-8);
}

TEST(OptimalOrbitPoint, DegenerateInputGivesTraceForEveryUnitary) {
  Rng rng(1);
  const Spectrum lambda(std::vector<double>{2.0, 1.5, 0.0, 0.0});
  for (int s = 0; s < 20; ++s) {
    const auto h = haar_orbit_point(lambda, rng).materialize();
    EXPECT_NEAR(frobenius_inner(HermitianMatrix::identity(4), h), 3.5, 1e-12);
  }
}

TEST(Neighbor, ReplacingWithSelfKeepsCovariance) {
  Rng rng(3);
  const auto data = random_dataset(4, 10, rng);
  const auto same = neighbor(data, 2, data.points()[2]);
  EXPECT_EQ((same.covariance().matrix() - data.covariance().matrix()).norm(), 0.0);
}

TEST(Neighbor, SinglePointSwap) {
  ComplexVector e1 = ComplexVector::Zero(2);
  ComplexVector e2 = ComplexVector::Zero(2);
  e1(0) = 1.0;
  e2(1) = 1.0;
  const Dataset data(2, {e1});
  const auto swapped = neighbor(data, 0, e2);
  EXPECT_NEAR((data.covariance().matrix() - HermitianMatrix::diagonal(std::vector<double>{1, 0}).matrix()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((swapped.covariance().matrix() - HermitianMatrix::diagonal(std::vector<double>{0, 1}).matrix()).norm(), 0.0, 1e-15);
}

TEST(Neighbor, DifferenceRankTraceAndNorm) {
  Rng rng(3);
  const auto data = random_dataset(4, 10, rng);
  for (std::size_t idx = 0; idx < 10; ++idx) {
    const ComplexVector v = random_unit_vector(4, rng) * uniform_open(rng);
    const auto other = neighbor(data, idx, v);
    const ComplexMatrix diff = other.covariance().matrix() - data.covariance().matrix();
    const double removed = data.points()[idx].squaredNorm();
    EXPECT_NEAR(diff.trace().real(), v.squaredNorm() - removed, 1e-12);
    EXPECT_LE(diff.norm(), removed + v.squaredNorm() + 1e-12);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(diff);
    int nonzero = 0;
    for (int i = 0; i < 4; ++i) nonzero += std::abs(es.eigenvalues()(i)) > 1e-12;
    EXPECT_LE(nonzero, 2);
  }
}

TEST(Neighbor, RejectsLongReplacement) {
  Rng rng(3);
  const auto data = random_dataset(2, 3, rng);
  ComplexVector v = ComplexVector::Zero(2);
  v(0) = 1.5;
  EXPECT_THROW(neighbor(data, 0, v), InvalidInputError);
  EXPECT_THROW(neighbor(data, 7, ComplexVector::Zero(2)), InvalidInputError);
}

TEST(FrobeniusIdentity, EqualPointsGiveZero) {
  Rng rng(2);
  const auto p = haar_orbit_point(Spectrum(std::vector<double>{2.0, 1.0, 0.0}), rng);
  const auto [lhs, rhs] = frobenius_identity_check(p, p);
  EXPECT_NEAR(lhs, 0.0, 1e-12);
  EXPECT_NEAR(rhs, 0.0, 1e-12);
}

TEST(FrobeniusIdentity, QuarterTurnInTwoDimensions) {
  const Spectrum lambda(std::vector<double>{1.0, 0.0});
  ComplexMatrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const auto [lhs, rhs] =
      frobenius_identity_check(OrbitPoint(ComplexMatrix::Identity(2, 2), lambda), OrbitPoint(rot, lambda));
  EXPECT_NEAR(lhs, 2.0, 1e-14);
  EXPECT_NEAR(rhs, 2.0, 1e-14);
}

TEST(FrobeniusIdentity, RandomFourDimensional) {
  Rng rng(21);
  const Spectrum lambda(std::vector<double>{3.0, 2.0, 0.5, 0.0});
  const auto u = haar_orbit_point(lambda, rng);
  const auto v = haar_orbit_point(lambda, rng);
  const auto [lhs, rhs] = frobenius_identity_check(u, v);
  EXPECT_LE(std::abs(lhs - rhs), 1e-8);
  const double direct = (oracle::materialize(u.unitary(), {3, 2, 0.5, 0}) -
                         oracle::materialize(v.unitary(), {3, 2, 0.5, 0}))
                            .squaredNorm();
  EXPECT_NEAR(lhs, direct, 1e-9);
}

TEST(FrobeniusIdentity, SpectrumMismatchThrows) {
  const OrbitPoint a(ComplexMatrix::Identity(2, 2), Spectrum(std::vector<double>{1.0, 0.0}));
  const OrbitPoint b(ComplexMatrix::Identity(2, 2), Spectrum(std::vector<double>{2.0, 0.0}));
  EXPECT_THROW(frobenius_identity_check(a, b), InvalidInputError);
}

TEST(OrbitPoint, RejectsNonUnitary) {
  ComplexMatrix u = ComplexMatrix::Identity(2, 2);
  u(0, 0) = 1.1;
  EXPECT_THROW(OrbitPoint(u, Spectrum(std::vector<double>{1.0, 0.0})), InvalidInputError);
}

TEST(Reorthonormalize, RepairsDriftAndStaysClose) {
  Rng rng(4);
  ComplexMatrix u = haar_unitary(5, rng);
  const ComplexMatrix original = u;
  u += 1e-7 * ComplexMatrix::Random(5, 5);
  reorthonormalize(u);
  EXPECT_LE(unitarity_defect(u), 1e-12);
  EXPECT_LE((u - original).norm(), 1e-6);
}

TEST(Dataset, CovarianceIsPsdAndRejectsLongPoints) {
  Rng rng(8);
  const auto data = random_dataset(5, 12, rng);
  EXPECT_TRUE(data.covariance().is_psd());
  ComplexVector x = ComplexVector::Ones(2);
  EXPECT_THROW(Dataset(2, {x}), InvalidInputError);
}

TEST(MatrixIo, RoundTrips) {
  Rng rng(9);
  const auto m = random_hermitian(3, rng);
  const auto back = hermitian_from_json(hermitian_to_json(m));
  EXPECT_EQ((back.matrix() - m.matrix()).norm(), 0.0);

  const auto data = random_dataset(3, 4, rng);
  const auto data_back = dataset_from_json(dataset_to_json(data));
  ASSERT_EQ(data_back.size(), data.size());
  EXPECT_EQ((data_back.covariance().matrix() - data.covariance().matrix()).norm(), 0.0);

  const auto p = haar_orbit_point(Spectrum(std::vector<double>{1.0, 0.5, 0.0}, 2), rng);
  const auto p_back = orbit_point_from_json(orbit_point_to_json(p));
  EXPECT_EQ(p_back.spectrum(), p.spectrum());
  EXPECT_EQ((p_back.unitary() - p.unitary()).norm(), 0.0);
}

TEST(MatrixIo, RejectsMalformed) {
  EXPECT_THROW(hermitian_from_json(Json::parse(R"({"dim": 2, "re": [[1, 0]], "im": [[0, 0]]})")),
               InvalidInputError);
  EXPECT_THROW(hermitian_from_json(Json::parse(R"({"dim": 1, "im": [[0]]})")), InvalidInputError);
  EXPECT_THROW(hermitian_from_json(Json::parse(R"({"dim": 1.5, "re": [[1]]})")), InvalidInputError);
  // A missing imaginary part means a real matrix.
  EXPECT_NO_THROW(hermitian_from_json(Json::parse(R"({"dim": 1, "re": [[1]]})")));
}

}  // namespace
}  // namespace orbitdp
