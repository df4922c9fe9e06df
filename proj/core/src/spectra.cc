#include "orbitdp/spectra.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace orbitdp {
namespace {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b,
                      const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidInputError(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(const ComplexMatrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw InvalidInputError("HermitianMatrix: entries must be square and non-empty");
  }
  if (!all_finite(entries)) {
    throw InvalidInputError("HermitianMatrix: non-finite entry");
  }
  const double defect = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (defect > kHermitianRejectTol) {
    throw InvalidInputError("HermitianMatrix: input deviates from Hermitian by " +
                            std::to_string(defect));
  }
  m_ = 0.5 * (entries + entries.adjoint());
}

HermitianMatrix::HermitianMatrix(ComplexMatrix entries, Trusted)
    : m_(std::move(entries)) {}

HermitianMatrix HermitianMatrix::zero(int dim) {
  if (dim < 1) throw InvalidInputError("HermitianMatrix::zero: dim < 1");
  return HermitianMatrix(ComplexMatrix::Zero(dim, dim), Trusted{});
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  if (dim < 1) throw InvalidInputError("HermitianMatrix::identity: dim < 1");
  return HermitianMatrix(ComplexMatrix::Identity(dim, dim), Trusted{});
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  const auto d = static_cast<Eigen::Index>(values.size());
  if (d < 1) throw InvalidInputError("HermitianMatrix::diagonal: empty");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!std::isfinite(values[static_cast<std::size_t>(i)])) {
      throw InvalidInputError("HermitianMatrix::diagonal: non-finite entry");
    }
    m(i, i) = values[static_cast<std::size_t>(i)];
  }
  return HermitianMatrix(std::move(m), Trusted{});
}

HermitianMatrix HermitianMatrix::from_eigenpairs(const ComplexMatrix& basis,
                                                 std::span<const double> weights) {
  if (basis.cols() != static_cast<Eigen::Index>(weights.size())) {
    throw InvalidInputError("from_eigenpairs: basis/weights size mismatch");
  }
  ComplexMatrix m = ComplexMatrix::Zero(basis.rows(), basis.rows());
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const double w = weights[static_cast<std::size_t>(j)];
    if (w == 0.0) continue;
    m.noalias() += w * basis.col(j) * basis.col(j).adjoint();
  }
  return HermitianMatrix(0.5 * (m + m.adjoint()), Trusted{});
}

double HermitianMatrix::trace() const { return m_.trace().real(); }

bool HermitianMatrix::is_psd(double tol) const {
  const auto values = eigenvalues(*this);
  return values.back() >= -tol;
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  require_same_dim(*this, other, "HermitianMatrix::operator+");
  return HermitianMatrix(m_ + other.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  require_same_dim(*this, other, "HermitianMatrix::operator-");
  return HermitianMatrix(m_ - other.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::operator*(double scale) const {
  return HermitianMatrix(scale * m_, Trusted{});
}

HermitianMatrix HermitianMatrix::conjugated(const ComplexMatrix& u) const {
  if (u.rows() != m_.rows() || u.cols() != m_.cols()) {
    throw InvalidInputError("HermitianMatrix::conjugated: shape mismatch");
  }
  ComplexMatrix c = u * m_ * u.adjoint();
  return HermitianMatrix(0.5 * (c + c.adjoint()), Trusted{});
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(std::vector<double> values, int rank)
    : values_(std::move(values)), rank_(rank) {
  if (values_.empty()) throw InvalidInputError("Spectrum: empty");
  if (rank_ < 1 || rank_ > dim()) {
    throw InvalidInputError("Spectrum: rank must satisfy 1 <= k <= d");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InvalidInputError("Spectrum: non-finite value");
    if (i > 0 && values_[i] > values_[i - 1]) {
      throw InvalidInputError("Spectrum: values must be non-increasing");
    }
  }
}

Spectrum::Spectrum(std::vector<double> values)
    : Spectrum(values, static_cast<int>(values.size())) {}

Spectrum Spectrum::orbit_target(std::span<const double> top, int dim) {
  if (top.empty() || static_cast<int>(top.size()) > dim) {
    throw InvalidInputError("Spectrum::orbit_target: need 1 <= k <= d");
  }
  std::vector<double> values(static_cast<std::size_t>(dim), 0.0);
  std::copy(top.begin(), top.end(), values.begin());
  for (double v : top) {
    if (v < 0.0) throw InvalidInputError("Spectrum::orbit_target: negative eigenvalue");
  }
  return Spectrum(std::move(values), static_cast<int>(top.size()));
}

double Spectrum::sum() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double Spectrum::sum_of_squares_after(int k) const {
  double s = 0.0;
  for (int i = std::max(k, 0); i < dim(); ++i) s += values_[i] * values_[i];
  return s;
}

bool Spectrum::is_orbit_target() const {
  for (int i = 0; i < dim(); ++i) {
    if (values_[i] < 0.0) return false;
    if (i >= rank_ && values_[i] != 0.0) return false;
  }
  return true;
}

bool Spectrum::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

// ---------------------------------------------------------------------------
// OrbitPoint

OrbitPoint::OrbitPoint(ComplexMatrix u, Spectrum spectrum)
    : u_(std::move(u)), spectrum_(std::move(spectrum)) {
  if (u_.rows() != spectrum_.dim() || u_.cols() != spectrum_.dim()) {
    throw InvalidInputError("OrbitPoint: unitary/spectrum dimension mismatch");
  }
  const double defect = unitarity_defect(u_);
  if (!(defect <= kUnitaryTol)) {
    throw InvalidInputError("OrbitPoint: matrix is not unitary (defect " +
                            std::to_string(defect) + ")");
  }
}

HermitianMatrix OrbitPoint::materialize() const {
  return HermitianMatrix::from_eigenpairs(u_, spectrum_.values());
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(int dim, std::vector<ComplexVector> points)
    : dim_(dim), points_(std::move(points)) {
  if (dim_ < 1) throw InvalidInputError("Dataset: dim < 1");
  for (const auto& x : points_) {
    if (x.size() != dim_) throw InvalidInputError("Dataset: point dimension mismatch");
    if (!x.allFinite()) throw InvalidInputError("Dataset: non-finite coordinate");
    if (x.norm() > 1.0 + 1e-12) {
      throw InvalidInputError("Dataset: point norm exceeds 1");
    }
  }
}

HermitianMatrix Dataset::covariance() const {
  ComplexMatrix c = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& x : points_) c.noalias() += x * x.adjoint();
  return HermitianMatrix(0.5 * (c + c.adjoint()));
}

// ---------------------------------------------------------------------------
// Free operations

EigenDecomposition eig_hermitian(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw InvalidInputError("eig_hermitian: decomposition failed");
  }
  const int d = m.dim();
  // Eigen returns ascending order; reverse to non-increasing.
  std::vector<double> values(static_cast<std::size_t>(d));
  ComplexMatrix vectors(d, d);
  for (int j = 0; j < d; ++j) {
    values[static_cast<std::size_t>(j)] = solver.eigenvalues()(d - 1 - j);
    vectors.col(j) = solver.eigenvectors().col(d - 1 - j);
  }
  return {Spectrum(std::move(values)), std::move(vectors)};
}

std::vector<double> eigenvalues(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw InvalidInputError("eigenvalues: decomposition failed");
  }
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::reverse(out.begin(), out.end());
  return out;
}

double frobenius_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "frobenius_inner");
  const Complex value = a.matrix().cwiseProduct(b.matrix().conjugate()).sum();
  // sum_ij conj(a_ij) b_ij; for Hermitian a the product above is its conjugate.
  const Complex inner = std::conj(value);
  const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
  if (std::abs(inner.imag()) > 1e-10 * scale) {
    throw std::logic_error("frobenius_inner: imaginary part exceeds tolerance");
  }
  return inner.real();
}

double spectral_distance(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "spectral_distance");
  const auto values = eigenvalues(a - b);
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "frobenius_distance");
  return (a.matrix() - b.matrix()).norm();
}

double schur_horn_optimum(const Spectrum& gamma, const Spectrum& lambda) {
  if (gamma.dim() != lambda.dim()) {
    throw InvalidInputError("schur_horn_optimum: length mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < gamma.dim(); ++i) s += gamma[i] * lambda[i];
  return s;
}

OrbitPoint optimal_orbit_point(const HermitianMatrix& m, const Spectrum& lambda) {
  if (m.dim() != lambda.dim()) {
    throw InvalidInputError("optimal_orbit_point: dimension mismatch");
  }
  auto eig = eig_hermitian(m);
  reorthonormalize(eig.vectors);
  return OrbitPoint(std::move(eig.vectors), lambda);
}

Dataset neighbor(const Dataset& dataset, std::size_t index,
                 const ComplexVector& replacement) {
  if (index >= dataset.size()) throw InvalidInputError("neighbor: index out of range");
  if (replacement.size() != dataset.dim()) {
    throw InvalidInputError("neighbor: replacement dimension mismatch");
  }
  if (replacement.norm() > 1.0 + 1e-12) {
    throw InvalidInputError("neighbor: replacement norm exceeds 1");
  }
  auto points = dataset.points();
  points[index] = replacement;
  return Dataset(dataset.dim(), std::move(points));
}

std::pair<double, double> frobenius_identity_check(const OrbitPoint& u,
                                                   const OrbitPoint& v) {
  if (!(u.spectrum() == v.spectrum())) {
    throw InvalidInputError("frobenius_identity_check: spectrum mismatch");
  }
  const auto hu = u.materialize();
  const auto hv = v.materialize();
  const auto diff = hu - hv;
  const double lhs = diff.frobenius_norm() * diff.frobenius_norm();
  const double rhs = 2.0 * frobenius_inner(hu, diff);
  return {lhs, rhs};
}

void reorthonormalize(ComplexMatrix& u) {
  Eigen::HouseholderQR<ComplexMatrix> qr(u);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(j) *= diag / mag;
  }
  u = std::move(q);
}

double unitarity_defect(const ComplexMatrix& u) {
  const auto n = u.rows();
  return (u * u.adjoint() - ComplexMatrix::Identity(n, n)).norm();
}

}  // namespace orbitdp
