#ifndef ORBITDP_SPECTRA_H_
#define ORBITDP_SPECTRA_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "orbitdp/types.h"

namespace orbitdp {

// Dense d x d complex Hermitian matrix. Construction symmetrizes to
// (A + A*)/2 after rejecting inputs whose Hermitian defect exceeds
// kHermitianRejectTol in max-norm.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const ComplexMatrix& entries);

  static HermitianMatrix zero(int dim);
  static HermitianMatrix identity(int dim);
  static HermitianMatrix diagonal(std::span<const double> values);
  // Builds sum_j w_j v_j v_j^* for the columns v_j of `basis`.
  static HermitianMatrix from_eigenpairs(const ComplexMatrix& basis,
                                         std::span<const double> weights);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

  double trace() const;
  double frobenius_norm() const { return m_.norm(); }
  bool is_psd(double tol = kPsdTol) const;

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix operator*(double scale) const;
  // U m U^*.
  HermitianMatrix conjugated(const ComplexMatrix& u) const;

 private:
  struct Trusted {};
  HermitianMatrix(ComplexMatrix entries, Trusted);

  ComplexMatrix m_;
};

// Non-increasing real eigenvalue list. `rank` marks how many leading values
// may be nonzero (orbit targets pad with zeros beyond it).
class Spectrum {
 public:
  Spectrum(std::vector<double> values, int rank);
  explicit Spectrum(std::vector<double> values);

  // Orbit target diag(top_1, ..., top_k, 0, ..., 0) of length `dim`.
  static Spectrum orbit_target(std::span<const double> top, int dim);

  int dim() const { return static_cast<int>(values_.size()); }
  int rank() const { return rank_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return values_; }
  double top() const { return values_.empty() ? 0.0 : values_.front(); }
  double sum() const;
  double sum_of_squares_after(int k) const;
  bool is_orbit_target() const;
  bool is_zero() const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> values_;
  int rank_;
};

// H = U diag(spectrum) U^*, a point of the unitary orbit of the spectrum.
class OrbitPoint {
 public:
  OrbitPoint(ComplexMatrix u, Spectrum spectrum);

  const ComplexMatrix& unitary() const { return u_; }
  const Spectrum& spectrum() const { return spectrum_; }
  int dim() const { return spectrum_.dim(); }

  HermitianMatrix materialize() const;

 private:
  ComplexMatrix u_;
  Spectrum spectrum_;
};

// Users' vectors x_i in C^d with ||x_i||_2 <= 1.
class Dataset {
 public:
  Dataset(int dim, std::vector<ComplexVector> points);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<ComplexVector>& points() const { return points_; }

  // sum_i x_i x_i^*.
  HermitianMatrix covariance() const;

 private:
  int dim_;
  std::vector<ComplexVector> points_;
};

struct EigenDecomposition {
  Spectrum values;       // non-increasing
  ComplexMatrix vectors; // column j pairs with values[j]
};

EigenDecomposition eig_hermitian(const HermitianMatrix& m);

// Sorted (non-increasing) eigenvalues only.
std::vector<double> eigenvalues(const HermitianMatrix& m);

// Re Tr(a^* b).
double frobenius_inner(const HermitianMatrix& a, const HermitianMatrix& b);

// Largest singular value of a - b.
double spectral_distance(const HermitianMatrix& a, const HermitianMatrix& b);
double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b);

// sum_i lambda_i gamma_i: the maximum of <M, H> over the orbit of lambda for
// any M with spectrum gamma.
double schur_horn_optimum(const Spectrum& gamma, const Spectrum& lambda);

// U Lambda U^* with U the (non-increasingly ordered) eigenbasis of m.
OrbitPoint optimal_orbit_point(const HermitianMatrix& m, const Spectrum& lambda);

// Replaces point `index` by `replacement`.
Dataset neighbor(const Dataset& dataset, std::size_t index,
                 const ComplexVector& replacement);

// Both sides of ||U L U^* - V L V^*||_F^2 = 2 <U L U^*, U L U^* - V L V^*>.
std::pair<double, double> frobenius_identity_check(const OrbitPoint& u,
                                                   const OrbitPoint& v);

// Orthonormalizes the columns of u in place (Householder QR with the
// diagonal phases of R folded back so the result stays close to u).
void reorthonormalize(ComplexMatrix& u);

// Frobenius norm of u u^* - I.
double unitarity_defect(const ComplexMatrix& u);

}  // namespace orbitdp

#endif  // ORBITDP_SPECTRA_H_
