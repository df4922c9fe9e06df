#ifndef ORBITDP_GEOMETRY_H_
#define ORBITDP_GEOMETRY_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "orbitdp/matrix_io.h"
#include "orbitdp/random.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

// Rank-i orthogonal projection in C^{d x d}, i.e. a point of G_{d,i}.
class ProjectionPoint {
 public:
  // Validates ||p^2 - p||_F <= 1e-10, ||p - p^*||_F <= 1e-12 and an integral
  // trace within 1e-8.
  explicit ProjectionPoint(const ComplexMatrix& p);

  // q q^* for a d x i matrix with orthonormal columns.
  static ProjectionPoint from_basis(const ComplexMatrix& q);
  // I_i: the first i coordinate vectors.
  static ProjectionPoint coordinate(int d, int i);
  static ProjectionPoint haar(int d, int i, Rng& rng);

  int dim() const { return static_cast<int>(p_.rows()); }
  int rank() const { return rank_; }
  const ComplexMatrix& matrix() const { return p_; }
  // Orthonormal bases of range(p) and of its complement.
  const ComplexMatrix& basis() const { return basis_; }
  const ComplexMatrix& complement() const { return complement_; }

 private:
  ProjectionPoint(ComplexMatrix p, ComplexMatrix basis, ComplexMatrix complement);

  ComplexMatrix p_;
  int rank_ = 0;
  ComplexMatrix basis_;
  ComplexMatrix complement_;
};

double projection_distance(const ProjectionPoint& a, const ProjectionPoint& b);

// sqrt(2 min(i, d - i)).
double grassmannian_frobenius_diameter(int d, int i);

struct PrincipalAngles {
  std::vector<double> angles;  // ascending, in [0, pi/2]
  ComplexMatrix u_basis;       // principal vectors in range(a)
  ComplexMatrix v_basis;       // principal vectors in range(b)
};

// Angles are arccos of the singular values of Qa^* Qb, clamped to [-1, 1].
PrincipalAngles principal_angles(const ProjectionPoint& a, const ProjectionPoint& b);

struct SinThetaResult {
  double lhs;  // ||U1 U1^* - U1' U1'^*||_F for the top-i eigenspaces
  double rhs;  // ||a - a_hat||_F / delta
  bool holds;  // lhs <= rhs + 1e-8
};

// Throws HypothesisError unless the top-i eigenvalues of each matrix are
// separated by at least delta from the bottom d - i eigenvalues of the
// other.
SinThetaResult sin_theta_check(const HermitianMatrix& a, const HermitianMatrix& a_hat,
                               int i, double delta);

// W with orthonormal columns, W W^* = p, closest to the coordinate block
// e_offset, ..., e_{offset + rank - 1}: W = Qp Z Y^* where E^* Qp = Y S Z^*.
ComplexMatrix aligned_to_coordinates(const ComplexMatrix& range_basis, int offset);

// d x i basis of p aligned with the first i coordinate vectors;
// ||W - I_i-hat||_F <= ||p - I_i||_F.
ComplexMatrix aligned_basis(const ProjectionPoint& p);

// For p in G_{n,i} with n = d - j + i + 1 (1-based 1 <= i < j <= d), builds
// psi = [psi_1, psi_2] from the aligned bases of p and I - p, embeds it on
// the indices {1..i} and {j..d} with the identity in between, and returns
// (Psi, lambda).
OrbitPoint packing_map_phi(const ProjectionPoint& p, const Spectrum& lambda, int i, int j);

// Greedy subset of `candidates` with pairwise distance > separation, in order.
std::vector<std::size_t> greedy_separated_subset(std::span<const HermitianMatrix> candidates,
                                                 double separation, bool spectral_norm);

// Greedy cover of the orbit in the spectral norm: Haar candidates are kept
// when farther than zeta from every current center; stops after `budget`
// consecutive rejections.
std::vector<OrbitPoint> covering_construct_orbit(const Spectrum& lambda, double zeta, Rng& rng,
                                                 int budget);

struct PackingCertificate {
  std::vector<OrbitPoint> points;
  std::vector<ProjectionPoint> preimages;  // Grassmannian points behind each orbit point
  double min_pairwise_dist = std::numeric_limits<double>::infinity();
  OrbitPoint center{ComplexMatrix::Identity(1, 1), Spectrum(std::vector<double>{0.0})};
  double radius = std::numeric_limits<double>::infinity();
  double target_separation = 0.0;
  double grassmann_separation = 0.0;
  double grassmann_radius = std::numeric_limits<double>::infinity();
  int i = 0;
  int j = 0;
  int candidates_tried = 0;
};

struct PackingOptions {
  int budget = 400;       // consecutive rejections before stopping
  int max_points = 64;
};

// zeta-separated subset of the orbit built through packing_map_phi from a
// zeta / (lambda_i - lambda_j)-separated greedy set in G_{d-j+i+1, i}. With
// finite omega the Grassmannian points are drawn from the ball of radius
// omega / (2 lambda_1) around I_i and kept only when ||phi(p) - Lambda||_F <= omega.
PackingCertificate packing_lower_construct(const Spectrum& lambda, int i, int j, double zeta,
                                           double omega, Rng& rng,
                                           const PackingOptions& options = {});

struct CertificateCheck {
  bool separation_ok = false;
  bool containment_ok = false;
  bool orbit_ok = false;
  double min_pairwise_dist = std::numeric_limits<double>::infinity();
  double max_center_dist = 0.0;
  double max_spectrum_error = 0.0;

  bool ok() const { return separation_ok && containment_ok && orbit_ok; }
};

// Re-verifies a certificate from its materialized points only.
CertificateCheck verify_packing_certificate(const PackingCertificate& cert);

Json packing_certificate_to_json(const PackingCertificate& cert);
Json certificate_check_to_json(const CertificateCheck& check);

}  // namespace orbitdp

#endif  // ORBITDP_GEOMETRY_H_
