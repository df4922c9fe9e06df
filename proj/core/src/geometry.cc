#include "orbitdp/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "orbitdp/sampler.h"

namespace orbitdp {
namespace {

constexpr double kIdempotentTol = 1e-10;
constexpr double kProjectionHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-8;
constexpr double kSeparationSlack = 1e-12;

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Orthonormal n x i basis of the graph {[I; X] v}.
ComplexMatrix graph_basis(const ComplexMatrix& x) {
  const auto m = x.rows();
  const auto i = x.cols();
  ComplexMatrix g(i + m, i);
  g.topRows(i) = ComplexMatrix::Identity(i, i);
  g.bottomRows(m) = x;
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  return qr.householderQ() * ComplexMatrix::Identity(i + m, i);
}

}  // namespace

// ---------------------------------------------------------------------------
// ProjectionPoint

ProjectionPoint::ProjectionPoint(ComplexMatrix p, ComplexMatrix basis, ComplexMatrix complement)
    : p_(std::move(p)), rank_(static_cast<int>(basis.cols())), basis_(std::move(basis)),
      complement_(std::move(complement)) {}

ProjectionPoint::ProjectionPoint(const ComplexMatrix& p) {
  if (p.rows() != p.cols() || p.rows() < 1) {
    throw InvalidInputError("ProjectionPoint: matrix must be square and non-empty");
  }
  if (!p.allFinite()) throw InvalidInputError("ProjectionPoint: non-finite entry");
  if ((p - p.adjoint()).norm() > kProjectionHermitianTol) {
    throw InvalidInputError("ProjectionPoint: matrix is not Hermitian");
  }
  if ((p * p - p).norm() > kIdempotentTol) {
    throw InvalidInputError("ProjectionPoint: matrix is not idempotent");
  }
  const double tr = p.trace().real();
  const double rounded = std::round(tr);
  if (std::abs(tr - rounded) > kTraceTol) {
    throw InvalidInputError("ProjectionPoint: trace is not an integer");
  }
  p_ = 0.5 * (p + p.adjoint());
  rank_ = static_cast<int>(rounded);
  const int d = static_cast<int>(p.rows());
  auto eig = eig_hermitian(HermitianMatrix(p_));
  basis_ = eig.vectors.leftCols(rank_);
  complement_ = eig.vectors.rightCols(d - rank_);
}

ProjectionPoint ProjectionPoint::from_basis(const ComplexMatrix& q) {
  if (q.cols() > q.rows() || q.rows() < 1) {
    throw InvalidInputError("ProjectionPoint::from_basis: need d x i with i <= d");
  }
  const auto i = q.cols();
  if ((q.adjoint() * q - ComplexMatrix::Identity(i, i)).norm() > 1e-10) {
    throw InvalidInputError("ProjectionPoint::from_basis: columns are not orthonormal");
  }
  ComplexMatrix p = q * q.adjoint();
  return ProjectionPoint(ComplexMatrix(0.5 * (p + p.adjoint())));
}

ProjectionPoint ProjectionPoint::coordinate(int d, int i) {
  if (d < 1 || i < 0 || i > d) throw InvalidInputError("ProjectionPoint::coordinate: need 0 <= i <= d");
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  for (int a = 0; a < i; ++a) p(a, a) = 1.0;
  const ComplexMatrix eye = ComplexMatrix::Identity(d, d);
  return ProjectionPoint(p, eye.leftCols(i), eye.rightCols(d - i));
}

ProjectionPoint ProjectionPoint::haar(int d, int i, Rng& rng) {
  if (d < 1 || i < 0 || i > d) throw InvalidInputError("ProjectionPoint::haar: need 0 <= i <= d");
  return from_basis(haar_unitary(d, rng).leftCols(i));
}

double projection_distance(const ProjectionPoint& a, const ProjectionPoint& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("projection_distance: dimension mismatch");
  return (a.matrix() - b.matrix()).norm();
}

double grassmannian_frobenius_diameter(int d, int i) {
  return std::sqrt(2.0 * std::min(i, d - i));
}

// ---------------------------------------------------------------------------
// Angles and perturbation

PrincipalAngles principal_angles(const ProjectionPoint& a, const ProjectionPoint& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("principal_angles: dimension mismatch");
  if (a.rank() != b.rank()) throw InvalidInputError("principal_angles: rank mismatch");
  if (a.rank() < 1) throw InvalidInputError("principal_angles: rank must be positive");
  const ComplexMatrix cross = a.basis().adjoint() * b.basis();
  Eigen::JacobiSVD<ComplexMatrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PrincipalAngles out;
  const auto& s = svd.singularValues();
  for (Eigen::Index l = 0; l < s.size(); ++l) {
    out.angles.push_back(std::acos(std::clamp(s(l), -1.0, 1.0)));
  }
  out.u_basis = a.basis() * svd.matrixU();
  out.v_basis = b.basis() * svd.matrixV();
  return out;
}

SinThetaResult sin_theta_check(const HermitianMatrix& a, const HermitianMatrix& a_hat, int i,
                               double delta) {
  if (a.dim() != a_hat.dim()) throw InvalidInputError("sin_theta_check: dimension mismatch");
  const int d = a.dim();
  if (i < 1 || i > d) throw InvalidInputError("sin_theta_check: need 1 <= i <= d");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidInputError("sin_theta_check: delta must be positive and finite");
  }
  const auto ea = eig_hermitian(a);
  const auto eh = eig_hermitian(a_hat);
  if (i < d) {
    const double sep_a = ea.values[i - 1] - eh.values[i];
    const double sep_h = eh.values[i - 1] - ea.values[i];
    if (sep_a < delta - kSeparationSlack || sep_h < delta - kSeparationSlack) {
      throw HypothesisError("sin_theta_check: eigenvalue separation below delta (" +
                            std::to_string(std::min(sep_a, sep_h)) + " < " +
                            std::to_string(delta) + ")");
    }
  }
  const ComplexMatrix u1 = ea.vectors.leftCols(i);
  const ComplexMatrix h1 = eh.vectors.leftCols(i);
  SinThetaResult r;
  r.lhs = (u1 * u1.adjoint() - h1 * h1.adjoint()).norm();
  r.rhs = frobenius_distance(a, a_hat) / delta;
  r.holds = r.lhs <= r.rhs + 1e-8;
  return r;
}

ComplexMatrix aligned_to_coordinates(const ComplexMatrix& range_basis, int offset) {
  const auto n = range_basis.rows();
  const auto r = range_basis.cols();
  if (offset < 0 || offset + r > n) {
    throw InvalidInputError("aligned_to_coordinates: coordinate block out of range");
  }
  if (r == 0) return ComplexMatrix(n, 0);
  const ComplexMatrix cross = range_basis.middleRows(offset, r);
  Eigen::JacobiSVD<ComplexMatrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return range_basis * svd.matrixV() * svd.matrixU().adjoint();
}

ComplexMatrix aligned_basis(const ProjectionPoint& p) {
  return aligned_to_coordinates(p.basis(), 0);
}

OrbitPoint packing_map_phi(const ProjectionPoint& p, const Spectrum& lambda, int i, int j) {
  const int d = lambda.dim();
  if (!(1 <= i && i < j && j <= d)) {
    throw InvalidInputError("packing_map_phi: need 1 <= i < j <= d");
  }
  const int n = d - j + i + 1;
  if (p.dim() != n || p.rank() != i) {
    throw InvalidInputError("packing_map_phi: p must lie in G_{d-j+i+1, i}");
  }
  ComplexMatrix psi(n, n);
  psi.leftCols(i) = aligned_to_coordinates(p.basis(), 0);
  psi.rightCols(n - i) = aligned_to_coordinates(p.complement(), i);

  std::vector<int> index(static_cast<std::size_t>(n));
  for (int a = 0; a < i; ++a) index[static_cast<std::size_t>(a)] = a;
  for (int a = i; a < n; ++a) index[static_cast<std::size_t>(a)] = j - 1 + (a - i);

  ComplexMatrix big = ComplexMatrix::Identity(d, d);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      big(index[static_cast<std::size_t>(r)], index[static_cast<std::size_t>(c)]) = psi(r, c);
    }
  }
  return OrbitPoint(std::move(big), lambda);
}

// ---------------------------------------------------------------------------
// Covering and packing

std::vector<std::size_t> greedy_separated_subset(std::span<const HermitianMatrix> candidates,
                                                 double separation, bool spectral_norm) {
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    bool far = true;
    for (std::size_t s : chosen) {
      const double dist = spectral_norm ? spectral_distance(candidates[c], candidates[s])
                                        : frobenius_distance(candidates[c], candidates[s]);
      if (dist <= separation) {
        far = false;
        break;
      }
    }
    if (far) chosen.push_back(c);
  }
  return chosen;
}

std::vector<OrbitPoint> covering_construct_orbit(const Spectrum& lambda, double zeta, Rng& rng,
                                                 int budget) {
  if (!(zeta > 0.0)) throw InvalidInputError("covering_construct_orbit: zeta must be positive");
  if (budget < 1) throw InvalidInputError("covering_construct_orbit: budget must be positive");
  std::vector<OrbitPoint> centers;
  std::vector<HermitianMatrix> materialized;
  int rejections = 0;
  while (rejections < budget) {
    auto candidate = haar_orbit_point(lambda, rng);
    auto h = candidate.materialize();
    bool far = true;
    for (const auto& c : materialized) {
      if (spectral_distance(h, c) <= zeta) {
        far = false;
        break;
      }
    }
    if (far) {
      centers.push_back(std::move(candidate));
      materialized.push_back(std::move(h));
      rejections = 0;
    } else {
      ++rejections;
    }
  }
  return centers;
}

PackingCertificate packing_lower_construct(const Spectrum& lambda, int i, int j, double zeta,
                                           double omega, Rng& rng,
                                           const PackingOptions& options) {
  const int d = lambda.dim();
  if (!(1 <= i && i < j && j <= d)) {
    throw InvalidInputError("packing_lower_construct: need 1 <= i < j <= d");
  }
  if (!(zeta > 0.0)) throw InvalidInputError("packing_lower_construct: zeta must be positive");
  if (!(omega > 0.0)) throw InvalidInputError("packing_lower_construct: omega must be positive");
  if (options.budget < 1 || options.max_points < 1) {
    throw InvalidInputError("packing_lower_construct: budget and max_points must be positive");
  }
  const double gap = lambda[i - 1] - lambda[j - 1];
  if (!(gap > 0.0)) {
    throw InvalidInputError("packing_lower_construct: lambda_i = lambda_j gives a degenerate map");
  }
  const int n = d - j + i + 1;
  const int m = n - i;

  PackingCertificate cert;
  cert.i = i;
  cert.j = j;
  cert.target_separation = zeta;
  cert.radius = omega;
  cert.grassmann_separation = zeta / gap;
  cert.grassmann_radius =
      std::isfinite(omega) ? omega / (2.0 * lambda.top()) : std::numeric_limits<double>::infinity();
  cert.center = OrbitPoint(ComplexMatrix::Identity(d, d), lambda);
  const auto center_h = cert.center.materialize();
  const auto identity_i = ProjectionPoint::coordinate(n, i);

  const double diameter = grassmannian_frobenius_diameter(n, i);
  const bool use_ball = cert.grassmann_radius < diameter;
  const double max_angle = use_ball ? std::asin(std::min(1.0, cert.grassmann_radius / std::sqrt(2.0)))
                                    : 0.0;
  const double real_dim = 2.0 * i * m;

  auto draw = [&]() -> ProjectionPoint {
    if (!use_ball) return ProjectionPoint::haar(n, i, rng);
    ComplexMatrix x(m, i);
    for (int c = 0; c < i; ++c) {
      for (int r = 0; r < m; ++r) x(r, c) = complex_normal(rng);
    }
    const double angle = max_angle * std::pow(uniform_open(rng), 1.0 / real_dim);
    x *= std::tan(angle) / x.norm();
    return ProjectionPoint::from_basis(graph_basis(x));
  };

  auto accept = [&](const ProjectionPoint& p) {
    if (use_ball && projection_distance(p, identity_i) >= cert.grassmann_radius) return false;
    for (const auto& q : cert.preimages) {
      if (projection_distance(p, q) <= cert.grassmann_separation) return false;
    }
    auto phi = packing_map_phi(p, lambda, i, j);
    if (std::isfinite(omega) && frobenius_distance(phi.materialize(), center_h) > omega) return false;
    cert.points.push_back(std::move(phi));
    cert.preimages.push_back(p);
    return true;
  };

  accept(identity_i);
  int rejections = 0;
  while (rejections < options.budget &&
         static_cast<int>(cert.points.size()) < options.max_points) {
    ++cert.candidates_tried;
    if (accept(draw())) {
      rejections = 0;
    } else {
      ++rejections;
    }
  }

  std::vector<HermitianMatrix> hs;
  for (const auto& p : cert.points) hs.push_back(p.materialize());
  for (std::size_t a = 0; a < hs.size(); ++a) {
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      cert.min_pairwise_dist = std::min(cert.min_pairwise_dist, frobenius_distance(hs[a], hs[b]));
    }
  }
  return cert;
}

CertificateCheck verify_packing_certificate(const PackingCertificate& cert) {
  CertificateCheck check;
  const auto center = cert.center.materialize();
  std::vector<HermitianMatrix> hs;
  hs.reserve(cert.points.size());
  check.orbit_ok = true;
  for (const auto& p : cert.points) {
    auto h = p.materialize();
    if (!(p.spectrum() == cert.center.spectrum())) check.orbit_ok = false;
    const auto ev = eigenvalues(h);
    for (int a = 0; a < p.dim(); ++a) {
      check.max_spectrum_error = std::max(
          check.max_spectrum_error, std::abs(ev[static_cast<std::size_t>(a)] - cert.center.spectrum()[a]));
    }
    check.max_center_dist = std::max(check.max_center_dist, frobenius_distance(h, center));
    hs.push_back(std::move(h));
  }
  if (check.max_spectrum_error > 1e-8) check.orbit_ok = false;
  for (std::size_t a = 0; a < hs.size(); ++a) {
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      check.min_pairwise_dist = std::min(check.min_pairwise_dist, frobenius_distance(hs[a], hs[b]));
    }
  }
  check.separation_ok = check.min_pairwise_dist >= cert.target_separation;
  check.containment_ok = !std::isfinite(cert.radius) || check.max_center_dist <= cert.radius;
  return check;
}

Json packing_certificate_to_json(const PackingCertificate& cert) {
  Json j;
  j["i"] = cert.i;
  j["j"] = cert.j;
  j["target_separation"] = cert.target_separation;
  j["radius"] = finite_or_null(cert.radius);
  j["grassmann_separation"] = cert.grassmann_separation;
  j["grassmann_radius"] = finite_or_null(cert.grassmann_radius);
  j["count"] = cert.points.size();
  j["min_pairwise_dist"] = finite_or_null(cert.min_pairwise_dist);
  j["candidates_tried"] = cert.candidates_tried;
  j["center"] = orbit_point_to_json(cert.center);
  Json points = Json::array();
  for (const auto& p : cert.points) points.push_back(orbit_point_to_json(p));
  j["points"] = std::move(points);
  Json pre = Json::array();
  for (const auto& p : cert.preimages) pre.push_back(matrix_to_json(p.matrix()));
  j["preimages"] = std::move(pre);
  return j;
}

Json certificate_check_to_json(const CertificateCheck& check) {
  Json j;
  j["separation_ok"] = check.separation_ok;
  j["containment_ok"] = check.containment_ok;
  j["orbit_ok"] = check.orbit_ok;
  j["min_pairwise_dist"] = finite_or_null(check.min_pairwise_dist);
  j["max_center_dist"] = check.max_center_dist;
  j["max_spectrum_error"] = check.max_spectrum_error;
  return j;
}

}  // namespace orbitdp
