#ifndef ORBITDP_TYPES_H_
#define ORBITDP_TYPES_H_

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace orbitdp {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Input rejected by a precondition check (bad shape, non-finite entries,
// norm violations, out-of-range parameters).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The hypothesis of a perturbation bound does not hold for the given inputs.
// This is not a failure of the bound itself.
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Tolerances shared across modules.
inline constexpr double kHermitianRejectTol = 1e-8;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;

}  // namespace orbitdp

#endif  // ORBITDP_TYPES_H_
