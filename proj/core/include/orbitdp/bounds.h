#ifndef ORBITDP_BOUNDS_H_
#define ORBITDP_BOUNDS_H_

#include <string>

#include "orbitdp/matrix_io.h"
#include "orbitdp/spectra.h"

namespace orbitdp {

// Universal constants of the asymptotic bounds. Their true values are
// unknown; 1 is a placeholder.
struct BoundConstants {
  double c = 1.0;  // lower-bound and packing constant
  double C = 1.0;  // upper-bound constant
};

struct BoundReport {
  int d = 0;
  int k = 0;
  double epsilon = 0.0;
  double beta = 0.0;
  double zeta = 0.0;
  BoundConstants constants;

  double optimum = 0.0;             // sum gamma_i lambda_i
  double tau = 0.0;                 // explicit utility-gap bound, probability 1 - beta
  double upper_utility_bound = 0.0; // = tau
  double utility_floor = 0.0;       // optimum - tau
  double tail_quantile = 0.0;       // smallest t with tail bound <= beta
  double rank_k_error_bound = 0.0;
  double lower_error_bound = 0.0;
  double lower_maximand = 0.0;      // max_i i (gamma_i - gamma_{d-i+1})^2
  int lower_argmax = 0;             // 1-based
  double log_covering_upper = 0.0;  // log of (1 + 8 lambda_1 / zeta)^{2dk}
  double covering_upper = 0.0;
  double log_packing_lower = 0.0;   // at separation 2 zeta
  double packing_lower = 0.0;
  bool sandwich_consistent = true;  // log_packing_lower <= log_covering_upper
  std::string constants_note;
};

// gamma: spectrum of the input; lambda: orbit target. zeta <= 0 selects
// lambda_1 / 4 (or 1 when lambda_1 = 0).
BoundReport evaluate_bounds(const Spectrum& gamma, const Spectrum& lambda, int d, int k,
                            double epsilon, double beta, const BoundConstants& constants = {},
                            double zeta = 0.0);

Json bound_report_to_json(const BoundReport& r);
std::string bound_report_to_csv(const BoundReport& r);
std::string bound_report_to_table(const BoundReport& r);

}  // namespace orbitdp

#endif  // ORBITDP_BOUNDS_H_
