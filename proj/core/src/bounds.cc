#include "orbitdp/bounds.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "orbitdp/mechanisms.h"

namespace orbitdp {
namespace {

constexpr const char* kConstantsNote =
    "c and C are unspecified universal constants (placeholders shown); only tau is an "
    "absolute bound";

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::vector<std::pair<std::string, std::string>> report_rows(const BoundReport& r) {
  return {
      {"d", std::to_string(r.d)},
      {"k", std::to_string(r.k)},
      {"epsilon", fmt(r.epsilon)},
      {"beta", fmt(r.beta)},
      {"zeta", fmt(r.zeta)},
      {"constant_c", fmt(r.constants.c)},
      {"constant_C", fmt(r.constants.C)},
      {"optimum", fmt(r.optimum)},
      {"tau", fmt(r.tau)},
      {"upper_utility_bound", fmt(r.upper_utility_bound)},
      {"utility_floor", fmt(r.utility_floor)},
      {"tail_quantile", fmt(r.tail_quantile)},
      {"rank_k_error_bound", fmt(r.rank_k_error_bound)},
      {"lower_error_bound", fmt(r.lower_error_bound)},
      {"lower_maximand", fmt(r.lower_maximand)},
      {"lower_argmax", std::to_string(r.lower_argmax)},
      {"log_covering_upper", fmt(r.log_covering_upper)},
      {"covering_upper", fmt(r.covering_upper)},
      {"log_packing_lower", fmt(r.log_packing_lower)},
      {"packing_lower", fmt(r.packing_lower)},
      {"sandwich_consistent", r.sandwich_consistent ? "true" : "false"},
  };
}

}  // namespace

BoundReport evaluate_bounds(const Spectrum& gamma, const Spectrum& lambda, int d, int k,
                            double epsilon, double beta, const BoundConstants& constants,
                            double zeta) {
  if (gamma.dim() != d || lambda.dim() != d) {
    throw InvalidInputError("evaluate_bounds: spectra must have length d");
  }
  if (k < 1 || k > d) throw InvalidInputError("evaluate_bounds: need 1 <= k <= d");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInputError("evaluate_bounds: epsilon must be positive");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInputError("evaluate_bounds: beta must lie in (0, 1)");
  if (!(constants.c > 0.0) || !(constants.C > 0.0)) {
    throw InvalidInputError("evaluate_bounds: constants must be positive");
  }
  for (double v : lambda.values()) {
    if (v < 0.0) throw InvalidInputError("evaluate_bounds: lambda must be non-negative");
  }

  BoundReport r;
  r.d = d;
  r.k = k;
  r.epsilon = epsilon;
  r.beta = beta;
  r.constants = constants;
  r.constants_note = kConstantsNote;
  const double l1 = lambda.top();
  r.zeta = zeta > 0.0 ? zeta : (l1 > 0.0 ? l1 / 4.0 : 1.0);

  r.optimum = schur_horn_optimum(gamma, lambda);
  r.tau = utility_tau(gamma, lambda, epsilon, beta, k);
  r.upper_utility_bound = r.tau;
  r.utility_floor = r.optimum - r.tau;
  r.tail_quantile = utility_tail_quantile(gamma, lambda, epsilon, beta, k);

  const double log_inv_beta = std::log(1.0 / beta);
  const double g1 = std::max(0.0, gamma.top());
  const double big_gamma = std::max(0.0, gamma.sum());
  const double tail = gamma.sum_of_squares_after(k);
  const double noise = static_cast<double>(k) / (epsilon * epsilon) * log_inv_beta * log_inv_beta +
                       (g1 + log_inv_beta / epsilon) / epsilon *
                           (static_cast<double>(d) * k * std::log(std::numbers::e + big_gamma) +
                            log_inv_beta);
  r.rank_k_error_bound = tail + constants.C * noise;

  double best = 0.0;
  int best_i = 0;
  for (int i = 1; i <= d / 2; ++i) {
    const double diff = gamma[i - 1] - gamma[d - i];
    const double value = i * diff * diff;
    if (value > best) {
      best = value;
      best_i = i;
    }
  }
  r.lower_maximand = best;
  r.lower_argmax = best_i;
  const double denom = std::max(g1 * std::sqrt(epsilon), std::sqrt(static_cast<double>(d)));
  r.lower_error_bound = constants.c * (tail + static_cast<double>(d) / (denom * denom) * best);

  r.log_covering_upper = 2.0 * d * k * std::log1p(8.0 * l1 / r.zeta);
  r.covering_upper = std::exp(r.log_covering_upper);

  double log_pack = 0.0;
  for (int i = 1; i <= d; ++i) {
    for (int j = i + 1; j <= d; ++j) {
      const double gap = lambda[i - 1] - lambda[j - 1];
      if (!(gap > 0.0)) continue;
      const double width = std::min(std::sqrt(static_cast<double>(i)),
                                    std::sqrt(static_cast<double>(d - j + 1)));
      const double arg = constants.c * width * gap / (2.0 * r.zeta);
      log_pack = std::max(log_pack, 2.0 * i * (d - j + 1) * std::log(arg));
    }
  }
  r.log_packing_lower = log_pack;
  r.packing_lower = std::exp(log_pack);
  r.sandwich_consistent = r.log_packing_lower <= r.log_covering_upper;
  return r;
}

Json bound_report_to_json(const BoundReport& r) {
  Json j;
  j["d"] = r.d;
  j["k"] = r.k;
  j["epsilon"] = r.epsilon;
  j["beta"] = r.beta;
  j["zeta"] = r.zeta;
  j["constants"] = {{"c", r.constants.c}, {"C", r.constants.C}};
  j["optimum"] = r.optimum;
  j["tau"] = r.tau;
  j["upper_utility_bound"] = r.upper_utility_bound;
  j["utility_floor"] = r.utility_floor;
  j["tail_quantile"] = r.tail_quantile;
  j["rank_k_error_bound"] = r.rank_k_error_bound;
  j["lower_error_bound"] = r.lower_error_bound;
  j["lower_maximand"] = r.lower_maximand;
  j["lower_argmax"] = r.lower_argmax;
  j["log_covering_upper"] = r.log_covering_upper;
  j["covering_upper"] = finite_or_null(r.covering_upper);
  j["log_packing_lower"] = r.log_packing_lower;
  j["packing_lower"] = finite_or_null(r.packing_lower);
  j["sandwich_consistent"] = r.sandwich_consistent;
  j["constants_note"] = r.constants_note;
  return j;
}

std::string bound_report_to_csv(const BoundReport& r) {
  const auto rows = report_rows(r);
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << rows[i].first;
  out << ",constants_note\n";
  for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << rows[i].second;
  out << ",\"" << r.constants_note << "\"\n";
  return out.str();
}

std::string bound_report_to_table(const BoundReport& r) {
  const auto rows = report_rows(r);
  std::size_t width = 0;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  for (const auto& [name, value] : rows) {
    out << name << std::string(width - name.size() + 2, ' ') << value << '\n';
  }
  out << "note" << std::string(width - 2, ' ') << r.constants_note << '\n';
  return out.str();
}

}  // namespace orbitdp
