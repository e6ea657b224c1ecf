#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "funceq/chebyshev.hpp"
#include "funceq/errors.hpp"
#include "funceq/operator.hpp"

namespace funceq {

inline constexpr double kCoeffFloor = 1e-13;
inline constexpr int kMinFitCoeffs = 16;
inline constexpr int kFitWindowStart = 8;
inline constexpr double kContractionMargin = 1e-9;

/// Fit of |c_j| ~ C*exp(-c*j^beta) to a coefficient tail; beta near
/// k/(k+1) is the expected Gevrey-k signature, beta near 1 means analytic.
struct DecayFit {
  bool valid = false;
  double beta = 0.0;
  double c = 0.0;
  double C = 0.0;
  int fit_lo = 0;
  int fit_hi = 0;
  int points_used = 0;
  double residual_of_fit = 0.0;
  double beta_target = 0.0;      // k/(k+1)
  bool below_target = false;     // beta < beta_target - 0.1 (diagnostic warning)
};

struct Solution {
  ChebRep phi;
  int iterations = 0;
  double residual = 0.0;
  double apriori_bound = 0.0;
  double aposteriori_bound = 0.0;
  double rho_used = 0.0;
  double truncation_budget = 0.0;
  DecayFit decay;
};

inline double apriori_bound(double rho, double norm_u, int m) {
  if (!(rho >= 0.0)) throw ConfigError("apriori_bound: rho must be nonnegative");
  if (rho >= 1.0) throw ContractionError(rho);
  return norm_u * std::pow(rho, m + 1) / (1.0 - rho);
}

/// Grid-search fit of log|c_j| = log C - c*j^beta over beta in
/// {0.05, 0.10, ..., 1.50}, linear least squares in (log C, c) per beta.
/// Uses only coefficients above the 1e-13 floor, window [8, last].
inline DecayFit fit_coeff_decay(const ChebRep& rep, double k_target) {
  const std::vector<double>& coeffs = rep.coeffs();
  std::vector<int> above;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (std::abs(coeffs[j]) > kCoeffFloor) above.push_back(static_cast<int>(j));
  if (static_cast<int>(above.size()) < kMinFitCoeffs)
    throw FitError("only " + std::to_string(above.size()) +
                   " coefficients above the 1e-13 floor; need " +
                   std::to_string(kMinFitCoeffs));

  const int last = above.back();
  std::vector<double> js, ys;
  for (int j : above) {
    if (j < kFitWindowStart) continue;
    js.push_back(static_cast<double>(j));
    ys.push_back(std::log(std::abs(coeffs[static_cast<std::size_t>(j)])));
  }
  if (js.size() < 2)
    throw FitError("fit window [8, " + std::to_string(last) +
                   "] holds fewer than 2 usable coefficients");

  DecayFit fit;
  double best_rms = 0.0;
  for (int step = 1; step <= 30; ++step) {
    const double beta = 0.05 * step;
    // Least squares for y = b0 - b1 * j^beta via 2x2 normal equations.
    double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < js.size(); ++i) {
      const double t = -std::pow(js[i], beta);
      s1 += 1.0; sx += t; sxx += t * t; sy += ys[i]; sxy += t * ys[i];
    }
    const double det = s1 * sxx - sx * sx;
    if (det == 0.0) continue;
    const double b0 = (sxx * sy - sx * sxy) / det;
    const double b1 = (s1 * sxy - sx * sy) / det;
    double ss = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
      const double r = ys[i] - (b0 - b1 * std::pow(js[i], beta));
      ss += r * r;
    }
    const double rms = std::sqrt(ss / static_cast<double>(js.size()));
    if (!fit.valid || rms < best_rms) {
      fit.valid = true;
      best_rms = rms;
      fit.beta = beta;
      fit.c = b1;
      fit.C = std::exp(b0);
      fit.residual_of_fit = rms;
    }
  }
  fit.fit_lo = static_cast<int>(js.front());
  fit.fit_hi = static_cast<int>(js.back());
  fit.points_used = static_cast<int>(js.size());
  fit.beta_target = k_target / (k_target + 1.0);
  fit.below_target = fit.beta < fit.beta_target - 0.1 - 1e-12;
  return fit;
}

/// Sup over a Chebyshev verification grid of |phi - T(phi) - u|, with T
/// summed directly from the term family (independent of apply_operator's
/// re-interpolation path).
inline double residual(const OperatorSpec& op, const ChebRep& phi, const ChebRep& u,
                       int grid = 1001) {
  if (grid < 101) throw ConfigError("residual grid must have at least 101 points");
  double worst = 0.0;
  for (double x : cheb_points(grid)) {
    const double r = phi(x) - eval_operator_terms(op, phi, x) - u(x);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Picard / Neumann iteration Phi_{m+1} = u + T(Phi_m) with the Banach
/// a posteriori stopping rule ||Phi_{m+1}-Phi_m|| * rho/(1-rho) <= tol.
inline Solution solve_neumann(const OperatorSpec& op, const ChebRep& u, double tol = 1e-11,
                              int max_iter = 200) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  const double rho = contraction_real(op);
  if (rho >= 1.0 - kContractionMargin) throw ContractionError(rho);

  Solution sol;
  sol.rho_used = rho;
  const double banach_factor = rho / (1.0 - rho);

  ChebRep cur = u;
  double bound = 0.0;
  bool converged = false;
  for (int m = 0; m < max_iter; ++m) {
    ChebRep next = combine(1.0, u, 1.0, apply_operator(op, cur));
    const double delta = sup_norm_interval(combine(1.0, next, -1.0, cur));
    cur = std::move(next);
    sol.iterations = m + 1;
    bound = delta * banach_factor;
    if (bound <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError(sol.iterations, bound);

  sol.phi = std::move(cur);
  sol.truncation_budget = op.tail_bound * sup_norm_interval(sol.phi) / (1.0 - rho);
  sol.aposteriori_bound = bound + sol.truncation_budget;
  sol.apriori_bound = apriori_bound(rho, sup_norm_interval(u), sol.iterations);
  sol.residual = residual(op, sol.phi, u);
  try {
    sol.decay = fit_coeff_decay(sol.phi, op.k);
  } catch (const FitError&) {
    sol.decay = DecayFit{};  // too few coefficients: diagnostic left invalid
  }
  return sol;
}

}  // namespace funceq
