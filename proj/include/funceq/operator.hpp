#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "funceq/chebyshev.hpp"
#include "funceq/errors.hpp"
#include "funceq/expr.hpp"
#include "funceq/strip.hpp"

namespace funceq {

/// One term a(x) * f(phi(x)) of the operator, with the analyticity half-width
/// sigma claimed for both a and phi.
struct TermSpec {
  ExprPtr a;
  ExprPtr phi;
  double sigma = 0.0;
};

/// T(f) = sum over terms of a_p * (f o phi_p), truncated; tail_bound bounds
/// the strip sup norms of the dropped coefficients.
struct OperatorSpec {
  std::vector<TermSpec> terms;
  double tail_bound = 0.0;
  double k = 1.0;
};

inline double min_sigma(const OperatorSpec& op) {
  double s = std::numeric_limits<double>::infinity();
  for (const TermSpec& t : op.terms) s = std::min(s, t.sigma);
  return s;
}

/// Validates the term family: sigma positive, each phi keeps the real
/// interval invariant, and both a and phi evaluate to finite values on the
/// closed sigma-stadium. Contraction is checked later, at solve time.
inline OperatorSpec build_operator(std::vector<TermSpec> terms, double tail_bound, double k) {
  if (!(k > 0.0)) throw ConfigError("Gevrey index k must be positive");
  if (!(tail_bound >= 0.0)) throw ConfigError("tail_bound must be nonnegative");
  for (std::size_t p = 0; p < terms.size(); ++p) {
    if (!(terms[p].sigma > 0.0))
      throw ConfigError("term " + std::to_string(p) + ": sigma must be positive");
    if (!terms[p].a || !terms[p].phi)
      throw ConfigError("term " + std::to_string(p) + ": missing expression");
  }
  std::vector<ExprPtr> maps;
  maps.reserve(terms.size());
  for (const TermSpec& t : terms) maps.push_back(t.phi);
  require_interval_invariance(maps);
  for (std::size_t p = 0; p < terms.size(); ++p) {
    // Finiteness probe on the claimed analyticity stadium (sampled).
    strip_sup_norm(terms[p].a, terms[p].sigma, 128);
    strip_sup_norm(terms[p].phi, terms[p].sigma, 128);
  }
  return OperatorSpec{std::move(terms), tail_bound, k};
}

/// Sum of the coefficient sup norms over [-1,1] plus the tail bound.
inline double contraction_real(const OperatorSpec& op, int npoints = kDefaultRealGrid) {
  double sum = 0.0;
  for (const TermSpec& t : op.terms) sum += expr_sup_norm_interval(t.a, npoints);
  return sum + op.tail_bound;
}

/// Sum of the coefficient sup norms over each term's own sigma-stadium plus
/// the tail bound; pair with min_sigma() when reporting.
inline double contraction_strip(const OperatorSpec& op, int m = kDefaultBoundarySamples) {
  double sum = 0.0;
  for (const TermSpec& t : op.terms) sum += strip_sup_norm(t.a, t.sigma, m);
  return sum + op.tail_bound;
}

namespace detail {

inline double clamp_inner(double y, std::size_t term_index, double x) {
  if (y > 1.0) {
    if (y > 1.0 + 1e-12) throw InvalidMapError(term_index, x, y);
    return 1.0;
  }
  if (y < -1.0) {
    if (y < -1.0 - 1e-12) throw InvalidMapError(term_index, x, y);
    return -1.0;
  }
  return y;
}

inline unsigned roundup_pow2(unsigned v) {
  unsigned p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace detail

/// Pointwise sum of the terms at x, ascending term order. The independent
/// evaluation path used by residual checks as well.
inline double eval_operator_terms(const OperatorSpec& op, const ChebRep& f, double x) {
  double sum = 0.0;
  for (std::size_t p = 0; p < op.terms.size(); ++p) {
    const TermSpec& t = op.terms[p];
    double y = detail::clamp_inner(eval_real(t.phi, x), p, x);
    sum += eval_real(t.a, x) * f(y);
  }
  return sum;
}

/// T(f) as a ChebRep: adaptive re-interpolation of x -> sum a_p(x) f(phi_p(x)).
inline ChebRep apply_operator(const OperatorSpec& op, const ChebRep& f,
                              double tol = kDefaultChopTol) {
  const unsigned start = detail::roundup_pow2(
      std::max(2u * static_cast<unsigned>(f.degree() > 0 ? f.degree() : 1), 64u));
  return interpolate([&](double x) { return eval_operator_terms(op, f, x); }, tol,
                     kDefaultMaxDegree, static_cast<int>(start));
}

// ---------------------------------------------------------------------------
// Combined operator certificate: contraction constants on the interval and on
// the analyticity stadia, plus strip-nesting certificates for the inner maps
// across a grid of width scales A.

struct AkCertificate {
  double k = 0.0;
  std::vector<double> A_grid;
  double rho_real = 0.0;
  double rho_strip = 0.0;
  double sigma_min = 0.0;
  std::vector<EkCertificate> ek;  // one per tested A
  std::vector<int> N_A;           // first nested index per tested A (-1 if none)
  double tau_candidate = 0.0;     // largest tested A whose nesting check passed
  bool pass = false;
};

inline AkCertificate certify_Ak(const OperatorSpec& op, const std::vector<double>& A_grid,
                                int n_lo = 1, int n_hi = 50,
                                int m = kDefaultBoundarySamples) {
  const double sigma_lo = min_sigma(op);
  if (A_grid.empty()) throw ConfigError("A_grid must be nonempty");
  for (double A : A_grid) {
    if (!(A > 0.0)) throw ConfigError("A_grid entries must be positive");
    if (A > sigma_lo + 1e-15)
      throw ConfigError("A_grid entry " + std::to_string(A) +
                        " exceeds the family analyticity width " + std::to_string(sigma_lo));
  }

  AkCertificate cert;
  cert.k = op.k;
  cert.A_grid = A_grid;
  cert.rho_real = contraction_real(op);
  cert.rho_strip = contraction_strip(op, m);
  cert.sigma_min = sigma_lo;

  std::vector<ExprPtr> maps;
  maps.reserve(op.terms.size());
  for (const TermSpec& t : op.terms) maps.push_back(t.phi);

  bool all_ek = true;
  for (double A : A_grid) {
    EkCertificate e = check_Ek(maps, op.k, A, n_lo, n_hi, m);
    cert.N_A.push_back(e.first_nested_index);
    if (e.pass()) cert.tau_candidate = std::max(cert.tau_candidate, A);
    all_ek = all_ek && e.pass();
    cert.ek.push_back(std::move(e));
  }
  cert.pass = cert.rho_strip < 1.0 && all_ek;
  return cert;
}

}  // namespace funceq
