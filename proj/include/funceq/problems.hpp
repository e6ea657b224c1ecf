#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "funceq/errors.hpp"
#include "funceq/expr.hpp"
#include "funceq/operator.hpp"

namespace funceq {

/// A ready-to-run equation instance Phi - T(Phi) = u.
struct ProblemSpec {
  int id = 0;
  OperatorSpec op;
  ExprPtr u;
  double k = 1.0;
  std::string notes;
};

namespace detail {

struct FamilyText {
  const char* a;
  const char* phi;
  double sigma;
};

inline OperatorSpec family_operator(const FamilyText& fam, int trunc_N, double tail_bound,
                                    double k) {
  const ExprPtr a_tpl = parse_expr(fam.a);
  const ExprPtr phi_tpl = parse_expr(fam.phi);
  std::vector<TermSpec> terms;
  terms.reserve(static_cast<std::size_t>(trunc_N));
  for (int n = 1; n <= trunc_N; ++n)
    terms.push_back({bind_family_index(a_tpl, n), bind_family_index(phi_tpl, n), fam.sigma});
  return build_operator(std::move(terms), tail_bound, k);
}

}  // namespace detail

/// The four shipped instances. All use u = -x and k = 1; the free sequences
/// are fixed as noted. Families 2-4 are truncated at trunc_N terms with the
/// closed-form geometric tail bound.
inline ProblemSpec paper_example(int id, int trunc_N = 30) {
  ProblemSpec p;
  p.id = id;
  p.k = 1.0;
  p.u = parse_expr("-x");
  switch (id) {
    case 1: {
      std::vector<TermSpec> terms{{parse_expr("0.5"), parse_expr("sin(x)"), 0.5}};
      p.op = build_operator(std::move(terms), 0.0, 1.0);
      p.notes = "Phi(x) - 0.5*Phi(sin x) = -x";
      return p;
    }
    case 2: {
      if (trunc_N < 1) throw ConfigError("trunc_N must be at least 1");
      p.op = detail::family_operator({"1/2^(n+2)", "sin(x/(n+1))", 0.5}, trunc_N,
                                     std::pow(2.0, -(trunc_N + 2)), 1.0);
      p.notes = "a_n = 2^-(n+2), phi_n = sin(x/(n+1)), n = 1..N";
      return p;
    }
    case 3: {
      if (trunc_N < 1) throw ConfigError("trunc_N must be at least 1");
      p.op = detail::family_operator({"x^2/(2^(n+1)*(x^2+1))", "sin(sin(x - 1/n))", 0.25},
                                     trunc_N, std::pow(2.0, -(trunc_N + 2)), 1.0);
      p.notes = "a_n = x^2/(2^(n+1)(x^2+1)), phi_n = sin(sin(x - 1/n)), n = 1..N";
      return p;
    }
    case 4: {
      if (trunc_N < 1) throw ConfigError("trunc_N must be at least 1");
      p.op = detail::family_operator({"cos((-1)^n*x)/2^(n+1)", "iter_scaled(sin(x), n)", 0.5},
                                     trunc_N, std::pow(2.0, -(trunc_N + 1)), 1.0);
      p.notes = "a_n = cos((-1)^n x)/2^(n+1), phi_n = n-fold sin of x/2^(n-1), n = 1..N";
      return p;
    }
    default:
      throw ConfigError("unknown example id " + std::to_string(id) + " (want 1..4)");
  }
}

/// Width-scale grid for certification: the standard {0.1, 0.2, 0.4} clipped
/// to the family's analyticity width (A may not exceed min sigma).
inline std::vector<double> default_A_grid(const OperatorSpec& op) {
  const double sigma_lo = min_sigma(op);
  std::vector<double> grid;
  for (double A : {0.1, 0.2, 0.4})
    if (A <= sigma_lo + 1e-15) grid.push_back(A);
  if (grid.empty()) grid.push_back(sigma_lo / 2.0);
  return grid;
}

/// Direct partial sum of the Example-1 series
/// Phi(x) = -sum_{n=0}^{n_terms-1} 2^-n * sin_iterated_n(x); the dropped
/// tail is at most 2^-(n_terms-1) since every iterate stays in [-1,1].
inline double oracle_example1(double x, int n_terms) {
  if (!(x >= -1.0 && x <= 1.0))
    throw IntervalDomainError("oracle evaluated outside [-1,1] at x = " + std::to_string(x));
  if (n_terms < 1) throw ConfigError("n_terms must be at least 1");
  double sum = 0.0;
  double cur = x;
  double w = 1.0;
  for (int n = 0; n < n_terms; ++n) {
    sum += w * cur;
    cur = std::sin(cur);
    w *= 0.5;
  }
  return -sum;
}

}  // namespace funceq
