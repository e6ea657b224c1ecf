#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "funceq/errors.hpp"
#include "funceq/expr.hpp"
#include "funceq/jet.hpp"

namespace funceq {

using Complex = std::complex<double>;

inline constexpr int kDefaultRealGrid = 2001;
inline constexpr int kDefaultBoundarySamples = 2000;
inline constexpr int kDefaultLambdaOrder = 25;
inline constexpr std::size_t kMaxStoredViolations = 256;

/// Distance from z to the interval [-1,1] (closed form).
inline double dist_to_interval(Complex z) {
  const double x = z.real(), y = z.imag();
  if (std::abs(x) <= 1.0) return std::abs(y);
  return std::hypot(std::abs(x) - 1.0, y);
}

/// Radius A * n^(-1/k) of the index-n stadium.
inline double strip_radius(double k, double A, int n) {
  return A * std::pow(static_cast<double>(n), -1.0 / k);
}

/// The stadium neighborhood of [-1,1] with radius A * n^(-1/k).
struct StripDomain {
  double k;
  double A;
  int n;

  double radius() const { return strip_radius(k, A, n); }
  bool contains(Complex z) const { return dist_to_interval(z) < radius(); }
};

/// Uniform grid of npoints on [-1,1] including the endpoints; for odd npoints
/// the midpoint is exactly 0 so that grid sup norms hit values at the origin.
inline std::vector<double> uniform_grid(int npoints) {
  std::vector<double> x(static_cast<std::size_t>(npoints));
  const int half = (npoints - 1) / 2;
  for (int i = 0; i < npoints; ++i) {
    if (npoints % 2 == 1)
      x[static_cast<std::size_t>(i)] = static_cast<double>(i - half) / half;
    else
      x[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (npoints - 1);
  }
  return x;
}

/// Grid sup norm of |f| over [-1,1] (sampled lower estimate of the true sup).
inline double expr_sup_norm_interval(const ExprPtr& f, int npoints = kDefaultRealGrid) {
  double sup = 0.0;
  for (double x : uniform_grid(npoints)) sup = std::max(sup, std::abs(eval_real(f, x)));
  return sup;
}

/// m points uniformly by arclength on the stadium boundary of radius r,
/// starting at -1+ir and walking clockwise (top edge, right cap, bottom
/// edge, left cap). Every point satisfies dist_to_interval(z) == r.
inline std::vector<Complex> stadium_boundary(double r, int m) {
  if (!(r > 0.0)) throw ConfigError("stadium radius must be positive");
  if (m < 8) throw ConfigError("need at least 8 boundary samples");
  const double perimeter = 4.0 + 2.0 * std::numbers::pi * r;
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double s = perimeter * i / m;
    if (s < 2.0) {
      pts.emplace_back(-1.0 + s, r);
    } else if (s < 2.0 + std::numbers::pi * r) {
      double theta = std::numbers::pi / 2 - (s - 2.0) / r;
      pts.emplace_back(1.0 + r * std::cos(theta), r * std::sin(theta));
    } else if (s < 4.0 + std::numbers::pi * r) {
      pts.emplace_back(1.0 - (s - 2.0 - std::numbers::pi * r), -r);
    } else {
      double theta = -std::numbers::pi / 2 - (s - 4.0 - std::numbers::pi * r) / r;
      pts.emplace_back(-1.0 + r * std::cos(theta), r * std::sin(theta));
    }
  }
  return pts;
}

inline std::vector<Complex> sample_strip_boundary(const StripDomain& d, int m) {
  return stadium_boundary(d.radius(), m);
}

/// Rightmost, leftmost, top-center and bottom-center boundary points.
inline std::vector<Complex> stadium_extreme_points(double r) {
  return {Complex(1.0 + r, 0.0), Complex(-1.0 - r, 0.0), Complex(0.0, r), Complex(0.0, -r)};
}

/// Sampled sup of |f| over the stadium of radius r: boundary samples plus the
/// extreme points (boundary suffices for holomorphic f by maximum modulus).
inline double strip_sup_norm(const ExprPtr& f, double r, int m = kDefaultBoundarySamples) {
  if (m < 64) throw ConfigError("strip_sup_norm needs at least 64 boundary samples");
  double sup = 0.0;
  auto visit = [&](Complex z) {
    double v = std::abs(eval_complex(f, z));
    if (!std::isfinite(v))
      throw EvalDomainError("non-finite value on stadium boundary of radius " + std::to_string(r));
    sup = std::max(sup, v);
  };
  for (Complex z : stadium_boundary(r, m)) visit(z);
  for (Complex z : stadium_extreme_points(r)) visit(z);
  return sup;
}

// ---------------------------------------------------------------------------
// Strip-nesting certificate: does every map send the index-(n+1) stadium into
// the index-n stadium? Checked on boundary samples only; the certificate is
// numerical, not a proof.

struct EkViolation {
  int map_index;  // position in the checked family
  int n;          // stadium index whose target radius was missed
  Complex z;      // sample on the boundary of the index-(n+1) stadium
  double observed_distance;
  double required_radius;
};

struct EkCertificate {
  double k = 0.0;
  double A = 0.0;
  int n_lo = 0;
  int n_hi = 0;
  int first_nested_index = -1;  // least n with no violation from there to n_hi; -1 if none
  double max_ratio = 0.0;       // worst dist(phi(z)) / target radius over all samples
  int samples_per_boundary = 0;
  std::size_t violation_count = 0;
  std::vector<EkViolation> violations;  // first kMaxStoredViolations witnesses

  bool pass() const { return violation_count == 0 && max_ratio < 1.0; }
};

/// Verify that each map sends [-1,1] into itself on a dense real grid
/// (tolerance matches the operator layer's roundoff guard).
inline void require_interval_invariance(const std::vector<ExprPtr>& maps,
                                        int npoints = 1001) {
  const std::vector<double> grid = uniform_grid(npoints);
  for (std::size_t p = 0; p < maps.size(); ++p) {
    for (double x : grid) {
      double y = eval_real(maps[p], x);
      if (!(std::abs(y) <= 1.0 + 1e-12)) throw InvalidMapError(p, x, y);
    }
  }
}

inline EkCertificate check_Ek(const std::vector<ExprPtr>& maps, double k, double A,
                              int n_lo, int n_hi, int m = kDefaultBoundarySamples) {
  if (!(k > 0.0)) throw ConfigError("Gevrey index k must be positive");
  if (!(A > 0.0)) throw ConfigError("width scale A must be positive");
  if (n_lo < 1 || n_hi < n_lo) throw ConfigError("stadium index range must satisfy 1 <= n_lo <= n_hi");
  require_interval_invariance(maps);
  EkCertificate cert;
  cert.k = k;
  cert.A = A;
  cert.n_lo = n_lo;
  cert.n_hi = n_hi;
  cert.samples_per_boundary = m;

  std::vector<char> n_clean(static_cast<std::size_t>(n_hi - n_lo + 1), 1);
  for (std::size_t p = 0; p < maps.size(); ++p) {
    for (int n = n_lo; n <= n_hi; ++n) {
      const double source_radius = strip_radius(k, A, n + 1);
      const double target_radius = strip_radius(k, A, n);
      std::vector<Complex> samples = stadium_boundary(source_radius, m);
      for (Complex z : stadium_extreme_points(source_radius)) samples.push_back(z);
      for (Complex z : samples) {
        const double d = dist_to_interval(eval_complex(maps[p], z));
        cert.max_ratio = std::max(cert.max_ratio, d / target_radius);
        if (d >= target_radius) {
          n_clean[static_cast<std::size_t>(n - n_lo)] = 0;
          ++cert.violation_count;
          if (cert.violations.size() < kMaxStoredViolations)
            cert.violations.push_back(
                {static_cast<int>(p), n, z, d, target_radius});
        }
      }
    }
  }

  cert.first_nested_index = -1;
  for (int n = n_hi; n >= n_lo; --n) {
    if (!n_clean[static_cast<std::size_t>(n - n_lo)]) break;
    cert.first_nested_index = n;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// The Gevrey functional lambda(psi) = sup_n (||psi^(n)||/n!)^(1/n), truncated
// at a finite derivative order. Derivative norms come from Taylor-jet
// evaluation on a real grid, which yields psi^(n)(x)/n! directly.

struct LambdaReport {
  int n_max = 0;
  std::vector<double> per_n;  // per_n[i] = (||psi^(i+1)||/ (i+1)!)^(1/(i+1))
  double lambda_hat = 0.0;
  int arg_max = 0;
  bool sup_possibly_truncated = false;  // max attained at the truncation order
};

inline LambdaReport estimate_lambda(const ExprPtr& psi, int n_max = kDefaultLambdaOrder,
                                    int grid_points = kDefaultRealGrid) {
  LambdaReport report;
  report.n_max = n_max;
  std::vector<double> coeff_sup(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (double x : uniform_grid(grid_points)) {
    Jet jet = taylor_jet(psi, x, static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n)
      coeff_sup[static_cast<std::size_t>(n)] =
          std::max(coeff_sup[static_cast<std::size_t>(n)],
                   std::abs(jet.c[static_cast<std::size_t>(n)]));
  }
  report.per_n.resize(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    double v = std::pow(coeff_sup[static_cast<std::size_t>(n)], 1.0 / n);
    report.per_n[static_cast<std::size_t>(n - 1)] = v;
    if (v > report.lambda_hat) {
      report.lambda_hat = v;
      report.arg_max = n;
    }
  }
  report.sup_possibly_truncated = (report.arg_max == n_max);
  return report;
}

}  // namespace funceq
