#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "funceq/errors.hpp"

namespace funceq {

inline constexpr double kDefaultChopTol = 1e-14;
inline constexpr int kDefaultMaxDegree = 1 << 15;
inline constexpr int kMinInterpDegree = 16;

/// Chebyshev points of the second kind, x_j = cos(j*pi/n), j = 0..n
/// (descending from 1 to -1; includes both endpoints).
inline std::vector<double> cheb_points(int n) {
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  if (n == 0) {
    x[0] = 1.0;
    return x;
  }
  for (int j = 0; j <= n; ++j)
    x[static_cast<std::size_t>(j)] = std::cos(std::numbers::pi * j / n);
  // pin the symmetric entries so parity survives roundoff
  x[static_cast<std::size_t>(n)] = -1.0;
  if (n % 2 == 0) x[static_cast<std::size_t>(n / 2)] = 0.0;
  return x;
}

namespace detail {

// DCT of samples at the second-kind points: values v_j = f(cos(j*pi/n)) to
// series coefficients of sum c_k T_k. Direct O(n^2) summation with a
// precomputed cosine table (cos(j*k*pi/n) = table[(j*k) mod 2n]).
inline std::vector<double> coeffs_from_values(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  std::vector<double> c(v.size(), 0.0);
  if (n == 0) {
    c[0] = v[0];
    return c;
  }
  std::vector<double> table(2 * static_cast<std::size_t>(n));
  for (int m = 0; m < 2 * n; ++m)
    table[static_cast<std::size_t>(m)] = std::cos(std::numbers::pi * m / n);
  for (int k = 0; k <= n; ++k) {
    double s = 0.5 * v[0];  // j = 0 term, cos(0) = 1
    for (int j = 1; j < n; ++j) {
      long long idx = (static_cast<long long>(j) * k) % (2 * n);
      s += v[static_cast<std::size_t>(j)] * table[static_cast<std::size_t>(idx)];
    }
    s += 0.5 * v[static_cast<std::size_t>(n)] * (k % 2 == 0 ? 1.0 : -1.0);
    double scale = (k == 0 || k == n) ? 1.0 / n : 2.0 / n;
    c[static_cast<std::size_t>(k)] = scale * s;
  }
  return c;
}

inline double clenshaw(const std::vector<double>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    double b = c[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b;
  }
  return c[0] + x * b1 - b2;
}

}  // namespace detail

/// A function on [-1,1] stored as Chebyshev-T coefficients: f = sum c_k T_k(x).
class ChebRep {
 public:
  ChebRep() : coeffs_{0.0}, tol_(kDefaultChopTol) {}
  explicit ChebRep(std::vector<double> coeffs, double tol = kDefaultChopTol)
      : coeffs_(std::move(coeffs)), tol_(tol) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  double tol() const { return tol_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  double operator()(double x) const {
    if (!(x >= -1.0 && x <= 1.0))
      throw IntervalDomainError("evaluation point " + std::to_string(x) +
                                " outside [-1,1]");
    return detail::clenshaw(coeffs_, x);
  }

 private:
  std::vector<double> coeffs_;
  double tol_;
};

/// Drop the maximal trailing block with |c_k| <= tol * max|c|; keeps c_0.
inline ChebRep chop(std::vector<double> coeffs, double tol) {
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  const double floor = tol * scale;
  std::size_t keep = coeffs.size();
  while (keep > 1 && std::abs(coeffs[keep - 1]) <= floor) --keep;
  coeffs.resize(keep);
  return ChebRep(std::move(coeffs), tol);
}

namespace detail {

inline int round_up_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Trailing-coefficient plateau test: the last `window` coefficients are all
// below tol * scale.
inline bool plateaued(const std::vector<double>& c, double threshold, int window) {
  if (static_cast<int>(c.size()) < window) return false;
  for (std::size_t i = c.size() - static_cast<std::size_t>(window); i < c.size(); ++i)
    if (std::abs(c[i]) > threshold) return false;
  return true;
}

}  // namespace detail

/// Adaptive interpolation: sample at second-kind points, doubling the degree
/// from `start_degree` until the trailing coefficients fall below
/// tol * max|f sample|; the result is chopped at tol.
inline ChebRep interpolate(const std::function<double(double)>& f, double tol = kDefaultChopTol,
                           int max_degree = kDefaultMaxDegree,
                           int start_degree = kMinInterpDegree) {
  int n = std::max(kMinInterpDegree, detail::round_up_pow2(start_degree));
  std::vector<double> coeffs;
  for (;; n *= 2) {
    if (n > max_degree) break;
    const std::vector<double> x = cheb_points(n);
    std::vector<double> v(x.size());
    double scale = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      v[j] = f(x[j]);
      scale = std::max(scale, std::abs(v[j]));
    }
    coeffs = detail::coeffs_from_values(v);
    if (detail::plateaued(coeffs, tol * scale, 3)) return chop(std::move(coeffs), tol);
  }
  std::size_t tail = std::min<std::size_t>(coeffs.size(), 16);
  std::vector<double> envelope(tail);
  for (std::size_t i = 0; i < tail; ++i)
    envelope[i] = std::abs(coeffs[coeffs.size() - tail + i]);
  throw ResolutionError(max_degree, std::move(envelope));
}

/// Coefficient recurrence for the derivative series; the degree drops by one.
inline ChebRep differentiate(const ChebRep& f) {
  const auto& c = f.coeffs();
  const int n = f.degree();
  if (n == 0) return ChebRep({0.0}, f.tol());
  std::vector<double> d(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = n; k >= 1; --k)
    d[static_cast<std::size_t>(k - 1)] =
        (k + 1 <= n ? d[static_cast<std::size_t>(k + 1)] : 0.0) +
        2.0 * k * c[static_cast<std::size_t>(k)];
  d[0] *= 0.5;
  d.resize(static_cast<std::size_t>(n));
  return ChebRep(std::move(d), f.tol());
}

/// Coefficientwise alpha*f + beta*g, chopped at max(f.tol, g.tol).
inline ChebRep combine(double alpha, const ChebRep& f, double beta, const ChebRep& g) {
  const auto& a = f.coeffs();
  const auto& b = g.coeffs();
  std::vector<double> c(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = alpha * a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] += beta * b[i];
  return chop(std::move(c), std::max(f.tol(), g.tol()));
}

/// Sampled sup norm over [-1,1]: max |f| on a 10*(N+1)-point second-kind grid
/// (endpoints included). A certified upper bound is coeff_norm_bound below.
inline double sup_norm_interval(const ChebRep& f) {
  const int m = 10 * (f.degree() + 1);
  const std::vector<double> x = cheb_points(std::max(m - 1, 1));
  double sup = 0.0;
  for (double xi : x) sup = std::max(sup, std::abs(f(xi)));
  return sup;
}

/// sum |c_k| >= sup |f| on [-1,1].
inline double coeff_norm_bound(const ChebRep& f) {
  double s = 0.0;
  for (double c : f.coeffs()) s += std::abs(c);
  return s;
}

}  // namespace funceq
