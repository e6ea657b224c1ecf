#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "funceq/errors.hpp"
#include "funceq/expr.hpp"

namespace funceq {

// Truncated Taylor series ("jet") arithmetic. A jet holds the scaled
// derivatives f^(i)(x0)/i! of a function at a base point, which is exactly
// the quantity the Gevrey functional lambda needs. Evaluating an expression
// tree in jet arithmetic yields all derivatives up to the truncation order in
// O(order^2) per node, where repeated symbolic differentiation of composed
// maps would blow up combinatorially.

struct Jet {
  std::vector<double> c;  // c[i] = f^(i)(x0)/i!

  explicit Jet(std::size_t order) : c(order + 1, 0.0) {}
  std::size_t order() const { return c.size() - 1; }
};

namespace jets {

inline Jet from_constant(double v, std::size_t order) {
  Jet j(order);
  j.c[0] = v;
  return j;
}

inline Jet from_variable(double x0, std::size_t order) {
  Jet j(order);
  j.c[0] = x0;
  if (order >= 1) j.c[1] = 1.0;
  return j;
}

inline Jet neg(const Jet& a) {
  Jet r(a.order());
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = -a.c[i];
  return r;
}

inline Jet add(const Jet& a, const Jet& b) {
  Jet r(a.order());
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

inline Jet sub(const Jet& a, const Jet& b) {
  Jet r(a.order());
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

inline Jet mul(const Jet& a, const Jet& b) {
  Jet r(a.order());
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += a.c[j] * b.c[i - j];
    r.c[i] = s;
  }
  return r;
}

inline Jet div(const Jet& a, const Jet& b) {
  if (b.c[0] == 0.0) throw EvalDomainError("division by zero");
  Jet r(a.order());
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    double s = a.c[i];
    for (std::size_t j = 1; j <= i; ++j) s -= b.c[j] * r.c[i - j];
    r.c[i] = s / b.c[0];
  }
  return r;
}

// sin and cos share the recurrence, so compute them together.
inline std::pair<Jet, Jet> sin_cos(const Jet& a) {
  const std::size_t order = a.order();
  Jet s(order), c(order);
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (std::size_t k = 1; k <= order; ++k) {
    double ds = 0.0, dc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      ds += static_cast<double>(j) * a.c[j] * c.c[k - j];
      dc += static_cast<double>(j) * a.c[j] * s.c[k - j];
    }
    s.c[k] = ds / static_cast<double>(k);
    c.c[k] = -dc / static_cast<double>(k);
  }
  return {std::move(s), std::move(c)};
}

inline Jet ipow(const Jet& base, long long m) {
  Jet result = from_constant(1.0, base.order());
  Jet p = base;
  while (m > 0) {
    if (m & 1) result = mul(result, p);
    if (m >>= 1) p = mul(p, p);
  }
  return result;
}

inline Jet eval(const Expr& e, const Jet& x) {
  switch (e.kind) {
    case ExprKind::kConstant:
      return from_constant(e.value, x.order());
    case ExprKind::kVariable:
      return x;
    case ExprKind::kFamilyIndex:
      throw EvalDomainError("family index n is unbound");
    case ExprKind::kNegate:
      return neg(eval(*e.lhs, x));
    case ExprKind::kSin:
      return sin_cos(eval(*e.lhs, x)).first;
    case ExprKind::kCos:
      return sin_cos(eval(*e.lhs, x)).second;
    case ExprKind::kAdd:
      return add(eval(*e.lhs, x), eval(*e.rhs, x));
    case ExprKind::kSub:
      return sub(eval(*e.lhs, x), eval(*e.rhs, x));
    case ExprKind::kMul:
      return mul(eval(*e.lhs, x), eval(*e.rhs, x));
    case ExprKind::kDiv:
      return div(eval(*e.lhs, x), eval(*e.rhs, x));
    case ExprKind::kPow: {
      long long m = int_count(e.rhs, "power exponent");
      return ipow(eval(*e.lhs, x), m);
    }
    case ExprKind::kCompose:
      return eval(*e.lhs, eval(*e.rhs, x));
    case ExprKind::kIterate: {
      long long m = int_count(e.rhs, "iterate count");
      Jet y = x;
      for (long long i = 0; i < m; ++i) y = eval(*e.lhs, y);
      return y;
    }
    case ExprKind::kIterScaled: {
      long long m = int_count(e.rhs, "iterate count");
      double s = 1.0 / detail::ipow(2.0, m - 1);
      Jet y(x.order());
      for (std::size_t i = 0; i < y.c.size(); ++i) y.c[i] = s * x.c[i];
      for (long long i = 0; i < m; ++i) y = eval(*e.lhs, y);
      return y;
    }
  }
  throw Error("corrupt expression node");
}

}  // namespace jets

/// Taylor coefficients f^(i)(x0)/i!, i = 0..order.
inline Jet taylor_jet(const ExprPtr& f, double x0, std::size_t order) {
  return jets::eval(*f, jets::from_variable(x0, order));
}

}  // namespace funceq
