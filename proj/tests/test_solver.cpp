#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "funceq/chebyshev.hpp"
#include "funceq/expr.hpp"
#include "funceq/operator.hpp"
#include "funceq/solver.hpp"

using namespace funceq;

namespace {

OperatorSpec half_sine() {
  return build_operator({TermSpec{parse_expr("0.5"), parse_expr("sin(x)"), 0.5}}, 0.0, 1.0);
}

OperatorSpec rational_nested() {
  return build_operator(
      {TermSpec{parse_expr("x^2/(2*(x^2+1))"), parse_expr("sin(sin(x-1))"), 0.25}}, 0.0,
      1.0);
}

ChebRep minus_x() { return ChebRep({0.0, -1.0}); }

// Closed-form series for the half_sine problem: phi(x) = -sum 2^-j sin<j>(x).
double series_solution(double x, int n_terms) {
  double y = x, s = 0.0, w = 1.0;
  for (int j = 0; j < n_terms; ++j) {
    s += w * y;
    y = std::sin(y);
    w *= 0.5;
  }
  return -s;
}

}  // namespace

TEST(AprioriBound, ClosedForm) {
  EXPECT_DOUBLE_EQ(apriori_bound(0.5, 1.0, 10), std::pow(2.0, -10));
  EXPECT_DOUBLE_EQ(apriori_bound(0.0, 1.0, 0), 0.0);
  EXPECT_DOUBLE_EQ(apriori_bound(0.25, 2.0, 3), 1.0 / 96.0);
  EXPECT_THROW(apriori_bound(1.0, 1.0, 3), ContractionError);
  EXPECT_THROW(apriori_bound(-0.1, 1.0, 3), ConfigError);
}

TEST(Solve, HalfSineAgainstSeries) {
  const OperatorSpec op = half_sine();
  const Solution sol = solve_neumann(op, minus_x(), 1e-11);
  EXPECT_DOUBLE_EQ(sol.rho_used, 0.5);
  EXPECT_LE(sol.residual, 1e-10);
  EXPECT_LE(std::abs(sol.phi(0.0)), 1e-12);
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    EXPECT_NEAR(sol.phi(x), series_solution(x, 60), 1e-9) << "x=" << x;
  }
  EXPECT_LE(sol.aposteriori_bound, 1e-11 + 1e-15);
  EXPECT_DOUBLE_EQ(sol.truncation_budget, 0.0);
}

TEST(Solve, OddRightHandSideGivesOddSolution) {
  const Solution sol = solve_neumann(half_sine(), minus_x(), 1e-11);
  const std::vector<double>& c = sol.phi.coeffs();
  for (std::size_t j = 0; j < c.size(); j += 2)
    EXPECT_LE(std::abs(c[j]), 1e-12) << "even coefficient " << j;
}

TEST(Solve, ZeroOperatorReturnsRightHandSide) {
  const OperatorSpec op = build_operator({}, 0.0, 1.0);
  const Solution sol = solve_neumann(op, minus_x(), 1e-11);
  EXPECT_EQ(sol.iterations, 1);
  EXPECT_LE(sol.residual, 1e-14);
  EXPECT_DOUBLE_EQ(sol.phi(0.5), -0.5);
  EXPECT_FALSE(sol.decay.valid);  // two coefficients cannot support a fit
}

TEST(Solve, PerturbedCandidateHasVisibleResidual) {
  const OperatorSpec op = half_sine();
  const Solution sol = solve_neumann(op, minus_x(), 1e-11);
  const ChebRep shifted = combine(1.0, sol.phi, 0.1, ChebRep({1.0}));
  // (phi + 0.1) - T(phi + 0.1) - u = residual(phi) + 0.1 * (1 - 0.5)
  EXPECT_NEAR(residual(op, shifted, minus_x()), 0.05, 1e-6);
}

TEST(Solve, PartialSumsMatchRecursion) {
  for (const OperatorSpec& op : {half_sine(), rational_nested()}) {
    const ChebRep u = minus_x();
    ChebRep power_term = u;     // T^j(u)
    ChebRep partial_sum = u;    // sum_{i<=j} T^i(u)
    ChebRep picard = u;         // Phi_j from Phi_{j+1} = u + T(Phi_j)
    for (int j = 1; j <= 12; ++j) {
      power_term = apply_operator(op, power_term);
      partial_sum = combine(1.0, partial_sum, 1.0, power_term);
      picard = combine(1.0, u, 1.0, apply_operator(op, picard));
      for (int i = 0; i <= 20; ++i) {
        const double x = -1.0 + 0.1 * i;
        EXPECT_NEAR(partial_sum(x), picard(x), 1e-12) << "j=" << j << " x=" << x;
      }
    }
  }
}

TEST(Solve, IterationErrorWithinAprioriBound) {
  const OperatorSpec op = half_sine();
  const ChebRep u = minus_x();
  const Solution ref = solve_neumann(op, u, 1e-12);
  const double norm_u = sup_norm_interval(u);
  ChebRep cur = u;
  for (int m = 0; m <= 12; ++m) {
    double err = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + 0.05 * i;
      err = std::max(err, std::abs(cur(x) - ref.phi(x)));
    }
    EXPECT_LE(err, apriori_bound(ref.rho_used, norm_u, m) + 1e-12) << "m=" << m;
    cur = combine(1.0, u, 1.0, apply_operator(op, cur));
  }
}

TEST(Solve, IncrementsContractGeometrically) {
  const OperatorSpec op = half_sine();
  const ChebRep u = minus_x();
  ChebRep cur = u;
  double prev_delta = -1.0;
  for (int m = 0; m < 15; ++m) {
    ChebRep next = combine(1.0, u, 1.0, apply_operator(op, cur));
    const double delta = sup_norm_interval(combine(1.0, next, -1.0, cur));
    if (prev_delta >= 0.0)
      EXPECT_LE(delta, 0.5 * prev_delta + 1e-12) << "m=" << m;
    prev_delta = delta;
    cur = std::move(next);
  }
}

TEST(Solve, FixedPointIndependentOfStartingPoint) {
  const OperatorSpec op = half_sine();
  const ChebRep u = minus_x();
  const Solution sol = solve_neumann(op, u, 1e-11);
  ChebRep from_zero({0.0});
  for (int m = 0; m < 60; ++m)
    from_zero = combine(1.0, u, 1.0, apply_operator(op, from_zero));
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    EXPECT_NEAR(from_zero(x), sol.phi(x), 1e-10) << "x=" << x;
  }
}

TEST(Solve, FailureModes) {
  const OperatorSpec expanding =
      build_operator({TermSpec{parse_expr("1.2"), parse_expr("sin(x)"), 0.5}}, 0.0, 1.0);
  EXPECT_THROW(solve_neumann(expanding, minus_x(), 1e-11), ContractionError);

  // rho within the safety margin of 1 counts as non-contractive
  const OperatorSpec marginal =
      build_operator({TermSpec{parse_expr("0.9999999999"), parse_expr("sin(x)"), 0.5}},
                     0.0, 1.0);
  EXPECT_THROW(solve_neumann(marginal, minus_x(), 1e-11), ContractionError);

  EXPECT_THROW(solve_neumann(half_sine(), minus_x(), 0.0), ConfigError);
  EXPECT_THROW(solve_neumann(half_sine(), minus_x(), 1e-11, 0), ConfigError);
  try {
    solve_neumann(half_sine(), minus_x(), 1e-11, 3);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations, 3);
    EXPECT_GT(e.bound, 1e-11);
  }
}

TEST(Residual, GridPrecondition) {
  EXPECT_THROW(residual(half_sine(), minus_x(), minus_x(), 50), ConfigError);
}

TEST(DecayFit, GeometricCoefficientsReadAsAnalytic) {
  // 1/(2-x) has Chebyshev coefficients ~ (2-sqrt(3))^j
  const ChebRep rep = interpolate([](double x) { return 1.0 / (2.0 - x); });
  const DecayFit fit = fit_coeff_decay(rep, 1.0);
  ASSERT_TRUE(fit.valid);
  EXPECT_NEAR(fit.beta, 1.0, 0.1 + 1e-12);
  EXPECT_NEAR(fit.c, -std::log(2.0 - std::sqrt(3.0)), 0.1);
  EXPECT_GT(fit.C, 0.0);
  EXPECT_LT(fit.residual_of_fit, 0.5);
  EXPECT_DOUBLE_EQ(fit.beta_target, 0.5);
  EXPECT_FALSE(fit.below_target);
  EXPECT_GE(fit.fit_lo, 8);
  EXPECT_GE(fit.points_used, 2);
}

TEST(DecayFit, SolvedProblemKeepsModerateDecay) {
  const Solution sol = solve_neumann(half_sine(), minus_x(), 1e-11);
  ASSERT_TRUE(sol.decay.valid);
  EXPECT_GE(sol.decay.beta, 0.4);
  EXPECT_FALSE(sol.decay.below_target);
}

TEST(DecayFit, TooFewCoefficientsIsAnError) {
  EXPECT_THROW(fit_coeff_decay(ChebRep({1.0, 0.5, 0.25}), 1.0), FitError);
}
