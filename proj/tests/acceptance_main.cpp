// Acceptance checks for the solver, certifier and CLI. Each criterion prints
// exactly one [PASS]/[FAIL] line; the process exits nonzero if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "funceq/funceq.hpp"

using namespace funceq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double grid_sup_diff(const ChebRep& f, const ChebRep& g, int npoints = 1001) {
  double worst = 0.0;
  for (double x : uniform_grid(npoints)) worst = std::max(worst, std::abs(f(x) - g(x)));
  return worst;
}

// --- criterion 1: reference solve accuracy and speed ------------------------

Check criterion1() {
  Check c;
  const ProblemSpec p = paper_example(1);
  const ChebRep u = interpolate([&](double x) { return eval_real(p.u, x); });
  const auto t0 = Clock::now();
  const Solution sol = solve_neumann(p.op, u, 1e-11);
  const double dt = seconds_since(t0);
  c.require(sol.residual <= 1e-10, "residual " + format_double(sol.residual));
  c.require(std::abs(sol.phi(0.0)) <= 1e-12, "phi(0) = " + format_double(sol.phi(0.0)));
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    const double diff = std::abs(sol.phi(x) - oracle_example1(x, 60));
    c.require(diff <= 1e-9, "series mismatch " + format_double(diff) + " at x = " +
                                format_double(x));
  }
  c.require(dt < 1.0, "solve took " + format_double(dt) + " s");
  if (c.ok) c.detail = "residual " + format_double(sol.residual) + ", " +
                       format_double(dt) + " s";
  return c;
}

// --- criterion 2: derivative-growth functional ------------------------------

Check criterion2() {
  Check c;
  const LambdaReport sine = estimate_lambda(parse_expr("sin(x)"), 25);
  c.require(std::abs(sine.lambda_hat - 1.0) <= 1e-9,
            "lambda(sin) = " + format_double(sine.lambda_hat));
  c.require(sine.arg_max == 1, "argmax(sin) = " + std::to_string(sine.arg_max));

  const LambdaReport half = estimate_lambda(parse_expr("0.5*x"), 25);
  c.require(half.lambda_hat == 0.5, "lambda(0.5x) = " + format_double(half.lambda_hat));

  for (int m = 1; m <= 4; ++m) {
    const LambdaReport it =
        estimate_lambda(parse_expr("iter_scaled(sin(x), " + std::to_string(m) + ")"), 25);
    c.require(it.lambda_hat <= 1.0 + 1e-9,
              "lambda(iter_scaled(sin," + std::to_string(m) +
                  ")) = " + format_double(it.lambda_hat));
  }
  if (c.ok) c.detail = "lambda(sin) = " + format_double(sine.lambda_hat) +
                       ", scaled iterates bounded by 1";
  return c;
}

// --- criterion 3: stadium nesting for sin, with the ratio bound -------------

Check criterion3() {
  Check c;
  const ExprPtr sine = parse_expr("sin(x)");
  double worst_margin = 1.0;
  for (double A : {0.1, 0.2, 0.4}) {
    const EkCertificate cert = check_Ek({sine}, 1.0, A, 1, 50, 2000);
    c.require(cert.violation_count == 0,
              "sin nesting violations at A = " + format_double(A));
    for (int n = 1; n <= 50; ++n) {
      const double source = strip_radius(1.0, A, n + 1);
      const double target = strip_radius(1.0, A, n);
      std::vector<Complex> samples = stadium_boundary(source, 2000);
      for (Complex z : stadium_extreme_points(source)) samples.push_back(z);
      const double bound = n / (n + 1.0 - A) + 1e-12;
      for (const Complex& z : samples) {
        const double ratio = dist_to_interval(std::sin(z)) / target;
        if (bound - ratio < worst_margin) worst_margin = bound - ratio;
        c.require(ratio <= bound, "sin ratio " + format_double(ratio) + " above " +
                                      format_double(bound) + " at n = " + std::to_string(n));
      }
    }
  }

  const ExprPtr square = parse_expr("x^2");
  const EkCertificate sq = check_Ek({square}, 1.0, 0.2, 2, 50, 2000);
  c.require(sq.violation_count > 0, "x^2 unexpectedly nests");
  c.require(sq.first_nested_index == -1, "x^2 nests from index " +
                                             std::to_string(sq.first_nested_index));
  for (int n : {2, 3, 10, 50}) {
    const EkCertificate one = check_Ek({square}, 1.0, 0.2, n, n, 2000);
    c.require(one.violation_count > 0, "x^2 nests at n = " + std::to_string(n));
  }
  if (c.ok) c.detail = "sin clean over three widths (worst ratio margin " +
                       format_double(worst_margin) + "), x^2 rejected";
  return c;
}

// --- criterion 4: contraction constants of the shipped instances ------------

Check criterion4() {
  Check c;
  const double rho1 = contraction_real(paper_example(1).op);
  const double rho3 = contraction_real(paper_example(3).op);
  const double rho4 = contraction_real(paper_example(4).op);
  c.require(rho1 == 0.5, "instance 1 rho = " + format_double(rho1));
  c.require(std::abs(rho3 - 0.25) <= 1e-9, "instance 3 rho = " + format_double(rho3));
  c.require(rho4 > 0.49 && rho4 <= 0.5 + 1e-9, "instance 4 rho = " + format_double(rho4));
  if (c.ok) c.detail = "rho = " + format_double(rho1) + ", " + format_double(rho3) + ", " +
                       format_double(rho4);
  return c;
}

// --- criterion 5: a priori error bound and geometric increments -------------

Check criterion5() {
  Check c;
  const ProblemSpec p = paper_example(1);
  const ChebRep u = interpolate([&](double x) { return eval_real(p.u, x); });
  const Solution sol = solve_neumann(p.op, u, 1e-11);
  const double norm_u = 1.0;

  ChebRep cur = u;
  double prev_delta = -1.0;
  for (int m = 0; m <= 20; ++m) {
    const double err = grid_sup_diff(cur, sol.phi);
    const double bound = std::pow(0.5, m + 1) / 0.5 * norm_u + 1e-12;
    c.require(err <= bound, "m = " + std::to_string(m) + ": error " + format_double(err) +
                                " above " + format_double(bound));
    const ChebRep next = combine(1.0, u, 1.0, apply_operator(p.op, cur));
    const double delta = grid_sup_diff(next, cur);
    if (prev_delta > 0.0)
      c.require(delta <= (0.5 + 1e-12) * prev_delta,
                "increment ratio " + format_double(delta / prev_delta) + " at m = " +
                    std::to_string(m));
    prev_delta = delta;
    cur = next;
  }
  if (c.ok) c.detail = "21 error bounds and all increment ratios hold";
  return c;
}

// --- criterion 6: partial sums against the fixed-point recursion ------------

Check criterion6() {
  Check c;
  for (int id : {1, 3}) {
    const ProblemSpec p = paper_example(id);
    const ChebRep u = interpolate([&](double x) { return eval_real(p.u, x); });
    ChebRep power_term = u;
    ChebRep partial_sum = u;
    ChebRep picard = u;
    for (int m = 1; m <= 20; ++m) {
      power_term = apply_operator(p.op, power_term);
      partial_sum = combine(1.0, partial_sum, 1.0, power_term);
      picard = combine(1.0, u, 1.0, apply_operator(p.op, picard));
      const double diff = grid_sup_diff(partial_sum, picard);
      c.require(diff <= 1e-12, "instance " + std::to_string(id) + ", m = " +
                                   std::to_string(m) + ": paths differ by " +
                                   format_double(diff));
    }
  }
  if (c.ok) c.detail = "sum and recursion agree to 1e-12 for 20 steps on both instances";
  return c;
}

// --- criterion 7: coefficient-decay diagnostics -----------------------------

Check criterion7() {
  Check c;
  const ChebRep analytic = interpolate([](double x) { return 1.0 / (2.0 - x); });
  const DecayFit fit = fit_coeff_decay(analytic, 1.0);
  c.require(fit.valid, "fit invalid for 1/(2-x)");
  c.require(fit.beta >= 0.9 && fit.beta <= 1.1, "beta(1/(2-x)) = " + format_double(fit.beta));

  const ProblemSpec p = paper_example(1);
  const ChebRep u = interpolate([&](double x) { return eval_real(p.u, x); });
  const Solution sol = solve_neumann(p.op, u, 1e-11);
  c.require(sol.decay.valid, "fit invalid for the solved instance");
  c.require(sol.decay.beta >= 0.4, "beta(solution) = " + format_double(sol.decay.beta));
  if (c.ok) c.detail = "beta = " + format_double(fit.beta) + " (analytic), " +
                       format_double(sol.decay.beta) + " (instance 1)";
  return c;
}

// --- criterion 8: stability of the family truncation depth ------------------

Check criterion8() {
  Check c;
  const ProblemSpec p20 = paper_example(3, 20);
  const ProblemSpec p40 = paper_example(3, 40);
  const ChebRep u = interpolate([&](double x) { return eval_real(p20.u, x); });
  const Solution s20 = solve_neumann(p20.op, u, 1e-11);
  const Solution s40 = solve_neumann(p40.op, u, 1e-11);
  const double diff = grid_sup_diff(s20.phi, s40.phi);
  const double bound = std::pow(2.0, -21) / 0.75 + 1e-12;
  c.require(diff <= bound,
            "depth-20 and depth-40 solutions differ by " + format_double(diff));
  if (c.ok) c.detail = "difference " + format_double(diff) + " within " + format_double(bound);
  return c;
}

// --- criterion 9: byte-identical CLI reruns of every shipped example --------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FUNCEQ_CLI_PATH) + " " + args + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Check criterion9(Clock::time_point suite_start) {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "funceq_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (int id = 1; id <= 4; ++id) {
    const std::string tag = std::to_string(id);
    if (run_cli("examples export " + tag + " --out " + dir.string()) != 0) {
      c.require(false, "export failed for instance " + tag);
      continue;
    }
    const std::string cfg = (dir / ("example" + tag + ".json")).string();
    const fs::path a = dir / ("a" + tag), b = dir / ("b" + tag);
    const int rc_a = run_cli("solve --config " + cfg + " --out " + a.string());
    const int rc_b = run_cli("solve --config " + cfg + " --out " + b.string());
    c.require(rc_a == 0 && rc_b == 0, "solve exited " + std::to_string(rc_a) + "/" +
                                          std::to_string(rc_b) + " for instance " + tag);
    if (rc_a != 0 || rc_b != 0) continue;
    const auto payload = [](const fs::path& p) {
      return json::parse(std::ifstream(p / "report.json"))["payload"].dump();
    };
    c.require(payload(a) == payload(b), "report payloads differ for instance " + tag);
    c.require(slurp(a / "solution.csv") == slurp(b / "solution.csv"),
              "solution tables differ for instance " + tag);
    c.require(slurp(a / "coeffs.csv") == slurp(b / "coeffs.csv"),
              "coefficient tables differ for instance " + tag);
  }
  const double elapsed = seconds_since(suite_start);
  c.require(elapsed < 30.0, "suite took " + format_double(elapsed) + " s");
  if (c.ok) c.detail = "4 instances rerun byte-identically, suite " +
                       format_double(elapsed) + " s";
  return c;
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  struct Named {
    const char* what;
    Check (*fn)();
  };
  const Named criteria[] = {
      {"reference instance solves to tolerance against the series", &criterion1},
      {"derivative-growth functional hits the known values", &criterion2},
      {"stadium nesting certified for sin, rejected for x^2", &criterion3},
      {"contraction constants match the shipped instances", &criterion4},
      {"a priori bounds and geometric increments hold", &criterion5},
      {"partial sums equal the fixed-point recursion", &criterion6},
      {"coefficient decay reads analytic and stays moderate", &criterion7},
      {"truncation depth only perturbs within the tail budget", &criterion8},
  };

  const auto guarded = [](auto&& fn) -> Check {
    try {
      return fn();
    } catch (const std::exception& e) {
      Check c;
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
      return c;
    }
  };

  bool all_ok = true;
  int index = 1;
  for (const Named& item : criteria) {
    const Check c = guarded(item.fn);
    std::printf("[%s] criterion %d: %s%s%s\n", c.ok ? "PASS" : "FAIL", index, item.what,
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    all_ok = all_ok && c.ok;
    ++index;
  }
  const Check c9 = guarded([&] { return criterion9(suite_start); });
  std::printf("[%s] criterion 9: shipped examples rerun byte-identically in time%s%s\n",
              c9.ok ? "PASS" : "FAIL", c9.detail.empty() ? "" : " -- ", c9.detail.c_str());
  all_ok = all_ok && c9.ok;

  return all_ok ? 0 : 1;
}
