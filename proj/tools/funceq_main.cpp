#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "funceq/funceq.hpp"

namespace fs = std::filesystem;
using funceq::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCertification = 2;
constexpr int kExitNoConvergence = 3;

// The certificate embedded in a solve report is summary-grade; the dedicated
// `certify` subcommand runs the full-depth check (n up to 50).
constexpr int kSolveCertNHi = 12;
constexpr int kSolveCertSamples = 500;
constexpr int kCertifyNHi = 50;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

json meta_block(const Timer& timer) {
  return json{{"tool", "funceq"}, {"version", "0.1.0"}, {"wall_ms", timer.ms()}};
}

json certificate_summary(const funceq::AkCertificate& cert) {
  json per_A = json::array();
  for (std::size_t i = 0; i < cert.ek.size(); ++i)
    per_A.push_back(json{{"A", cert.A_grid[i]},
                         {"first_nested_index", cert.N_A[i]},
                         {"max_ratio", cert.ek[i].max_ratio},
                         {"violation_count", cert.ek[i].violation_count}});
  return json{{"rho_real", cert.rho_real}, {"rho_strip", cert.rho_strip},
              {"sigma_min", cert.sigma_min}, {"tau_candidate", cert.tau_candidate},
              {"per_A", per_A},             {"pass", cert.pass}};
}

/// Runs a command body; on a recognized failure writes a failure report (when
/// a report path is set) and returns the matching exit code.
template <typename Fn>
int run_guarded(const fs::path& report_path, const Timer& timer, Fn&& body) {
  std::string kind;
  std::string message;
  int code = kExitConfig;
  try {
    return body();
  } catch (const funceq::ContractionError& e) {
    kind = "contraction_violation"; message = e.what(); code = kExitCertification;
  } catch (const funceq::InvalidMapError& e) {
    kind = "invalid_map"; message = e.what(); code = kExitCertification;
  } catch (const funceq::EvalDomainError& e) {
    kind = "evaluation_domain"; message = e.what(); code = kExitCertification;
  } catch (const funceq::ConvergenceError& e) {
    kind = "no_convergence"; message = e.what(); code = kExitNoConvergence;
  } catch (const funceq::ResolutionError& e) {
    kind = "resolution_exceeded"; message = e.what(); code = kExitNoConvergence;
  } catch (const funceq::ParseError& e) {
    kind = "parse_error"; message = e.what(); code = kExitConfig;
  } catch (const funceq::FitError& e) {
    kind = "fit_error"; message = e.what(); code = kExitConfig;
  } catch (const funceq::ConfigError& e) {
    kind = "config_error"; message = e.what(); code = kExitConfig;
  } catch (const std::exception& e) {
    kind = "error"; message = e.what(); code = kExitConfig;
  }
  std::fprintf(stderr, "error (%s): %s\n", kind.c_str(), message.c_str());
  if (!report_path.empty()) {
    try {
      funceq::write_report(report_path,
                           json{{"status", "failed"}, {"error_kind", kind}, {"error", message}},
                           meta_block(timer));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "could not write failure report: %s\n", e.what());
    }
  }
  return code;
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

int cmd_solve(const std::string& config_path, const std::string& out, double tol_override,
              int max_iter_override) {
  Timer timer;
  const fs::path dir = prepare_out_dir(out);
  const fs::path report_path = dir / "report.json";
  return run_guarded(report_path, timer, [&]() -> int {
    funceq::RunConfig cfg = funceq::load_config(config_path);
    if (tol_override > 0) cfg.tol = tol_override;
    if (max_iter_override > 0) cfg.max_iter = max_iter_override;
    funceq::AssembledProblem prob = funceq::assemble(cfg);

    const std::vector<double> A_grid =
        cfg.A_grid.empty() ? funceq::default_A_grid(prob.op) : cfg.A_grid;
    funceq::AkCertificate cert =
        funceq::certify_Ak(prob.op, A_grid, 1, kSolveCertNHi, kSolveCertSamples);
    if (!cert.pass) {
      funceq::write_report(report_path,
                           json{{"status", "certification_failed"},
                                {"certificate", certificate_summary(cert)}},
                           meta_block(timer));
      std::printf("certification failed (rho_strip=%s); report: %s\n",
                  funceq::format_double(cert.rho_strip).c_str(), report_path.string().c_str());
      return kExitCertification;
    }

    funceq::ChebRep u =
        funceq::interpolate([&](double x) { return funceq::eval_real(prob.u, x); });
    funceq::Solution sol = funceq::solve_neumann(prob.op, u, cfg.tol, cfg.max_iter);

    funceq::write_solution_csv(dir / "solution.csv", sol.phi);
    funceq::write_coeffs_csv(dir / "coeffs.csv", sol.phi);
    const bool ok = sol.residual <= cfg.tol;
    funceq::write_report(report_path,
                         json{{"status", ok ? "ok" : "residual_above_tol"},
                              {"solution", sol},
                              {"certificate", certificate_summary(cert)}},
                         meta_block(timer));
    std::printf("solved in %d iterations, residual %s; report: %s\n", sol.iterations,
                funceq::format_double(sol.residual).c_str(), report_path.string().c_str());
    return ok ? kExitOk : kExitNoConvergence;
  });
}

int cmd_certify(const std::string& config_path, const std::string& out, int boundary_samples) {
  Timer timer;
  const fs::path dir = prepare_out_dir(out);
  const fs::path report_path = dir / "report.json";
  return run_guarded(report_path, timer, [&]() -> int {
    funceq::RunConfig cfg = funceq::load_config(config_path);
    funceq::AssembledProblem prob = funceq::assemble(cfg);
    const std::vector<double> A_grid =
        cfg.A_grid.empty() ? funceq::default_A_grid(prob.op) : cfg.A_grid;
    funceq::AkCertificate cert =
        funceq::certify_Ak(prob.op, A_grid, 1, kCertifyNHi, boundary_samples);
    funceq::write_report(report_path, json{{"status", cert.pass ? "pass" : "fail"},
                                           {"certificate", cert}},
                         meta_block(timer));
    std::printf("certificate: %s (rho_strip=%s); report: %s\n", cert.pass ? "pass" : "fail",
                funceq::format_double(cert.rho_strip).c_str(), report_path.string().c_str());
    return cert.pass ? kExitOk : kExitCertification;
  });
}

int cmd_lambda(const std::string& expr_text, int n_max, const std::string& out) {
  Timer timer;
  const fs::path dir = prepare_out_dir(out);
  const fs::path report_path = dir / "report.json";
  return run_guarded(report_path, timer, [&]() -> int {
    funceq::ExprPtr psi = funceq::parse_expr(expr_text);
    funceq::LambdaReport report = funceq::estimate_lambda(psi, n_max);
    funceq::write_report(report_path,
                         json{{"status", "ok"},
                              {"expression", funceq::to_string(psi)},
                              {"lambda", report}},
                         meta_block(timer));
    std::printf("lambda_hat = %s (argmax n = %d); report: %s\n",
                funceq::format_double(report.lambda_hat).c_str(), report.arg_max,
                report_path.string().c_str());
    return kExitOk;
  });
}

int cmd_diagnose(const std::string& coeffs_path, double k, const std::string& out) {
  Timer timer;
  const fs::path dir = prepare_out_dir(out);
  const fs::path report_path = dir / "report.json";
  return run_guarded(report_path, timer, [&]() -> int {
    std::vector<double> coeffs = funceq::read_coeffs_csv(coeffs_path);
    funceq::ChebRep rep(std::move(coeffs));
    funceq::DecayFit fit = funceq::fit_coeff_decay(rep, k);
    funceq::write_report(report_path, json{{"status", "ok"}, {"k", k}, {"decay", fit}},
                         meta_block(timer));
    std::printf("beta = %s (target %s)%s; report: %s\n",
                funceq::format_double(fit.beta).c_str(),
                funceq::format_double(fit.beta_target).c_str(),
                fit.below_target ? " [below target]" : "", report_path.string().c_str());
    return kExitOk;
  });
}

int cmd_export(int id, int count, const std::string& out) {
  Timer timer;
  const fs::path dir = prepare_out_dir(out);
  return run_guarded(fs::path(), timer, [&]() -> int {
    json doc = funceq::export_config(id, count);
    const fs::path path = dir / ("example" + std::to_string(id) + ".json");
    funceq::write_file_atomic(path, doc.dump(2) + "\n");
    std::printf("wrote %s\n", path.string().c_str());
    return kExitOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver and numerical certifier for linear functional equations "
               "Phi(x) - sum a_n(x) Phi(phi_n(x)) = u(x) on [-1,1]"};
  app.require_subcommand(1);

  std::string config_path, out_dir, expr_text, coeffs_path;
  double tol_override = 0.0, k = 1.0;
  int max_iter_override = 0, n_max = funceq::kDefaultLambdaOrder;
  int boundary_samples = funceq::kDefaultBoundarySamples;
  int example_id = 0, example_count = 30;

  CLI::App* solve = app.add_subcommand("solve", "solve the equation from a config file");
  solve->add_option("--config", config_path, "problem config (JSON)")->required();
  solve->add_option("--out", out_dir, "output directory (default .)");
  solve->add_option("--tol", tol_override, "override config tolerance");
  solve->add_option("--max-iter", max_iter_override, "override config iteration cap");

  CLI::App* certify = app.add_subcommand("certify", "run the operator certificate only");
  certify->add_option("--config", config_path, "problem config (JSON)")->required();
  certify->add_option("--out", out_dir, "output directory (default .)");
  certify->add_option("--boundary-samples", boundary_samples, "samples per stadium boundary");

  CLI::App* lambda = app.add_subcommand("lambda", "estimate lambda(psi) for an expression");
  lambda->add_option("expression", expr_text, "expression in x, e.g. sin(x)")->required();
  lambda->add_option("--nmax", n_max, "highest derivative order (default 25)");
  lambda->add_option("--out", out_dir, "output directory (default .)");

  CLI::App* diagnose = app.add_subcommand("diagnose", "fit coefficient decay of a solution");
  diagnose->add_option("coeffs", coeffs_path, "coeffs.csv from a solve run")->required();
  diagnose->add_option("--k", k, "target Gevrey index (default 1)");
  diagnose->add_option("--out", out_dir, "output directory (default .)");

  CLI::App* examples = app.add_subcommand("examples", "shipped example instances");
  examples->require_subcommand(1);
  CLI::App* exp = examples->add_subcommand("export", "write an instance as a config file");
  exp->add_option("id", example_id, "example id 1..4")->required();
  exp->add_option("--count", example_count, "family truncation length (default 30)");
  exp->add_option("--out", out_dir, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the error message
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (solve->parsed()) return cmd_solve(config_path, out_dir, tol_override, max_iter_override);
  if (certify->parsed()) return cmd_certify(config_path, out_dir, boundary_samples);
  if (lambda->parsed()) return cmd_lambda(expr_text, n_max, out_dir);
  if (diagnose->parsed()) return cmd_diagnose(coeffs_path, k, out_dir);
  if (examples->parsed() && exp->parsed()) return cmd_export(example_id, example_count, out_dir);
  return kExitConfig;
}
