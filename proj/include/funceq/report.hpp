#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "funceq/chebyshev.hpp"
#include "funceq/operator.hpp"
#include "funceq/solver.hpp"
#include "funceq/strip.hpp"

namespace funceq {

using nlohmann::json;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void to_json(json& j, const EkViolation& v) {
  j = json{{"map_index", v.map_index},
           {"n", v.n},
           {"re", v.z.real()},
           {"im", v.z.imag()},
           {"observed_distance", v.observed_distance},
           {"required_radius", v.required_radius}};
}

inline void to_json(json& j, const EkCertificate& c) {
  j = json{{"k", c.k},
           {"A", c.A},
           {"n_lo", c.n_lo},
           {"n_hi", c.n_hi},
           {"first_nested_index", c.first_nested_index},
           {"max_ratio", c.max_ratio},
           {"samples_per_boundary", c.samples_per_boundary},
           {"violation_count", c.violation_count},
           {"violations", c.violations},
           {"pass", c.pass()}};
}

inline void to_json(json& j, const LambdaReport& r) {
  j = json{{"n_max", r.n_max},
           {"per_n", r.per_n},
           {"lambda_hat", r.lambda_hat},
           {"arg_max", r.arg_max},
           {"sup_possibly_truncated", r.sup_possibly_truncated}};
}

inline void to_json(json& j, const AkCertificate& c) {
  j = json{{"k", c.k},
           {"A_grid", c.A_grid},
           {"rho_real", c.rho_real},
           {"rho_strip", c.rho_strip},
           {"sigma_min", c.sigma_min},
           {"ek", c.ek},
           {"N_A", c.N_A},
           {"tau_candidate", c.tau_candidate},
           {"pass", c.pass}};
}

inline void to_json(json& j, const DecayFit& f) {
  j = json{{"valid", f.valid},
           {"beta", f.beta},
           {"c", f.c},
           {"C", f.C},
           {"fit_lo", f.fit_lo},
           {"fit_hi", f.fit_hi},
           {"points_used", f.points_used},
           {"residual_of_fit", f.residual_of_fit},
           {"beta_target", f.beta_target},
           {"below_target_warning", f.below_target}};
}

inline void to_json(json& j, const Solution& s) {
  j = json{{"degree", s.phi.degree()},
           {"iterations", s.iterations},
           {"residual", s.residual},
           {"apriori_bound", s.apriori_bound},
           {"aposteriori_bound", s.aposteriori_bound},
           {"rho_used", s.rho_used},
           {"truncation_budget", s.truncation_budget},
           {"decay", s.decay},
           {"coeffs_file", "coeffs.csv"}};
}

/// Write text to path via a temp file + rename so readers never observe a
/// partially written report.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// report.json layout: golden-compared fields under "payload", runtime info
/// under "meta".
inline void write_report(const std::filesystem::path& path, const json& payload,
                         const json& meta) {
  json doc{{"payload", payload}, {"meta", meta}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

/// x,phi table at npoints uniform abscissae, 17 significant digits.
inline void write_solution_csv(const std::filesystem::path& path, const ChebRep& phi,
                               int npoints = 1001) {
  std::string text = "x,phi\n";
  for (double x : uniform_grid(npoints))
    text += format_double(x) + "," + format_double(phi(x)) + "\n";
  write_file_atomic(path, text);
}

inline void write_coeffs_csv(const std::filesystem::path& path, const ChebRep& phi) {
  std::string text = "index,coefficient\n";
  const std::vector<double>& c = phi.coeffs();
  for (std::size_t j = 0; j < c.size(); ++j)
    text += std::to_string(j) + "," + format_double(c[j]) + "\n";
  write_file_atomic(path, text);
}

/// Read a coeffs.csv written by write_coeffs_csv (or hand-made with the same
/// header); indices must be dense and ascending from 0.
inline std::vector<double> read_coeffs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,coefficient")
    throw ConfigError(path.string() + ": expected header 'index,coefficient'");
  std::vector<double> coeffs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": missing comma");
    std::size_t idx = 0;
    double val = 0.0;
    try {
      idx = std::stoul(line.substr(0, comma));
      val = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    if (idx != coeffs.size())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": indices must be dense and ascending");
    coeffs.push_back(val);
  }
  if (coeffs.empty()) throw ConfigError(path.string() + ": no coefficient rows");
  return coeffs;
}

}  // namespace funceq
