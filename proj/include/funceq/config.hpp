#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "funceq/errors.hpp"
#include "funceq/expr.hpp"
#include "funceq/operator.hpp"
#include "funceq/problems.hpp"

namespace funceq {

using nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

/// Parsed problem configuration (schema 1). Exactly one of `terms` or
/// `family` defines the operator; explicit term lists are finite and carry
/// tail bound 0, named families get their closed-form tail.
struct RunConfig {
  double k = 1.0;
  std::string rhs;
  struct TermText {
    std::string a;
    std::string phi;
    double sigma = 0.0;
  };
  std::vector<TermText> terms;
  std::string family_name;  // "example1".."example4"; empty when terms given
  int family_count = 0;
  double tol = 1e-11;
  int max_iter = 200;
  std::vector<double> A_grid;  // empty: use default_A_grid at run time
};

namespace detail {

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key \"" + key + "\"");
}

inline double require_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  if (!obj[key].is_number()) throw ConfigError(where + ": \"" + key + "\" must be a number");
  return obj[key].get<double>();
}

inline std::string require_string(const json& obj, const std::string& key,
                                  const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  if (!obj[key].is_string()) throw ConfigError(where + ": \"" + key + "\" must be a string");
  return obj[key].get<std::string>();
}

}  // namespace detail

inline RunConfig parse_config(const json& doc, const std::string& where = "config") {
  if (!doc.is_object()) throw ConfigError(where + ": top level must be an object");
  detail::require_keys(doc, {"schema", "k", "rhs", "terms", "family", "tol", "max_iter", "A_grid"},
                       where);
  if (!doc.contains("schema") || !doc["schema"].is_number_integer() ||
      doc["schema"].get<int>() != kConfigSchemaVersion)
    throw ConfigError(where + ": requires \"schema\": 1");

  RunConfig cfg;
  cfg.k = detail::require_number(doc, "k", where);
  if (!(cfg.k > 0)) throw ConfigError(where + ": k must be positive");
  cfg.rhs = detail::require_string(doc, "rhs", where);

  const bool has_terms = doc.contains("terms");
  const bool has_family = doc.contains("family");
  if (has_terms == has_family)
    throw ConfigError(where + ": exactly one of \"terms\" or \"family\" is required");

  if (has_terms) {
    if (!doc["terms"].is_array()) throw ConfigError(where + ": \"terms\" must be an array");
    std::size_t i = 0;
    for (const json& t : doc["terms"]) {
      const std::string twhere = where + ".terms[" + std::to_string(i) + "]";
      if (!t.is_object()) throw ConfigError(twhere + ": must be an object");
      detail::require_keys(t, {"a", "phi", "sigma"}, twhere);
      RunConfig::TermText tt;
      tt.a = detail::require_string(t, "a", twhere);
      tt.phi = detail::require_string(t, "phi", twhere);
      tt.sigma = detail::require_number(t, "sigma", twhere);
      if (!(tt.sigma > 0)) throw ConfigError(twhere + ": sigma must be positive");
      cfg.terms.push_back(std::move(tt));
      ++i;
    }
  } else {
    const json& fam = doc["family"];
    if (!fam.is_object()) throw ConfigError(where + ": \"family\" must be an object");
    detail::require_keys(fam, {"name", "count"}, where + ".family");
    cfg.family_name = detail::require_string(fam, "name", where + ".family");
    if (!fam.contains("count") || !fam["count"].is_number_integer())
      throw ConfigError(where + ".family: \"count\" must be an integer");
    cfg.family_count = fam["count"].get<int>();
    if (cfg.family_count < 1) throw ConfigError(where + ".family: count must be at least 1");
  }

  if (doc.contains("tol")) {
    cfg.tol = detail::require_number(doc, "tol", where);
    if (!(cfg.tol > 0)) throw ConfigError(where + ": tol must be positive");
  }
  if (doc.contains("max_iter")) {
    if (!doc["max_iter"].is_number_integer())
      throw ConfigError(where + ": \"max_iter\" must be an integer");
    cfg.max_iter = doc["max_iter"].get<int>();
    if (cfg.max_iter < 1) throw ConfigError(where + ": max_iter must be at least 1");
  }
  if (doc.contains("A_grid")) {
    if (!doc["A_grid"].is_array()) throw ConfigError(where + ": \"A_grid\" must be an array");
    for (const json& a : doc["A_grid"]) {
      if (!a.is_number()) throw ConfigError(where + ": A_grid entries must be numbers");
      const double v = a.get<double>();
      if (!(v > 0)) throw ConfigError(where + ": A_grid entries must be positive");
      cfg.A_grid.push_back(v);
    }
    if (cfg.A_grid.empty()) throw ConfigError(where + ": A_grid must be nonempty when given");
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.string());
}

inline int family_id(const std::string& name) {
  if (name == "example1") return 1;
  if (name == "example2") return 2;
  if (name == "example3") return 3;
  if (name == "example4") return 4;
  throw ConfigError("unknown family \"" + name + "\" (want example1..example4)");
}

struct AssembledProblem {
  OperatorSpec op;
  ExprPtr u;
};

/// Build the operator and right-hand side from a validated config. Expression
/// parse failures are rethrown as config errors with the offending field.
inline AssembledProblem assemble(const RunConfig& cfg) {
  AssembledProblem out;
  try {
    out.u = parse_expr(cfg.rhs);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("rhs: ") + e.what());
  }
  if (contains_family_index(out.u)) throw ConfigError("rhs must not use the family index n");

  if (!cfg.family_name.empty()) {
    out.op = paper_example(family_id(cfg.family_name), cfg.family_count).op;
    out.op.k = cfg.k;
    return out;
  }
  std::vector<TermSpec> terms;
  terms.reserve(cfg.terms.size());
  for (std::size_t i = 0; i < cfg.terms.size(); ++i) {
    TermSpec t;
    try {
      t.a = parse_expr(cfg.terms[i].a);
      t.phi = parse_expr(cfg.terms[i].phi);
    } catch (const ParseError& e) {
      throw ConfigError("terms[" + std::to_string(i) + "]: " + e.what());
    }
    if (contains_family_index(t.a) || contains_family_index(t.phi))
      throw ConfigError("terms[" + std::to_string(i) +
                        "]: family index n is only valid inside named families");
    t.sigma = cfg.terms[i].sigma;
    terms.push_back(std::move(t));
  }
  out.op = build_operator(std::move(terms), 0.0, cfg.k);
  return out;
}

/// Config document for a shipped example, as emitted by `examples export`.
inline json export_config(int id, int count) {
  ProblemSpec p = paper_example(id, count);
  json fam{{"name", "example" + std::to_string(id)}, {"count", id == 1 ? 1 : count}};
  json doc{{"schema", kConfigSchemaVersion},
           {"k", p.k},
           {"rhs", to_string(p.u)},
           {"family", fam},
           {"tol", 1e-11},
           {"max_iter", 200},
           {"A_grid", default_A_grid(p.op)}};
  return doc;
}

}  // namespace funceq
