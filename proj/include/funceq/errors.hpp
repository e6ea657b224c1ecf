#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace funceq {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression source could not be parsed; `position` is a byte offset into the source.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

/// Evaluation left the expression's domain (division by zero, unbound index, ...).
class EvalDomainError : public Error {
 public:
  using Error::Error;
};

/// A Chebyshev representation was evaluated outside [-1,1].
class IntervalDomainError : public Error {
 public:
  using Error::Error;
};

/// An inner map left [-1,1] beyond the roundoff guard; carries the offending
/// term index and a witness point.
class InvalidMapError : public Error {
 public:
  InvalidMapError(std::size_t term_index, double witness_x, double image)
      : Error("inner map of term " + std::to_string(term_index) +
              " leaves [-1,1]: phi(" + std::to_string(witness_x) +
              ") = " + std::to_string(image)),
        term_index(term_index),
        witness_x(witness_x),
        image(image) {}
  std::size_t term_index;
  double witness_x;
  double image;
};

/// Adaptive interpolation hit max_degree without the coefficients plateauing.
/// `envelope` holds the magnitudes of the trailing coefficients at the last degree.
class ResolutionError : public Error {
 public:
  ResolutionError(int max_degree, std::vector<double> envelope)
      : Error("interpolation did not resolve at max degree " +
              std::to_string(max_degree)),
        max_degree(max_degree),
        envelope(std::move(envelope)) {}
  int max_degree;
  std::vector<double> envelope;
};

/// The operator fails the contraction hypothesis rho < 1.
class ContractionError : public Error {
 public:
  explicit ContractionError(double rho)
      : Error("operator is not a contraction: rho = " + std::to_string(rho)),
        rho(rho) {}
  double rho;
};

/// The fixed-point iteration did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(int iterations, double bound)
      : Error("no convergence after " + std::to_string(iterations) +
              " iterations (a posteriori bound " + std::to_string(bound) + ")"),
        iterations(iterations),
        bound(bound) {}
  int iterations;
  double bound;
};

/// Not enough usable data for the coefficient-decay fit.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Run configuration failed schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace funceq
