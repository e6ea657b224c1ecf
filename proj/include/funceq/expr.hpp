#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "funceq/errors.hpp"

namespace funceq {

// A small closed expression language for scalar functions of one variable.
// Values are immutable trees shared through ExprPtr; every operation below is
// pure, so expressions can be evaluated concurrently without synchronization.

enum class ExprKind {
  kConstant,     // value
  kVariable,     // x
  kFamilyIndex,  // n, bound to an integer at instantiation
  kNegate,
  kSin,
  kCos,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,       // lhs ^ rhs, rhs an integer-valued, x-free expression
  kCompose,   // lhs evaluated at rhs
  kIterate,   // lhs composed with itself rhs times
  kIterScaled  // m-fold self-composition of lhs applied to x / 2^(m-1)
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  ExprKind kind;
  double value = 0.0;  // payload for kConstant
  ExprPtr lhs, rhs;    // unary nodes use lhs only

  Expr(ExprKind k, double v) : kind(k), value(v) {}
  Expr(ExprKind k, ExprPtr a, ExprPtr b = nullptr)
      : kind(k), lhs(std::move(a)), rhs(std::move(b)) {}
};

inline ExprPtr constant(double v) { return std::make_shared<Expr>(ExprKind::kConstant, v); }
inline ExprPtr variable() { return std::make_shared<Expr>(ExprKind::kVariable, 0.0); }
inline ExprPtr family_index() { return std::make_shared<Expr>(ExprKind::kFamilyIndex, 0.0); }

inline bool is_constant(const ExprPtr& e, double v) {
  return e->kind == ExprKind::kConstant && e->value == v;
}

// Folding constructors: they collapse constant subtrees so that derivative
// output stays readable and family instantiation yields integer literals
// where integers are required.
inline ExprPtr negate(ExprPtr u) {
  if (u->kind == ExprKind::kConstant) return constant(-u->value);
  if (u->kind == ExprKind::kNegate) return u->lhs;
  return std::make_shared<Expr>(ExprKind::kNegate, std::move(u));
}

inline ExprPtr add(ExprPtr a, ExprPtr b) {
  if (is_constant(a, 0.0)) return b;
  if (is_constant(b, 0.0)) return a;
  if (a->kind == ExprKind::kConstant && b->kind == ExprKind::kConstant)
    return constant(a->value + b->value);
  return std::make_shared<Expr>(ExprKind::kAdd, std::move(a), std::move(b));
}

inline ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (is_constant(b, 0.0)) return a;
  if (a->kind == ExprKind::kConstant && b->kind == ExprKind::kConstant)
    return constant(a->value - b->value);
  if (is_constant(a, 0.0)) return negate(std::move(b));
  return std::make_shared<Expr>(ExprKind::kSub, std::move(a), std::move(b));
}

inline ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (is_constant(a, 0.0) || is_constant(b, 0.0)) return constant(0.0);
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  if (a->kind == ExprKind::kConstant && b->kind == ExprKind::kConstant)
    return constant(a->value * b->value);
  return std::make_shared<Expr>(ExprKind::kMul, std::move(a), std::move(b));
}

inline ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_constant(b, 1.0)) return a;
  if (is_constant(a, 0.0) && !(b->kind == ExprKind::kConstant && b->value == 0.0))
    return constant(0.0);
  if (a->kind == ExprKind::kConstant && b->kind == ExprKind::kConstant &&
      b->value != 0.0)
    return constant(a->value / b->value);
  return std::make_shared<Expr>(ExprKind::kDiv, std::move(a), std::move(b));
}

inline ExprPtr sin_of(ExprPtr u) { return std::make_shared<Expr>(ExprKind::kSin, std::move(u)); }
inline ExprPtr cos_of(ExprPtr u) { return std::make_shared<Expr>(ExprKind::kCos, std::move(u)); }

inline ExprPtr pow_expr(ExprPtr base, ExprPtr exponent) {
  if (is_constant(exponent, 0.0)) return constant(1.0);
  if (is_constant(exponent, 1.0)) return base;
  return std::make_shared<Expr>(ExprKind::kPow, std::move(base), std::move(exponent));
}

inline ExprPtr compose(ExprPtr f, ExprPtr g) {
  if (g->kind == ExprKind::kVariable) return f;
  if (f->kind == ExprKind::kVariable) return g;
  if (f->kind == ExprKind::kConstant) return f;
  return std::make_shared<Expr>(ExprKind::kCompose, std::move(f), std::move(g));
}

inline ExprPtr iterate_node(ExprPtr f, ExprPtr count) {
  return std::make_shared<Expr>(ExprKind::kIterate, std::move(f), std::move(count));
}
inline ExprPtr iter_scaled_node(ExprPtr f, ExprPtr count) {
  return std::make_shared<Expr>(ExprKind::kIterScaled, std::move(f), std::move(count));
}

inline bool contains_kind(const ExprPtr& e, ExprKind k) {
  if (e->kind == k) return true;
  if (e->lhs && contains_kind(e->lhs, k)) return true;
  if (e->rhs && contains_kind(e->rhs, k)) return true;
  return false;
}
inline bool contains_variable(const ExprPtr& e) { return contains_kind(e, ExprKind::kVariable); }
inline bool contains_family_index(const ExprPtr& e) { return contains_kind(e, ExprKind::kFamilyIndex); }

// Reads an exponent or repetition count that must already be folded to an
// integer literal. Counts stay symbolic only while the family index n is
// unbound; binding folds them.
inline long long int_count(const ExprPtr& e, const char* what) {
  if (e->kind != ExprKind::kConstant)
    throw EvalDomainError(std::string(what) + " is not a resolved integer (family index unbound?)");
  double v = e->value;
  double r = std::round(v);
  if (!(std::abs(v - r) <= 1e-9))
    throw Error(std::string(what) + " must be an integer, got " + std::to_string(v));
  return static_cast<long long>(r);
}

namespace detail {

template <class Scalar>
Scalar ipow(Scalar base, long long m) {
  // binary exponentiation; m >= 0
  Scalar result(1.0);
  Scalar p = base;
  while (m > 0) {
    if (m & 1) result *= p;
    p *= p;
    m >>= 1;
  }
  return result;
}

inline bool is_zero(double v) { return v == 0.0; }
inline bool is_zero(const std::complex<double>& v) { return v.real() == 0.0 && v.imag() == 0.0; }

template <class Scalar>
Scalar eval_impl(const Expr& e, const Scalar& x) {
  switch (e.kind) {
    case ExprKind::kConstant:
      return Scalar(e.value);
    case ExprKind::kVariable:
      return x;
    case ExprKind::kFamilyIndex:
      throw EvalDomainError("family index n is unbound");
    case ExprKind::kNegate:
      return -eval_impl(*e.lhs, x);
    case ExprKind::kSin:
      return std::sin(eval_impl(*e.lhs, x));
    case ExprKind::kCos:
      return std::cos(eval_impl(*e.lhs, x));
    case ExprKind::kAdd:
      return eval_impl(*e.lhs, x) + eval_impl(*e.rhs, x);
    case ExprKind::kSub:
      return eval_impl(*e.lhs, x) - eval_impl(*e.rhs, x);
    case ExprKind::kMul:
      return eval_impl(*e.lhs, x) * eval_impl(*e.rhs, x);
    case ExprKind::kDiv: {
      Scalar num = eval_impl(*e.lhs, x);
      Scalar den = eval_impl(*e.rhs, x);
      if (is_zero(den)) throw EvalDomainError("division by zero");
      return num / den;
    }
    case ExprKind::kPow: {
      long long m = int_count(e.rhs, "power exponent");
      if (m < 0) throw Error("power exponent must be nonnegative");
      return ipow(eval_impl(*e.lhs, x), m);
    }
    case ExprKind::kCompose:
      return eval_impl(*e.lhs, eval_impl(*e.rhs, x));
    case ExprKind::kIterate: {
      long long m = int_count(e.rhs, "iterate count");
      Scalar y = x;
      for (long long i = 0; i < m; ++i) y = eval_impl(*e.lhs, y);
      return y;
    }
    case ExprKind::kIterScaled: {
      long long m = int_count(e.rhs, "iterate count");
      Scalar y = x / Scalar(ipow(2.0, m - 1));
      for (long long i = 0; i < m; ++i) y = eval_impl(*e.lhs, y);
      return y;
    }
  }
  throw Error("corrupt expression node");
}

}  // namespace detail

inline double eval_real(const ExprPtr& f, double x) { return detail::eval_impl<double>(*f, x); }
inline std::complex<double> eval_complex(const ExprPtr& f, std::complex<double> z) {
  return detail::eval_impl<std::complex<double>>(*f, z);
}

// ---------------------------------------------------------------------------
// Symbolic differentiation. The language is closed under d/dx; counts must be
// resolved integers (instantiate the family index first).

inline ExprPtr derivative(const ExprPtr& f);

namespace detail {

inline ExprPtr derivative_of_iterate(const ExprPtr& f, long long m) {
  // (f^<m>)'(x) = prod_{j=0}^{m-1} f'(f^<j>(x))
  ExprPtr df = derivative(f);
  ExprPtr prod = df;  // j = 0 term, f^<0> = identity
  for (long long j = 1; j < m; ++j) {
    ExprPtr inner = (j == 1) ? f : iterate_node(f, constant(static_cast<double>(j)));
    prod = mul(prod, compose(df, inner));
  }
  return prod;
}

}  // namespace detail

inline ExprPtr derivative(const ExprPtr& f) {
  switch (f->kind) {
    case ExprKind::kConstant:
    case ExprKind::kFamilyIndex:
      return constant(0.0);
    case ExprKind::kVariable:
      return constant(1.0);
    case ExprKind::kNegate:
      return negate(derivative(f->lhs));
    case ExprKind::kSin:
      return mul(cos_of(f->lhs), derivative(f->lhs));
    case ExprKind::kCos:
      return mul(negate(sin_of(f->lhs)), derivative(f->lhs));
    case ExprKind::kAdd:
      return add(derivative(f->lhs), derivative(f->rhs));
    case ExprKind::kSub:
      return sub(derivative(f->lhs), derivative(f->rhs));
    case ExprKind::kMul:
      return add(mul(derivative(f->lhs), f->rhs), mul(f->lhs, derivative(f->rhs)));
    case ExprKind::kDiv:
      return div(sub(mul(derivative(f->lhs), f->rhs), mul(f->lhs, derivative(f->rhs))),
                 pow_expr(f->rhs, constant(2.0)));
    case ExprKind::kPow: {
      long long m = int_count(f->rhs, "power exponent");
      if (m == 0) return constant(0.0);
      return mul(mul(constant(static_cast<double>(m)),
                     pow_expr(f->lhs, constant(static_cast<double>(m - 1)))),
                 derivative(f->lhs));
    }
    case ExprKind::kCompose:
      return mul(compose(derivative(f->lhs), f->rhs), derivative(f->rhs));
    case ExprKind::kIterate: {
      long long m = int_count(f->rhs, "iterate count");
      return detail::derivative_of_iterate(f->lhs, m);
    }
    case ExprKind::kIterScaled: {
      long long m = int_count(f->rhs, "iterate count");
      double s = 1.0 / detail::ipow(2.0, m - 1);
      ExprPtr scaled_x = mul(constant(s), variable());
      ExprPtr dit = detail::derivative_of_iterate(f->lhs, m);
      return mul(compose(dit, scaled_x), constant(s));
    }
  }
  throw Error("corrupt expression node");
}

/// m-fold composition of f with itself; iterate(f, 1) is f.
inline ExprPtr iterate(const ExprPtr& f, long long m) {
  if (m < 1) throw Error("iterate count must be >= 1");
  if (m == 1) return f;
  return iterate_node(f, constant(static_cast<double>(m)));
}

// ---------------------------------------------------------------------------
// Family instantiation: substitute n, then fold so that all exponents and
// iterate counts become integer literals.

inline ExprPtr bind_family_index(const ExprPtr& e, long long n) {
  switch (e->kind) {
    case ExprKind::kConstant:
      return e;
    case ExprKind::kVariable:
      return e;
    case ExprKind::kFamilyIndex:
      return constant(static_cast<double>(n));
    case ExprKind::kNegate:
      return negate(bind_family_index(e->lhs, n));
    case ExprKind::kSin:
      return sin_of(bind_family_index(e->lhs, n));
    case ExprKind::kCos:
      return cos_of(bind_family_index(e->lhs, n));
    case ExprKind::kAdd:
      return add(bind_family_index(e->lhs, n), bind_family_index(e->rhs, n));
    case ExprKind::kSub:
      return sub(bind_family_index(e->lhs, n), bind_family_index(e->rhs, n));
    case ExprKind::kMul:
      return mul(bind_family_index(e->lhs, n), bind_family_index(e->rhs, n));
    case ExprKind::kDiv:
      return div(bind_family_index(e->lhs, n), bind_family_index(e->rhs, n));
    case ExprKind::kPow: {
      ExprPtr base = bind_family_index(e->lhs, n);
      ExprPtr count = bind_family_index(e->rhs, n);
      long long m = int_count(count, "power exponent");
      if (m < 0) throw Error("power exponent must be nonnegative");
      return pow_expr(std::move(base), constant(static_cast<double>(m)));
    }
    case ExprKind::kCompose:
      return compose(bind_family_index(e->lhs, n), bind_family_index(e->rhs, n));
    case ExprKind::kIterate:
    case ExprKind::kIterScaled: {
      ExprPtr body = bind_family_index(e->lhs, n);
      ExprPtr count = bind_family_index(e->rhs, n);
      long long m = int_count(count, "iterate count");
      if (m < 1) throw Error("iterate count must be >= 1");
      ExprPtr cnt = constant(static_cast<double>(m));
      return e->kind == ExprKind::kIterate ? iterate_node(std::move(body), std::move(cnt))
                                           : iter_scaled_node(std::move(body), std::move(cnt));
    }
  }
  throw Error("corrupt expression node");
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind) return false;
  if (a->kind == ExprKind::kConstant) return a->value == b->value;
  if (bool(a->lhs) != bool(b->lhs) || bool(a->rhs) != bool(b->rhs)) return false;
  if (a->lhs && !equal(a->lhs, b->lhs)) return false;
  if (a->rhs && !equal(a->rhs, b->rhs)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pretty-printing. parse_expr(to_string(e)) reproduces e structurally for any
// parser-produced tree; composition nodes (derivative output) print as the
// substituted expression since the grammar has no composition operator.

namespace detail {

inline ExprPtr substitute_variable(const ExprPtr& e, const ExprPtr& g) {
  if (e->kind == ExprKind::kVariable) return g;
  if (!e->lhs) return e;
  ExprPtr l = substitute_variable(e->lhs, g);
  ExprPtr r = e->rhs ? substitute_variable(e->rhs, g) : nullptr;
  return std::make_shared<Expr>(e->kind, std::move(l), std::move(r));
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// precedence: additive 1, multiplicative 2, prefix minus 3, power 4, atom 5
inline int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kAdd:
    case ExprKind::kSub:
      return 1;
    case ExprKind::kMul:
    case ExprKind::kDiv:
      return 2;
    case ExprKind::kNegate:
      return 3;
    case ExprKind::kPow:
      return 4;
    case ExprKind::kConstant:
      return e.value < 0.0 ? 3 : 5;
    default:
      return 5;
  }
}

inline void print_expr(const ExprPtr& e, int parent_prec, std::string& out) {
  const int prec = precedence(*e);
  const bool parens = prec < parent_prec;
  if (parens) out += '(';
  switch (e->kind) {
    case ExprKind::kConstant:
      out += format_number(e->value);
      break;
    case ExprKind::kVariable:
      out += 'x';
      break;
    case ExprKind::kFamilyIndex:
      out += 'n';
      break;
    case ExprKind::kNegate:
      out += '-';
      print_expr(e->lhs, 3 + 1, out);
      break;
    case ExprKind::kSin:
    case ExprKind::kCos:
      out += (e->kind == ExprKind::kSin) ? "sin(" : "cos(";
      print_expr(e->lhs, 0, out);
      out += ')';
      break;
    case ExprKind::kAdd:
    case ExprKind::kSub:
      print_expr(e->lhs, 1, out);
      out += (e->kind == ExprKind::kAdd) ? " + " : " - ";
      print_expr(e->rhs, 2, out);
      break;
    case ExprKind::kMul:
    case ExprKind::kDiv:
      print_expr(e->lhs, 2, out);
      out += (e->kind == ExprKind::kMul) ? "*" : "/";
      print_expr(e->rhs, 3, out);
      break;
    case ExprKind::kPow:
      print_expr(e->lhs, 5, out);
      out += '^';
      print_expr(e->rhs, 5, out);
      break;
    case ExprKind::kCompose:
      print_expr(substitute_variable(e->lhs, e->rhs), parens ? 0 : parent_prec, out);
      break;
    case ExprKind::kIterate:
    case ExprKind::kIterScaled:
      out += (e->kind == ExprKind::kIterate) ? "iter(" : "iter_scaled(";
      print_expr(e->lhs, 0, out);
      out += ", ";
      print_expr(e->rhs, 0, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string to_string(const ExprPtr& e) {
  std::string out;
  detail::print_expr(e, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser. Grammar (whitespace insensitive):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' primary)?        (right associative)
//   primary := number | 'x' | 'n' | '(' expr ')'
//            | ('sin'|'cos'|'neg') '(' expr ')' | 'sin' | 'cos'
//            | ('iter'|'iter_scaled') '(' expr ',' expr ')'
// Power exponents and iterate counts must be x-free integer expressions; they
// may mention n and are folded once n is bound.

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprPtr parse() {
    ExprPtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c))
      throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      if (consume('+'))
        e = add(e, parse_term());
      else if (consume('-'))
        e = sub(e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (consume('*'))
        e = mul(e, parse_factor());
      else if (consume('/'))
        e = div(e, parse_factor());
      else
        return e;
    }
  }

  ExprPtr parse_factor() {
    if (consume('-')) return negate(parse_factor());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (consume('^')) {
      std::size_t at = pos_;
      ExprPtr exponent = parse_primary();
      validate_count(exponent, at, "power exponent", 0);
      return pow_expr(std::move(base), std::move(exponent));
    }
    return base;
  }

  // Counts are x-free; if also n-free they must fold to an integer >= lo now.
  void validate_count(const ExprPtr& e, std::size_t at, const char* what, long long lo) {
    if (contains_variable(e))
      throw ParseError(std::string(what) + " must not depend on x", at);
    if (!contains_family_index(e)) {
      ExprPtr folded = bind_family_index(e, 0);  // no-op substitution, folds constants
      long long m;
      try {
        m = int_count(folded, what);
      } catch (const Error& err) {
        throw ParseError(err.what(), at);
      }
      if (m < lo)
        throw ParseError(std::string(what) + " must be >= " + std::to_string(lo), at);
    }
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' was not an exponent
      }
    }
    if (pos_ == start) throw ParseError("malformed number", start);
    std::string text(src_.substr(start, pos_ - start));
    try {
      return constant(std::stod(text));
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + text + "'", start);
    }
  }

  ExprPtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (name == "x") return variable();
    if (name == "n") return family_index();
    if (name == "sin" || name == "cos" || name == "neg") {
      if (peek() != '(') {
        // bare function name, e.g. iter(sin, 3): read as applied to x
        if (name == "sin") return sin_of(variable());
        if (name == "cos") return cos_of(variable());
        throw ParseError("neg requires an argument", start);
      }
      expect('(');
      ExprPtr arg = parse_expr();
      expect(')');
      if (name == "sin") return sin_of(std::move(arg));
      if (name == "cos") return cos_of(std::move(arg));
      return negate(std::move(arg));
    }
    if (name == "iter" || name == "iter_scaled") {
      expect('(');
      ExprPtr f = parse_expr();
      expect(',');
      std::size_t at = pos_;
      ExprPtr count = parse_expr();
      expect(')');
      validate_count(count, at, "iterate count", 1);
      return name == "iter" ? iterate_node(std::move(f), std::move(count))
                            : iter_scaled_node(std::move(f), std::move(count));
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace detail

inline ExprPtr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

/// Parse a family expression and bind the index n.
inline ExprPtr parse_term_expr(std::string_view text, long long n) {
  return bind_family_index(parse_expr(text), n);
}

}  // namespace funceq
