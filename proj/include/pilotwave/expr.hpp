#ifndef PILOTWAVE_EXPR_HPP
#define PILOTWAVE_EXPR_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pilotwave/multiindex.hpp"

namespace pilotwave {

using Complex = std::complex<double>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Raised when a coefficient cannot be evaluated at a point (division by
/// zero, log of zero, overflow).  Carries the offending subexpression.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& message, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

namespace detail {
struct Node;
}

/// Immutable complex-valued expression in the variables q1..qN and t.
///
/// Expressions are built by the parser or the arithmetic helpers below.
/// Every constructor applies light simplification (constant folding, 0*x,
/// 1*x, x+0, nested negation) so Leibniz expansions stay small; there is no
/// normal form, so equality is tested numerically with approx_equal.
class Expr {
 public:
  /// The zero constant of dimension 0.
  Expr();

  static Expr constant(Complex value, std::size_t dimension);
  /// q_{axis+1}
  static Expr variable(std::size_t axis, std::size_t dimension);
  static Expr time(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }

  bool is_constant() const;
  /// Value when the expression folded to a constant.
  std::optional<Complex> constant_value() const;
  /// Structurally the zero constant (not a numerical test).
  bool is_structural_zero() const;
  bool depends_on_time() const;
  bool depends_on_axis(std::size_t axis) const;

  Complex evaluate(std::span<const double> q, double t) const;

  /// d/dq_{axis+1}; t is a parameter.
  Expr derivative(std::size_t axis) const;
  /// Mixed partial D^n.
  Expr differentiate(const MultiIndex& n) const;
  /// Complex conjugate, treating q and t as real.  Functions are mapped
  /// through their principal branches, so log/sqrt are only conjugation
  /// symmetric away from their branch cut.
  Expr conj() const;

  /// Canonical serialisation; parse(to_string()) reproduces the value.
  std::string to_string() const;
  std::string to_latex() const;

  std::size_t node_count() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr exp(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);

  friend class CompiledExpr;
  friend Expr parse_expression(std::string_view text, std::size_t dimension);

 private:
  Expr(std::shared_ptr<const detail::Node> node, std::size_t dimension);
  std::shared_ptr<const detail::Node> node_;
  std::size_t dimension_ = 0;
};

Expr operator*(Complex c, const Expr& a);

/// Parses the coefficient grammar
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := "-" factor | base ("^" int)?
///   base   := number | "i" | "t" | "q" digits | func "(" expr ")" | "(" expr ")"
///   func   := exp | sin | cos | log | sqrt
/// "^" is right-associative over integer exponents.
Expr parse_expression(std::string_view text, std::size_t dimension);

/// Flattened postfix program for fast repeated evaluation on grids.
class CompiledExpr {
 public:
  explicit CompiledExpr(const Expr& e);
  std::size_t stack_size() const { return stack_size_; }
  /// `scratch` must hold at least stack_size() entries.
  Complex evaluate(std::span<const double> q, double t, std::span<Complex> scratch) const;
  Complex evaluate(std::span<const double> q, double t) const;
  bool depends_on_time() const { return depends_on_time_; }

 private:
  struct Instr {
    int op;
    int index;
    Complex value;
    const detail::Node* node;
  };
  std::vector<Instr> program_;
  std::size_t stack_size_ = 0;
  bool depends_on_time_ = false;
  std::shared_ptr<const detail::Node> keep_alive_;
};

/// Sampling parameters for numerical expression comparison.
struct SampleSpec {
  int samples = 16;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  double tol = 1e-9;
};

/// True iff |a-b| <= tol*(1+|a|+|b|) at `samples` reproducible random points
/// of [-2,2]^N x [0,1].  Points where either side fails to evaluate are
/// redrawn, up to 10x oversampling; running out of valid points throws.
bool approx_equal(const Expr& a, const Expr& b, const SampleSpec& spec = {});
bool approx_zero(const Expr& a, const SampleSpec& spec = {});

/// Largest |a-b| over the sample points (same point scheme as approx_equal).
double max_sampled_difference(const Expr& a, const Expr& b, const SampleSpec& spec = {});

}  // namespace pilotwave

#endif  // PILOTWAVE_EXPR_HPP
