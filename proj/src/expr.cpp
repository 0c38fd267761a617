#include "pilotwave/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <system_error>

namespace pilotwave {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

EvalError::EvalError(const std::string& message, std::string subexpression)
    : std::runtime_error(message + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

namespace detail {

enum class Op : int { Const, Var, Time, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos, Log, Sqrt };

struct Node {
  Op op = Op::Const;
  Complex value{};
  int index = 0;  // variable axis or power exponent
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
  std::uint64_t var_mask = 0;
  bool has_time = false;
  std::size_t count = 1;
};

}  // namespace detail

namespace {

using detail::Node;
using detail::Op;
using NodePtr = std::shared_ptr<const Node>;

constexpr std::size_t kMaxDimension = 64;

NodePtr make_const(Complex v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr, int index = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->index = index;
  n->var_mask = a->var_mask | (b ? b->var_mask : 0);
  n->has_time = a->has_time || (b && b->has_time);
  n->count = 1 + a->count + (b ? b->count : 0);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const NodePtr& n) { return n->op == Op::Const; }
bool is_const_value(const NodePtr& n, Complex v) { return is_const(n) && n->value == v; }
bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

NodePtr fold_or(Complex v, NodePtr fallback) { return finite(v) ? make_const(v) : fallback; }

NodePtr s_neg(const NodePtr& a);

NodePtr s_add(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const_value(a, 0.0)) return b;
  if (is_const_value(b, 0.0)) return a;
  if (b->op == Op::Neg) return make_node(Op::Sub, a, b->a);
  return make_node(Op::Add, a, b);
}

NodePtr s_sub(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  if (is_const_value(b, 0.0)) return a;
  if (is_const_value(a, 0.0)) return s_neg(b);
  if (b->op == Op::Neg) return make_node(Op::Add, a, b->a);
  return make_node(Op::Sub, a, b);
}

NodePtr s_mul(const NodePtr& a, const NodePtr& b) {
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return make_const(0.0);
  if (is_const_value(a, 1.0)) return b;
  if (is_const_value(b, 1.0)) return a;
  if (is_const(b)) return s_mul(b, a);  // constants to the left
  if (is_const(a)) {
    if (is_const_value(a, -1.0)) return s_neg(b);
    if (b->op == Op::Mul && is_const(b->a)) return s_mul(make_const(a->value * b->a->value), b->b);
    if (b->op == Op::Neg) return s_mul(make_const(-a->value), b->a);
  }
  if (a->op == Op::Neg) return s_neg(s_mul(a->a, b));
  if (b->op == Op::Neg) return s_neg(s_mul(a, b->a));
  return make_node(Op::Mul, a, b);
}

NodePtr s_div(const NodePtr& a, const NodePtr& b) {
  if (is_const(b) && b->value != 0.0) {
    if (is_const(a)) return make_const(a->value / b->value);
    return s_mul(make_const(1.0 / b->value), a);
  }
  if (is_const_value(a, 0.0)) return make_const(0.0);
  return make_node(Op::Div, a, b);
}

NodePtr s_neg(const NodePtr& a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->op == Op::Neg) return a->a;
  if (a->op == Op::Mul && is_const(a->a)) return s_mul(make_const(-a->a->value), a->b);
  return make_node(Op::Neg, a);
}

Complex int_power(Complex base, int exponent) {
  Complex result = 1.0;
  Complex factor = base;
  unsigned e = static_cast<unsigned>(exponent < 0 ? -exponent : exponent);
  while (e) {
    if (e & 1U) result *= factor;
    factor *= factor;
    e >>= 1U;
  }
  return exponent < 0 ? 1.0 / result : result;
}

NodePtr s_pow(const NodePtr& base, int exponent) {
  if (exponent == 0) return make_const(1.0);
  if (exponent == 1) return base;
  if (is_const(base)) {
    if (base->value == 0.0 && exponent < 0) return make_node(Op::Pow, base, nullptr, exponent);
    return fold_or(int_power(base->value, exponent), make_node(Op::Pow, base, nullptr, exponent));
  }
  if (base->op == Op::Pow) {
    const long combined = static_cast<long>(base->index) * exponent;
    if (std::abs(combined) < (1L << 20)) return s_pow(base->a, static_cast<int>(combined));
  }
  return make_node(Op::Pow, base, nullptr, exponent);
}

NodePtr s_func(Op op, const NodePtr& a) {
  if (is_const(a)) {
    const Complex v = a->value;
    switch (op) {
      case Op::Exp:
        return fold_or(std::exp(v), make_node(op, a));
      case Op::Sin:
        return fold_or(std::sin(v), make_node(op, a));
      case Op::Cos:
        return fold_or(std::cos(v), make_node(op, a));
      case Op::Log:
        if (v != 0.0) return fold_or(std::log(v), make_node(op, a));
        break;
      case Op::Sqrt:
        return fold_or(std::sqrt(v), make_node(op, a));
      default:
        break;
    }
  }
  return make_node(op, a);
}

// ---------------------------------------------------------------------------
// Printing

int precedence(const NodePtr& n) {
  switch (n->op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Const: {
      const Complex v = n->value;
      if (v.real() != 0.0 && v.imag() != 0.0) return 5;  // printed in parens
      if (v.real() < 0.0 || v.imag() < 0.0 || std::signbit(v.real())) return 3;
      if (v.imag() != 0.0 && v.imag() != 1.0) return 2;  // "2*i"
      return 5;
    }
    default:
      return 5;
  }
}

std::string format_real(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return std::to_string(x);
  return std::string(buf.data(), ptr);
}

std::string format_imag(double im) {
  if (im == 1.0) return "i";
  if (im == -1.0) return "-i";
  return format_real(im) + "*i";
}

std::string format_const(Complex v) {
  if (v.imag() == 0.0) return format_real(v.real());
  if (v.real() == 0.0) return format_imag(v.imag());
  std::string im = format_imag(std::abs(v.imag()));
  return "(" + format_real(v.real()) + (v.imag() < 0 ? "-" : "+") + im + ")";
}

const char* func_name(Op op) {
  switch (op) {
    case Op::Exp:
      return "exp";
    case Op::Sin:
      return "sin";
    case Op::Cos:
      return "cos";
    case Op::Log:
      return "log";
    case Op::Sqrt:
      return "sqrt";
    default:
      return "?";
  }
}

void print(const NodePtr& n, std::ostream& os);

void print_child(const NodePtr& child, int parent_prec, bool strict, std::ostream& os) {
  const int p = precedence(child);
  const bool parens = strict ? p <= parent_prec : p < parent_prec;
  if (parens) os << '(';
  print(child, os);
  if (parens) os << ')';
}

void print(const NodePtr& n, std::ostream& os) {
  switch (n->op) {
    case Op::Const:
      os << format_const(n->value);
      return;
    case Op::Var:
      os << 'q' << (n->index + 1);
      return;
    case Op::Time:
      os << 't';
      return;
    case Op::Add:
    case Op::Sub: {
      print_child(n->a, 1, false, os);
      os << (n->op == Op::Add ? " + " : " - ");
      // Negative right operands are bracketed for readability.
      const bool neg_rhs = precedence(n->b) == 3;
      if (neg_rhs) os << '(';
      print_child(n->b, 1, !neg_rhs, os);
      if (neg_rhs) os << ')';
      return;
    }
    case Op::Mul:
    case Op::Div:
      print_child(n->a, 2, false, os);
      os << (n->op == Op::Mul ? "*" : "/");
      print_child(n->b, 2, true, os);
      return;
    case Op::Neg:
      os << '-';
      print_child(n->a, 3, false, os);
      return;
    case Op::Pow:
      print_child(n->a, 4, true, os);
      os << '^' << n->index;
      return;
    default:
      os << func_name(n->op) << '(';
      print(n->a, os);
      os << ')';
      return;
  }
}

void latex(const NodePtr& n, std::ostream& os);

void latex_child(const NodePtr& child, int parent_prec, bool strict, std::ostream& os) {
  const int p = precedence(child);
  const bool parens = strict ? p <= parent_prec : p < parent_prec;
  if (parens) os << "\\left(";
  latex(child, os);
  if (parens) os << "\\right)";
}

std::string latex_const(Complex v) {
  auto re = format_real(v.real());
  auto im_abs = std::abs(v.imag());
  std::string im = im_abs == 1.0 ? "\\mathrm{i}" : format_real(im_abs) + "\\,\\mathrm{i}";
  if (v.imag() == 0.0) return re;
  if (v.real() == 0.0) return (v.imag() < 0 ? "-" : "") + im;
  return "\\left(" + re + (v.imag() < 0 ? " - " : " + ") + im + "\\right)";
}

void latex(const NodePtr& n, std::ostream& os) {
  switch (n->op) {
    case Op::Const:
      os << latex_const(n->value);
      return;
    case Op::Var:
      os << "q_{" << (n->index + 1) << '}';
      return;
    case Op::Time:
      os << 't';
      return;
    case Op::Add:
    case Op::Sub: {
      latex_child(n->a, 1, false, os);
      os << (n->op == Op::Add ? " + " : " - ");
      const bool neg_rhs = precedence(n->b) == 3;
      if (neg_rhs) os << "\\left(";
      latex_child(n->b, 1, !neg_rhs, os);
      if (neg_rhs) os << "\\right)";
      return;
    }
    case Op::Mul:
      latex_child(n->a, 2, false, os);
      os << " \\, ";
      latex_child(n->b, 2, true, os);
      return;
    case Op::Div:
      os << "\\frac{";
      latex(n->a, os);
      os << "}{";
      latex(n->b, os);
      os << '}';
      return;
    case Op::Neg:
      os << '-';
      latex_child(n->a, 3, false, os);
      return;
    case Op::Pow:
      os << '{';
      latex_child(n->a, 4, true, os);
      os << "}^{" << n->index << '}';
      return;
    case Op::Sqrt:
      os << "\\sqrt{";
      latex(n->a, os);
      os << '}';
      return;
    default:
      os << '\\' << func_name(n->op) << "\\left(";
      latex(n->a, os);
      os << "\\right)";
      return;
  }
}

std::string node_string(const Node* n) {
  // Non-owning view; copy into a shared_ptr with a no-op deleter for printing.
  NodePtr view(n, [](const Node*) {});
  std::ostringstream os;
  print(view, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Differentiation and conjugation

NodePtr derive(const NodePtr& n, std::size_t axis) {
  if (!(n->var_mask & (std::uint64_t{1} << axis))) return make_const(0.0);
  switch (n->op) {
    case Op::Var:
      return make_const(static_cast<std::size_t>(n->index) == axis ? 1.0 : 0.0);
    case Op::Add:
      return s_add(derive(n->a, axis), derive(n->b, axis));
    case Op::Sub:
      return s_sub(derive(n->a, axis), derive(n->b, axis));
    case Op::Mul:
      return s_add(s_mul(derive(n->a, axis), n->b), s_mul(n->a, derive(n->b, axis)));
    case Op::Div: {
      // (a/b)' = a'/b - a b'/b^2
      auto da = derive(n->a, axis);
      auto db = derive(n->b, axis);
      return s_sub(s_div(da, n->b), s_div(s_mul(n->a, db), s_pow(n->b, 2)));
    }
    case Op::Neg:
      return s_neg(derive(n->a, axis));
    case Op::Pow:
      return s_mul(s_mul(make_const(static_cast<double>(n->index)), s_pow(n->a, n->index - 1)),
                   derive(n->a, axis));
    case Op::Exp:
      return s_mul(n, derive(n->a, axis));
    case Op::Sin:
      return s_mul(s_func(Op::Cos, n->a), derive(n->a, axis));
    case Op::Cos:
      return s_neg(s_mul(s_func(Op::Sin, n->a), derive(n->a, axis)));
    case Op::Log:
      return s_div(derive(n->a, axis), n->a);
    case Op::Sqrt:
      return s_div(derive(n->a, axis), s_mul(make_const(2.0), n));
    default:
      return make_const(0.0);
  }
}

NodePtr conjugate(const NodePtr& n) {
  switch (n->op) {
    case Op::Const:
      return make_const(std::conj(n->value));
    case Op::Var:
    case Op::Time:
      return n;
    case Op::Add:
      return s_add(conjugate(n->a), conjugate(n->b));
    case Op::Sub:
      return s_sub(conjugate(n->a), conjugate(n->b));
    case Op::Mul:
      return s_mul(conjugate(n->a), conjugate(n->b));
    case Op::Div:
      return s_div(conjugate(n->a), conjugate(n->b));
    case Op::Neg:
      return s_neg(conjugate(n->a));
    case Op::Pow:
      return s_pow(conjugate(n->a), n->index);
    default:
      return s_func(n->op, conjugate(n->a));
  }
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  Parser(std::string_view text, std::size_t dimension) : text_(text), dim_(dimension) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t dim_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, col_); }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) {
        lhs = s_add(lhs, term());
      } else if (accept('-')) {
        lhs = s_sub(lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    while (true) {
      if (accept('*')) {
        lhs = s_mul(lhs, factor());
      } else if (accept('/')) {
        lhs = s_div(lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    if (accept('-')) return s_neg(factor());
    NodePtr b = base();
    if (accept('^')) {
      std::vector<long> exps{integer_literal()};
      while (accept('^')) exps.push_back(integer_literal());
      long e = exps.back();
      for (auto it = exps.rbegin() + 1; it != exps.rend(); ++it) {
        if (e < 0) fail("negative exponent inside an exponent chain");
        long p = 1;
        for (long k = 0; k < e; ++k) {
          p *= *it;
          if (std::abs(p) > (1L << 20)) fail("exponent too large");
        }
        e = p;
      }
      if (std::abs(e) > (1L << 20)) fail("exponent too large");
      b = s_pow(b, static_cast<int>(e));
    }
    return b;
  }

  long integer_literal() {
    skip_ws();
    bool negative = false;
    if (pos_ < text_.size() && text_[pos_] == '-') {
      negative = true;
      advance();
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    if (start == pos_) fail("exponent must be an integer literal");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("exponent must be an integer literal");
    }
    if (pos_ - start > 7) fail("exponent too large");
    long v = std::stol(std::string(text_.substr(start, pos_ - start)));
    return negative ? -v : v;
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        while (pos_ < look) advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token == ".") fail("malformed number");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) fail("malformed number '" + token + "'");
    return make_const(value);
  }

  NodePtr base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      advance();
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(std::string("unexpected '") + c + "'");

    const int id_line = line_;
    const int id_col = col_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) advance();
    const std::string id(text_.substr(start, pos_ - start));

    if (id == "i") return make_const(Complex(0.0, 1.0));
    if (id == "t") {
      auto n = std::make_shared<Node>();
      n->op = Op::Time;
      n->has_time = true;
      return n;
    }
    if (id.size() > 1 && id[0] == 'q' &&
        id.find_first_not_of("0123456789", 1) == std::string::npos) {
      if (id.size() > 4) throw ParseError("variable index out of range: " + id, id_line, id_col);
      const int k = std::stoi(id.substr(1));
      if (k < 1 || static_cast<std::size_t>(k) > dim_) {
        throw ParseError("variable index out of range: " + id + " (dimension " +
                             std::to_string(dim_) + ")",
                         id_line, id_col);
      }
      auto n = std::make_shared<Node>();
      n->op = Op::Var;
      n->index = k - 1;
      n->var_mask = std::uint64_t{1} << (k - 1);
      return n;
    }
    Op op;
    if (id == "exp") {
      op = Op::Exp;
    } else if (id == "sin") {
      op = Op::Sin;
    } else if (id == "cos") {
      op = Op::Cos;
    } else if (id == "log") {
      op = Op::Log;
    } else if (id == "sqrt") {
      op = Op::Sqrt;
    } else {
      throw ParseError("unknown identifier '" + id + "'", id_line, id_col);
    }
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return s_func(op, arg);
  }
};

// ---------------------------------------------------------------------------
// Sampling

struct SamplePoint {
  std::vector<double> q;
  double t;
};

template <class Visit>
void for_each_sample(const Expr& a, const Expr& b, const SampleSpec& spec, Visit&& visit) {
  if (a.dimension() != b.dimension()) throw DimensionError("expression dimension mismatch");
  const CompiledExpr ca(a);
  const CompiledExpr cb(b);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> q(a.dimension());
  int valid = 0;
  const int max_draws = 10 * spec.samples;
  for (int draw = 0; draw < max_draws && valid < spec.samples; ++draw) {
    for (double& x : q) x = box(rng);
    const double t = unit(rng);
    Complex va;
    Complex vb;
    try {
      va = ca.evaluate(q, t);
      vb = cb.evaluate(q, t);
    } catch (const EvalError&) {
      continue;
    }
    ++valid;
    if (!visit(va, vb)) return;
  }
  if (valid < spec.samples) {
    throw std::runtime_error("approx_equal: could not find " + std::to_string(spec.samples) +
                             " valid sample points");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : node_(make_const(0.0)), dimension_(0) {}

Expr::Expr(std::shared_ptr<const detail::Node> node, std::size_t dimension)
    : node_(std::move(node)), dimension_(dimension) {}

Expr Expr::constant(Complex value, std::size_t dimension) { return Expr(make_const(value), dimension); }

Expr Expr::variable(std::size_t axis, std::size_t dimension) {
  if (axis >= dimension || dimension > kMaxDimension) throw DimensionError("variable axis out of range");
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = static_cast<int>(axis);
  n->var_mask = std::uint64_t{1} << axis;
  return Expr(n, dimension);
}

Expr Expr::time(std::size_t dimension) {
  auto n = std::make_shared<Node>();
  n->op = Op::Time;
  n->has_time = true;
  return Expr(n, dimension);
}

bool Expr::is_constant() const { return node_->op == Op::Const; }

std::optional<Complex> Expr::constant_value() const {
  if (is_constant()) return node_->value;
  return std::nullopt;
}

bool Expr::is_structural_zero() const { return is_const_value(node_, 0.0); }
bool Expr::depends_on_time() const { return node_->has_time; }
bool Expr::depends_on_axis(std::size_t axis) const {
  return axis < kMaxDimension && (node_->var_mask & (std::uint64_t{1} << axis));
}

Complex Expr::evaluate(std::span<const double> q, double t) const {
  if (q.size() != dimension_) throw DimensionError("evaluation point has the wrong dimension");
  return CompiledExpr(*this).evaluate(q, t);
}

Expr Expr::derivative(std::size_t axis) const {
  if (axis >= dimension_) throw DimensionError("derivative axis out of range");
  return Expr(derive(node_, axis), dimension_);
}

Expr Expr::differentiate(const MultiIndex& n) const {
  if (n.dimension() != dimension_) {
    throw DimensionError("differentiate: multi-index " + n.to_string() +
                         " does not match expression dimension " + std::to_string(dimension_));
  }
  NodePtr cur = node_;
  for (std::size_t axis = 0; axis < dimension_; ++axis) {
    for (int k = 0; k < n[axis]; ++k) {
      cur = derive(cur, axis);
      if (is_const_value(cur, 0.0)) return Expr(cur, dimension_);
    }
  }
  return Expr(cur, dimension_);
}

Expr Expr::conj() const { return Expr(conjugate(node_), dimension_); }

std::string Expr::to_string() const {
  std::ostringstream os;
  print(node_, os);
  return os.str();
}

std::string Expr::to_latex() const {
  std::ostringstream os;
  latex(node_, os);
  return os.str();
}

std::size_t Expr::node_count() const { return node_->count; }

namespace {
std::size_t joint_dimension(const Expr& a, const Expr& b) {
  // Dimension-0 constants (default-constructed zero) adapt to the other operand.
  if (a.dimension() == 0) return b.dimension();
  if (b.dimension() == 0 || a.dimension() == b.dimension()) return a.dimension();
  throw DimensionError("expression dimension mismatch");
}
}  // namespace

Expr operator+(const Expr& a, const Expr& b) { return Expr(s_add(a.node_, b.node_), joint_dimension(a, b)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(s_sub(a.node_, b.node_), joint_dimension(a, b)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(s_mul(a.node_, b.node_), joint_dimension(a, b)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(s_div(a.node_, b.node_), joint_dimension(a, b)); }
Expr operator-(const Expr& a) { return Expr(s_neg(a.node_), a.dimension_); }
Expr pow(const Expr& base, int exponent) { return Expr(s_pow(base.node_, exponent), base.dimension_); }
Expr exp(const Expr& a) { return Expr(s_func(Op::Exp, a.node_), a.dimension_); }
Expr sin(const Expr& a) { return Expr(s_func(Op::Sin, a.node_), a.dimension_); }
Expr cos(const Expr& a) { return Expr(s_func(Op::Cos, a.node_), a.dimension_); }
Expr log(const Expr& a) { return Expr(s_func(Op::Log, a.node_), a.dimension_); }
Expr sqrt(const Expr& a) { return Expr(s_func(Op::Sqrt, a.node_), a.dimension_); }

Expr operator*(Complex c, const Expr& a) { return Expr::constant(c, a.dimension()) * a; }

Expr parse_expression(std::string_view text, std::size_t dimension) {
  if (dimension == 0 || dimension > kMaxDimension) throw DimensionError("unsupported dimension");
  return Expr(Parser(text, dimension).parse(), dimension);
}

// ---------------------------------------------------------------------------
// CompiledExpr

CompiledExpr::CompiledExpr(const Expr& e) : depends_on_time_(e.depends_on_time()), keep_alive_(e.node_) {
  std::size_t depth = 0;
  // Iterative post-order to avoid deep recursion on long sums.
  std::vector<std::pair<const Node*, bool>> todo{{e.node_.get(), false}};
  while (!todo.empty()) {
    auto [n, expanded] = todo.back();
    todo.pop_back();
    if (!expanded && (n->a || n->b)) {
      todo.push_back({n, true});
      if (n->b) todo.push_back({n->b.get(), false});
      if (n->a) todo.push_back({n->a.get(), false});
      continue;
    }
    program_.push_back({static_cast<int>(n->op), n->index, n->value, n});
    switch (n->op) {
      case Op::Const:
      case Op::Var:
      case Op::Time:
        ++depth;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
        --depth;
        break;
      default:
        break;
    }
    stack_size_ = std::max(stack_size_, depth);
  }
}

Complex CompiledExpr::evaluate(std::span<const double> q, double t) const {
  std::vector<Complex> scratch(stack_size_);
  return evaluate(q, t, scratch);
}

Complex CompiledExpr::evaluate(std::span<const double> q, double t, std::span<Complex> scratch) const {
  std::size_t sp = 0;
  Complex* s = scratch.data();
  for (const Instr& in : program_) {
    switch (static_cast<Op>(in.op)) {
      case Op::Const:
        s[sp++] = in.value;
        break;
      case Op::Var:
        s[sp++] = q[static_cast<std::size_t>(in.index)];
        break;
      case Op::Time:
        s[sp++] = t;
        break;
      case Op::Add:
        --sp;
        s[sp - 1] += s[sp];
        break;
      case Op::Sub:
        --sp;
        s[sp - 1] -= s[sp];
        break;
      case Op::Mul:
        --sp;
        s[sp - 1] *= s[sp];
        break;
      case Op::Div:
        --sp;
        if (s[sp] == 0.0) throw EvalError("division by zero", node_string(in.node));
        s[sp - 1] /= s[sp];
        break;
      case Op::Neg:
        s[sp - 1] = -s[sp - 1];
        break;
      case Op::Pow:
        if (in.index < 0 && s[sp - 1] == 0.0) throw EvalError("division by zero", node_string(in.node));
        s[sp - 1] = int_power(s[sp - 1], in.index);
        break;
      case Op::Exp:
        s[sp - 1] = std::exp(s[sp - 1]);
        break;
      case Op::Sin:
        s[sp - 1] = std::sin(s[sp - 1]);
        break;
      case Op::Cos:
        s[sp - 1] = std::cos(s[sp - 1]);
        break;
      case Op::Log:
        if (s[sp - 1] == 0.0) throw EvalError("log of zero", node_string(in.node));
        s[sp - 1] = std::log(s[sp - 1]);
        break;
      case Op::Sqrt:
        s[sp - 1] = std::sqrt(s[sp - 1]);
        break;
    }
    if (!finite(s[sp - 1])) throw EvalError("non-finite value", node_string(in.node));
  }
  return s[0];
}

// ---------------------------------------------------------------------------
// Numerical comparison

bool approx_equal(const Expr& a, const Expr& b, const SampleSpec& spec) {
  bool equal = true;
  for_each_sample(a, b, spec, [&](Complex va, Complex vb) {
    if (std::abs(va - vb) > spec.tol * (1.0 + std::abs(va) + std::abs(vb))) {
      equal = false;
      return false;
    }
    return true;
  });
  return equal;
}

bool approx_zero(const Expr& a, const SampleSpec& spec) {
  if (a.is_structural_zero()) return true;
  if (auto c = a.constant_value()) return std::abs(*c) <= spec.tol;
  return approx_equal(a, Expr::constant(0.0, a.dimension()), spec);
}

double max_sampled_difference(const Expr& a, const Expr& b, const SampleSpec& spec) {
  double worst = 0.0;
  for_each_sample(a, b, spec, [&](Complex va, Complex vb) {
    worst = std::max(worst, std::abs(va - vb));
    return true;
  });
  return worst;
}

}  // namespace pilotwave
