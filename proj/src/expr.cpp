#include "affine/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "affine/error.hpp"

namespace affine {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int index = 0;       // Variable index, or Pow exponent
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
  std::uint64_t vars = 0;  // bit i set if x_{i+1} may occur; bit 63 is "index >= 63"
  int arity = 0;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

std::uint64_t var_bit(int index) { return std::uint64_t{1} << (index < 63 ? index : 63); }

NodePtr make_constant(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Constant;
  n->value = v;
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = make_constant(0.0);
  return z;
}

[[noreturn]] void domain_fail(const char* what, double arg) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s (argument %.17g)", what, arg);
  throw DomainError(buf);
}

double checked(double v, const char* op) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + op);
  return v;
}

double eval_node(const Expr::Node& n, std::span<const double> x) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Constant:
      return n.value;
    case K::Variable:
      if (static_cast<std::size_t>(n.index) >= x.size())
        throw DimensionError("expression references x" + std::to_string(n.index + 1) +
                             " but point has dimension " + std::to_string(x.size()));
      return x[n.index];
    case K::Add:
      return checked(eval_node(*n.a, x) + eval_node(*n.b, x), "+");
    case K::Sub:
      return checked(eval_node(*n.a, x) - eval_node(*n.b, x), "-");
    case K::Mul:
      return checked(eval_node(*n.a, x) * eval_node(*n.b, x), "*");
    case K::Div: {
      const double num = eval_node(*n.a, x);
      const double den = eval_node(*n.b, x);
      if (den == 0.0) domain_fail("division by zero", num);
      return checked(num / den, "/");
    }
    case K::Neg:
      return -eval_node(*n.a, x);
    case K::Pow: {
      const double base = eval_node(*n.a, x);
      if (base == 0.0 && n.index < 0) domain_fail("negative power of zero", base);
      double r = 1.0;
      double p = base;
      unsigned e = static_cast<unsigned>(n.index < 0 ? -n.index : n.index);
      while (e != 0) {
        if (e & 1u) r *= p;
        p *= p;
        e >>= 1u;
      }
      return checked(n.index < 0 ? 1.0 / r : r, "^");
    }
    case K::Sin:
      return std::sin(eval_node(*n.a, x));
    case K::Cos:
      return std::cos(eval_node(*n.a, x));
    case K::Exp:
      return checked(std::exp(eval_node(*n.a, x)), "exp");
    case K::Log: {
      const double v = eval_node(*n.a, x);
      if (!(v > 0.0)) domain_fail("log of nonpositive value", v);
      return std::log(v);
    }
    case K::Sqrt: {
      const double v = eval_node(*n.a, x);
      if (v < 0.0) domain_fail("sqrt of negative value", v);
      return std::sqrt(v);
    }
    case K::Tanh:
      return std::tanh(eval_node(*n.a, x));
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0.0) return "(" + s + ")";
  return s;
}

void print_node(const Expr::Node& n, std::string& out) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Constant:
      out += format_number(n.value);
      return;
    case K::Variable:
      out += "x" + std::to_string(n.index + 1);
      return;
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      const char* op = n.kind == K::Add ? " + " : n.kind == K::Sub ? " - " : n.kind == K::Mul ? "*" : "/";
      out += '(';
      print_node(*n.a, out);
      out += op;
      print_node(*n.b, out);
      out += ')';
      return;
    }
    case K::Neg:
      out += "(-";
      print_node(*n.a, out);
      out += ')';
      return;
    case K::Pow:
      out += '(';
      print_node(*n.a, out);
      out += ")^";
      out += n.index < 0 ? "(" + std::to_string(n.index) + ")" : std::to_string(n.index);
      return;
    default: {
      const char* name = n.kind == K::Sin    ? "sin"
                         : n.kind == K::Cos  ? "cos"
                         : n.kind == K::Exp  ? "exp"
                         : n.kind == K::Log  ? "log"
                         : n.kind == K::Sqrt ? "sqrt"
                                             : "tanh";
      out += name;
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) {
  if (value == 0.0) return Expr();
  return Expr(make_constant(value));
}

Expr Expr::variable(int index) {
  if (index < 0) throw DimensionError("negative variable index");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->index = index;
  n->vars = var_bit(index);
  n->arity = index + 1;
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }
bool Expr::is_zero() const noexcept { return node_->kind == Kind::Constant && node_->value == 0.0; }
bool Expr::is_one() const noexcept { return node_->kind == Kind::Constant && node_->value == 1.0; }
double Expr::constant_value() const noexcept { return node_->value; }
int Expr::variable_index() const noexcept { return node_->index; }
int Expr::exponent() const noexcept { return node_->index; }
int Expr::arity() const noexcept { return node_->arity; }

double Expr::eval(std::span<const double> x) const { return eval_node(*node_, x); }

std::string Expr::str() const {
  std::string out;
  print_node(*node_, out);
  return out;
}

Expr Expr::unary(Kind kind, const Expr& a) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = a.node_;
  n->vars = a.node_->vars;
  n->arity = a.node_->arity;
  return Expr(std::move(n));
}

Expr Expr::binary(Kind kind, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = a.node_;
  n->b = b.node_;
  n->vars = a.node_->vars | b.node_->vars;
  n->arity = std::max(a.node_->arity, b.node_->arity);
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() + b.constant_value());
  return Expr::binary(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() - b.constant_value());
  return Expr::binary(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.constant_value() * b.constant_value());
  if (a.is_constant() && a.constant_value() == -1.0) return -b;
  if (b.is_constant() && b.constant_value() == -1.0) return -a;
  return Expr::binary(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_one()) return a;
  if (b.is_constant() && b.constant_value() != 0.0) {
    if (a.is_constant()) return Expr::constant(a.constant_value() / b.constant_value());
  } else if (a.is_zero() && !b.is_constant()) {
    return Expr();
  }
  return Expr::binary(Expr::Kind::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.kind() == Expr::Kind::Neg) return Expr(a.node_->a);
  return Expr::unary(Expr::Kind::Neg, a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.is_constant() && !(base.is_zero() && exponent < 0)) {
    const double v = std::pow(base.constant_value(), exponent);
    if (std::isfinite(v)) return Expr::constant(v);
  }
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Pow;
  n->index = exponent;
  n->a = base.node_;
  n->vars = base.node_->vars;
  n->arity = base.node_->arity;
  return Expr(std::move(n));
}

namespace {

template <class F>
Expr fold_or(Expr::Kind kind, const Expr& a, F f, bool (*ok)(double), Expr (*build)(Expr::Kind, const Expr&)) {
  if (a.is_constant() && ok(a.constant_value())) {
    const double v = f(a.constant_value());
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return build(kind, a);
}

bool always(double) { return true; }

}  // namespace

Expr sin(const Expr& a) {
  return fold_or(Expr::Kind::Sin, a, [](double v) { return std::sin(v); }, always, &Expr::unary);
}
Expr cos(const Expr& a) {
  return fold_or(Expr::Kind::Cos, a, [](double v) { return std::cos(v); }, always, &Expr::unary);
}
Expr exp(const Expr& a) {
  return fold_or(Expr::Kind::Exp, a, [](double v) { return std::exp(v); }, always, &Expr::unary);
}
Expr log(const Expr& a) {
  return fold_or(
      Expr::Kind::Log, a, [](double v) { return std::log(v); }, [](double v) { return v > 0.0; }, &Expr::unary);
}
Expr sqrt(const Expr& a) {
  return fold_or(
      Expr::Kind::Sqrt, a, [](double v) { return std::sqrt(v); }, [](double v) { return v >= 0.0; }, &Expr::unary);
}
Expr tanh(const Expr& a) {
  return fold_or(Expr::Kind::Tanh, a, [](double v) { return std::tanh(v); }, always, &Expr::unary);
}

Expr Expr::diff(int index) const {
  if ((node_->vars & var_bit(index)) == 0) return Expr();
  const Node& n = *node_;
  const Expr a = n.a ? Expr(n.a) : Expr();
  const Expr b = n.b ? Expr(n.b) : Expr();
  switch (n.kind) {
    case Kind::Constant:
      return Expr();
    case Kind::Variable:
      return n.index == index ? Expr::constant(1.0) : Expr();
    case Kind::Add:
      return a.diff(index) + b.diff(index);
    case Kind::Sub:
      return a.diff(index) - b.diff(index);
    case Kind::Mul:
      return a.diff(index) * b + a * b.diff(index);
    case Kind::Div: {
      const Expr da = a.diff(index);
      const Expr db = b.diff(index);
      if (db.is_zero()) return da / b;
      return (da * b - a * db) / pow(b, 2);
    }
    case Kind::Neg:
      return -a.diff(index);
    case Kind::Pow:
      return Expr::constant(n.index) * pow(a, n.index - 1) * a.diff(index);
    case Kind::Sin:
      return cos(a) * a.diff(index);
    case Kind::Cos:
      return -(sin(a) * a.diff(index));
    case Kind::Exp:
      return *this * a.diff(index);
    case Kind::Log:
      return a.diff(index) / a;
    case Kind::Sqrt:
      return a.diff(index) / (Expr::constant(2.0) * *this);
    case Kind::Tanh:
      return (Expr::constant(1.0) - pow(*this, 2)) * a.diff(index);
  }
  return Expr();
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the grammar in docs/expression-grammar.md.

namespace {

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const int n = integer_exponent();
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '^') fail("chained powers need parentheses");
    return pow(base, n);
  }

  int integer_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    if (accept('(')) {
      const int n = integer_exponent();
      expect(')');
      return n;
    }
    int sign = 1;
    if (accept('-'))
      sign = -1;
    else
      accept('+');
    skip_ws();
    if (pos_ >= src_.size() || !is_digit(src_[pos_])) {
      if (pos_ < src_.size() && src_[pos_] == '.') fail_at("non-integer power", start);
      fail_at("exponent must be an integer literal", start);
    }
    const double v = number();
    if (v != std::floor(v) || std::abs(v) > 1e6) fail_at("non-integer power", start);
    return sign * static_cast<int>(v);
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) fail_at("malformed number", start);
    return v;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (is_digit(c) || c == '.') return Expr::constant(number());
    if (is_alpha(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
      const std::string_view id = src_.substr(start, pos_ - start);
      if (id.size() >= 2 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
        if (id[1] == '0') fail_at("variable indices start at x1", start);
        long idx = 0;
        for (char d : id.substr(1)) {
          idx = idx * 10 + (d - '0');
          if (idx > 1000000) break;
        }
        if (idx > dim_)
          fail_at("variable index exceeds dimension: " + std::string(id) + " with dim " + std::to_string(dim_), start);
        return Expr::variable(static_cast<int>(idx - 1));
      }
      if (id == "pi") return Expr::constant(std::numbers::pi);
      Expr (*fn)(const Expr&) = nullptr;
      if (id == "sin")
        fn = &sin;
      else if (id == "cos")
        fn = &cos;
      else if (id == "exp")
        fn = &exp;
      else if (id == "log")
        fn = &log;
      else if (id == "sqrt")
        fn = &sqrt;
      else if (id == "tanh")
        fn = &tanh;
      if (fn == nullptr) fail_at("unknown identifier '" + std::string(id) + "'", start);
      expect('(');
      Expr arg = expression();
      expect(')');
      return fn(arg);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, int dim) {
  if (dim < 1) throw ParseError("dimension must be positive", 0);
  return Parser(source, dim).run();
}

}  // namespace affine
