#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace affine {

/// Immutable scalar expression over chart coordinates x1..xn.
///
/// Nodes are shared between expressions, so copying is cheap and values may
/// be used from any number of threads. Variable indices are stored 0-based
/// (x1 is index 0). Builders fold trivial identities (0+a, 1*a, constant
/// arithmetic) but no further simplification is attempted.
class Expr {
 public:
  enum class Kind : std::uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,  // integer exponent
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
  };

  /// The zero constant.
  Expr();

  static Expr constant(double value);
  static Expr variable(int index);

  Kind kind() const noexcept;
  bool is_constant() const noexcept { return kind() == Kind::Constant; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;
  double constant_value() const noexcept;
  int variable_index() const noexcept;
  int exponent() const noexcept;

  /// One past the largest variable index referenced, 0 for constants.
  int arity() const noexcept;

  /// Evaluates at `x`. Throws DomainError instead of returning NaN or inf.
  double eval(std::span<const double> x) const;

  /// Symbolic partial derivative with respect to the 0-based variable `index`.
  Expr diff(int index) const;

  /// Infix text that parse() reads back to an equivalent expression.
  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr tanh(const Expr& a);

  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr unary(Kind kind, const Expr& a);
  static Expr binary(Kind kind, const Expr& a, const Expr& b);

  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr tanh(const Expr& a);

inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }

/// Parses infix text over variables x1..x`dim`. See docs/expression-grammar.md.
///
/// Throws ParseError (with byte offset) on malformed input, on unknown
/// identifiers, on variable indices above `dim` and on non-integer powers.
Expr parse(std::string_view source, int dim);

}  // namespace affine
