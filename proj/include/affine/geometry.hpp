#pragma once

#include <optional>
#include <string>
#include <vector>

#include "affine/expr.hpp"
#include "affine/linalg.hpp"

namespace affine {

/// A single chart: R^n, optionally restricted to an axis-aligned box in
/// which all registered expressions are valid.
class ChartDomain {
 public:
  explicit ChartDomain(int dim);
  ChartDomain(int dim, Vec lower, Vec upper);

  int dim() const noexcept { return dim_; }
  bool bounded() const noexcept { return lower_.has_value(); }
  const Vec& lower() const;
  const Vec& upper() const;

  /// True if the first dim() coordinates of `x` lie inside the box.
  bool contains(const Vec& x) const;
  /// Throws BoundsError naming `what` when `x` is outside.
  void require(const Vec& x, const char* what = "point") const;

  /// Chart on TM: base box unchanged, fiber coordinates unbounded.
  ChartDomain tangent_bundle() const;

  /// Midpoint of the box, or the origin when unbounded.
  Vec center() const;

  bool same_as(const ChartDomain& other) const;

 private:
  int dim_;
  std::optional<Vec> lower_;
  std::optional<Vec> upper_;
};

/// Vector field given by n component expressions in chart coordinates.
class VectorField {
 public:
  VectorField(ChartDomain domain, std::vector<Expr> components);
  /// Parses one expression per component.
  static VectorField parse(const ChartDomain& domain, const std::vector<std::string>& components);
  static VectorField zero(const ChartDomain& domain);
  /// Coordinate field e_i (0-based).
  static VectorField coordinate(const ChartDomain& domain, int i);

  int dim() const noexcept { return domain_.dim(); }
  const ChartDomain& domain() const noexcept { return domain_; }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& operator[](int k) const { return components_[k]; }

  /// Component values at `x`; domain errors propagate, bounds are not checked.
  Vec operator()(const Vec& x) const;

  /// Symbolic Jacobian, row-major: entry (k, i) is d X^k / d x_i.
  std::vector<Expr> jacobian() const;
  /// Numeric Jacobian from the symbolic one.
  Mat jacobian_at(const Vec& x) const;

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  friend VectorField operator*(double s, const VectorField& a);
  friend VectorField operator*(const Expr& f, const VectorField& a);

 private:
  ChartDomain domain_;
  std::vector<Expr> components_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
VectorField operator*(const Expr& f, const VectorField& a);

/// Affine connection given by its Christoffel symbols Gamma^k_ij, no
/// symmetry assumed. Convention: (nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j.
class Connection {
 public:
  /// `gamma` holds n^3 entries indexed [k][i][j] as k*n*n + i*n + j.
  Connection(ChartDomain domain, std::vector<Expr> gamma);
  static Connection flat(const ChartDomain& domain);

  int dim() const noexcept { return domain_.dim(); }
  const ChartDomain& domain() const noexcept { return domain_; }
  const Expr& gamma(int k, int i, int j) const { return gamma_[index(k, i, j)]; }
  const std::vector<Expr>& gamma() const noexcept { return gamma_; }

  /// Numeric Christoffel symbols at x, same layout as gamma().
  std::vector<double> gamma_at(const Vec& x) const;

  /// w^k = Gamma^k_ij(x) u^i v^j.
  Vec contract(const Vec& x, const Vec& u, const Vec& v) const;
  /// Same contraction with symbols already evaluated by gamma_at().
  Vec contract(const std::vector<double>& g, const Vec& u, const Vec& v) const;

  bool is_flat() const noexcept { return nonzero_.empty(); }

 private:
  int index(int k, int i, int j) const { return (k * dim() + i) * dim() + j; }

  ChartDomain domain_;
  std::vector<Expr> gamma_;
  std::vector<int> nonzero_;  // flat indices of entries that are not literal zero
};

/// Symmetric metric g_ij given by n^2 expressions (row-major).
class MetricField {
 public:
  MetricField(ChartDomain domain, std::vector<Expr> entries);
  int dim() const noexcept { return domain_.dim(); }
  const ChartDomain& domain() const noexcept { return domain_; }
  const Expr& operator()(int i, int j) const { return entries_[i * dim() + j]; }
  Mat at(const Vec& x) const;

 private:
  ChartDomain domain_;
  std::vector<Expr> entries_;
};

// --- Symbolic operations on fields -----------------------------------------

VectorField covariant_derivative(const Connection& c, const VectorField& X, const VectorField& Y);

/// nabla_v Y at the base point of v, computed directly from v.
Vec covariant_derivative_at(const Connection& c, const Vec& x, const Vec& v, const VectorField& Y);

/// T(X,Y) via (Gamma^k_ij - Gamma^k_ji) X^i Y^j.
VectorField torsion(const Connection& c, const VectorField& X, const VectorField& Y);
Vec torsion_at(const Connection& c, const Vec& x, const Vec& u, const Vec& v);

/// The connection with symbols (Gamma^k_ij + Gamma^k_ji)/2: same geodesics, no torsion.
Connection torsion_free_part(const Connection& c);

/// [X,Y] = DY.X - DX.Y.
VectorField lie_bracket(const VectorField& X, const VectorField& Y);

/// <X:Y> = nabla_X Y + nabla_Y X.
VectorField symmetric_product(const Connection& c, const VectorField& X, const VectorField& Y);

/// Levi-Civita symbols, with the inverse metric built from the symbolic
/// adjugate. `probes` (default: the domain center) are checked for symmetry,
/// nonsingularity and positive definiteness.
Connection christoffel_from_metric(const MetricField& g, const std::vector<Vec>& probes = {});

// --- Lifts of fields on M to fields on TM (coordinates (x, v), dim 2n) ------

/// X^V(x,v) = (0, X(x)).
VectorField vertical_lift(const VectorField& X);
/// X^C(x,v) = (X(x), DX(x) v).
VectorField complete_lift(const VectorField& X);
/// X^H(x,v) = (X(x), -Gamma(x)(X(x), v)).
VectorField horizontal_lift(const Connection& c, const VectorField& X);
/// Z(x,v) = (v, -Gamma(x)(v, v)).
VectorField geodesic_spray(const Connection& c);

}  // namespace affine
