#include "affine/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "affine/error.hpp"

namespace affine {

// --- ChartDomain ------------------------------------------------------------

ChartDomain::ChartDomain(int dim) : dim_(dim) {
  if (dim < 1) throw DimensionError("chart dimension must be positive");
}

ChartDomain::ChartDomain(int dim, Vec lower, Vec upper) : ChartDomain(dim) {
  if (lower.size() != dim || upper.size() != dim) throw DimensionError("bounds must have the chart dimension");
  for (int i = 0; i < dim; ++i)
    if (!(lower[i] < upper[i])) throw DimensionError("empty bounding box on axis " + std::to_string(i + 1));
  lower_ = std::move(lower);
  upper_ = std::move(upper);
}

const Vec& ChartDomain::lower() const {
  if (!lower_) throw Error("chart is unbounded");
  return *lower_;
}

const Vec& ChartDomain::upper() const {
  if (!upper_) throw Error("chart is unbounded");
  return *upper_;
}

bool ChartDomain::contains(const Vec& x) const {
  if (x.size() < dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(x[i])) return false;
  if (!lower_) return true;
  for (int i = 0; i < dim_; ++i)
    if (x[i] < (*lower_)[i] || x[i] > (*upper_)[i]) return false;
  return true;
}

void ChartDomain::require(const Vec& x, const char* what) const {
  if (x.size() != dim_)
    throw DimensionError(std::string(what) + " has dimension " + std::to_string(x.size()) + ", chart has " +
                         std::to_string(dim_));
  if (!contains(x)) throw BoundsError(std::string(what) + " lies outside the chart bounds");
}

ChartDomain ChartDomain::tangent_bundle() const {
  if (!lower_) return ChartDomain(2 * dim_);
  const double inf = std::numeric_limits<double>::infinity();
  Vec lo(2 * dim_), hi(2 * dim_);
  lo << *lower_, Vec::Constant(dim_, -inf);
  hi << *upper_, Vec::Constant(dim_, inf);
  return ChartDomain(2 * dim_, lo, hi);
}

Vec ChartDomain::center() const {
  if (!lower_) return Vec::Zero(dim_);
  Vec c = 0.5 * (*lower_ + *upper_);
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(c[i])) c[i] = std::isfinite((*lower_)[i]) ? (*lower_)[i] + 1.0 : std::isfinite((*upper_)[i]) ? (*upper_)[i] - 1.0 : 0.0;
  return c;
}

bool ChartDomain::same_as(const ChartDomain& other) const {
  if (dim_ != other.dim_ || bounded() != other.bounded()) return false;
  if (!bounded()) return true;
  return *lower_ == *other.lower_ && *upper_ == *other.upper_;
}

// --- VectorField ------------------------------------------------------------

namespace {

void require_arity(const ChartDomain& d, const Expr& e) {
  if (e.arity() > d.dim())
    throw DimensionError("expression references x" + std::to_string(e.arity()) + " in a chart of dimension " +
                         std::to_string(d.dim()));
}

void require_same_dim(int a, int b, const char* op) {
  if (a != b)
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

}  // namespace

VectorField::VectorField(ChartDomain domain, std::vector<Expr> components)
    : domain_(std::move(domain)), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != domain_.dim())
    throw DimensionError("vector field needs " + std::to_string(domain_.dim()) + " components, got " +
                         std::to_string(components_.size()));
  for (const auto& e : components_) require_arity(domain_, e);
}

VectorField VectorField::parse(const ChartDomain& domain, const std::vector<std::string>& components) {
  std::vector<Expr> exprs;
  exprs.reserve(components.size());
  for (const auto& s : components) exprs.push_back(affine::parse(s, domain.dim()));
  return VectorField(domain, std::move(exprs));
}

VectorField VectorField::zero(const ChartDomain& domain) {
  return VectorField(domain, std::vector<Expr>(domain.dim()));
}

VectorField VectorField::coordinate(const ChartDomain& domain, int i) {
  std::vector<Expr> c(domain.dim());
  c.at(i) = Expr::constant(1.0);
  return VectorField(domain, std::move(c));
}

Vec VectorField::operator()(const Vec& x) const {
  Vec out(dim());
  const auto xs = as_span(x);
  for (int k = 0; k < dim(); ++k) out[k] = components_[k].eval(xs);
  return out;
}

std::vector<Expr> VectorField::jacobian() const {
  const int n = dim();
  std::vector<Expr> j(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) j[k * n + i] = components_[k].diff(i);
  return j;
}

Mat VectorField::jacobian_at(const Vec& x) const {
  const int n = dim();
  const auto j = jacobian();
  Mat m(n, n);
  const auto xs = as_span(x);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) m(k, i) = j[k * n + i].eval(xs);
  return m;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_dim(a.dim(), b.dim(), "field sum");
  std::vector<Expr> c(a.dim());
  for (int k = 0; k < a.dim(); ++k) c[k] = a[k] + b[k];
  return VectorField(a.domain(), std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_dim(a.dim(), b.dim(), "field difference");
  std::vector<Expr> c(a.dim());
  for (int k = 0; k < a.dim(); ++k) c[k] = a[k] - b[k];
  return VectorField(a.domain(), std::move(c));
}

VectorField operator*(double s, const VectorField& a) { return Expr::constant(s) * a; }

VectorField operator*(const Expr& f, const VectorField& a) {
  std::vector<Expr> c(a.dim());
  for (int k = 0; k < a.dim(); ++k) c[k] = f * a[k];
  return VectorField(a.domain(), std::move(c));
}

// --- Connection -------------------------------------------------------------

Connection::Connection(ChartDomain domain, std::vector<Expr> gamma)
    : domain_(std::move(domain)), gamma_(std::move(gamma)) {
  const std::size_t n = static_cast<std::size_t>(domain_.dim());
  if (gamma_.size() != n * n * n)
    throw DimensionError("connection needs n^3 = " + std::to_string(n * n * n) + " Christoffel symbols, got " +
                         std::to_string(gamma_.size()));
  for (std::size_t i = 0; i < gamma_.size(); ++i) {
    require_arity(domain_, gamma_[i]);
    if (!gamma_[i].is_zero()) nonzero_.push_back(static_cast<int>(i));
  }
}

Connection Connection::flat(const ChartDomain& domain) {
  const std::size_t n = static_cast<std::size_t>(domain.dim());
  return Connection(domain, std::vector<Expr>(n * n * n));
}

std::vector<double> Connection::gamma_at(const Vec& x) const {
  std::vector<double> g(gamma_.size(), 0.0);
  const auto xs = as_span(x);
  for (int idx : nonzero_) g[idx] = gamma_[idx].eval(xs);
  return g;
}

Vec Connection::contract(const Vec& x, const Vec& u, const Vec& v) const { return contract(gamma_at(x), u, v); }

Vec Connection::contract(const std::vector<double>& g, const Vec& u, const Vec& v) const {
  const int n = dim();
  Vec w = Vec::Zero(n);
  for (int idx : nonzero_) {
    const int j = idx % n;
    const int i = (idx / n) % n;
    const int k = idx / (n * n);
    w[k] += g[idx] * u[i] * v[j];
  }
  return w;
}

// --- MetricField ------------------------------------------------------------

MetricField::MetricField(ChartDomain domain, std::vector<Expr> entries)
    : domain_(std::move(domain)), entries_(std::move(entries)) {
  const std::size_t n = static_cast<std::size_t>(domain_.dim());
  if (entries_.size() != n * n) throw DimensionError("metric needs n^2 entries");
  for (const auto& e : entries_) require_arity(domain_, e);
}

Mat MetricField::at(const Vec& x) const {
  const int n = dim();
  Mat g(n, n);
  const auto xs = as_span(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = entries_[i * n + j].eval(xs);
  return g;
}

// --- Symbolic operations ----------------------------------------------------

VectorField covariant_derivative(const Connection& c, const VectorField& X, const VectorField& Y) {
  require_same_dim(X.dim(), Y.dim(), "covariant_derivative");
  require_same_dim(c.dim(), X.dim(), "covariant_derivative");
  const int n = X.dim();
  std::vector<Expr> out(n);
  for (int k = 0; k < n; ++k) {
    Expr e;
    for (int i = 0; i < n; ++i) e += X[i] * Y[k].diff(i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!c.gamma(k, i, j).is_zero()) e += c.gamma(k, i, j) * X[i] * Y[j];
    out[k] = e;
  }
  return VectorField(X.domain(), std::move(out));
}

Vec covariant_derivative_at(const Connection& c, const Vec& x, const Vec& v, const VectorField& Y) {
  require_same_dim(c.dim(), Y.dim(), "covariant_derivative_at");
  require_same_dim(static_cast<int>(v.size()), Y.dim(), "covariant_derivative_at");
  c.domain().require(x, "base point");
  return Y.jacobian_at(x) * v + c.contract(x, v, Y(x));
}

VectorField torsion(const Connection& c, const VectorField& X, const VectorField& Y) {
  require_same_dim(X.dim(), Y.dim(), "torsion");
  require_same_dim(c.dim(), X.dim(), "torsion");
  const int n = X.dim();
  std::vector<Expr> out(n);
  for (int k = 0; k < n; ++k) {
    Expr e;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Expr skew = c.gamma(k, i, j) - c.gamma(k, j, i);
        if (!skew.is_zero()) e += skew * X[i] * Y[j];
      }
    out[k] = e;
  }
  return VectorField(X.domain(), std::move(out));
}

Vec torsion_at(const Connection& c, const Vec& x, const Vec& u, const Vec& v) {
  const auto g = c.gamma_at(x);
  return c.contract(g, u, v) - c.contract(g, v, u);
}

Connection torsion_free_part(const Connection& c) {
  const int n = c.dim();
  std::vector<Expr> g(c.gamma().size());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Expr& a = c.gamma(k, i, j);
        const Expr& b = c.gamma(k, j, i);
        // Keep symmetric entries untouched so a symmetric input is a fixed point.
        g[(k * n + i) * n + j] = (i == j || a.str() == b.str()) ? a : Expr::constant(0.5) * (a + b);
      }
  return Connection(c.domain(), std::move(g));
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  require_same_dim(X.dim(), Y.dim(), "lie_bracket");
  const int n = X.dim();
  std::vector<Expr> out(n);
  for (int k = 0; k < n; ++k) {
    Expr e;
    for (int i = 0; i < n; ++i) {
      e += Y[k].diff(i) * X[i];
      e -= X[k].diff(i) * Y[i];
    }
    out[k] = e;
  }
  return VectorField(X.domain(), std::move(out));
}

VectorField symmetric_product(const Connection& c, const VectorField& X, const VectorField& Y) {
  return covariant_derivative(c, X, Y) + covariant_derivative(c, Y, X);
}

namespace {

using ExprMatrix = std::vector<std::vector<Expr>>;

Expr determinant(const ExprMatrix& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Expr det;
  for (std::size_t col = 0; col < n; ++col) {
    if (m[0][col].is_zero()) continue;
    ExprMatrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != col) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    const Expr term = m[0][col] * determinant(minor);
    det = (col % 2 == 0) ? det + term : det - term;
  }
  return det;
}

/// adj(m)(k, l) = (-1)^(k+l) * det(m without row l and column k).
ExprMatrix adjugate(const ExprMatrix& m) {
  const std::size_t n = m.size();
  ExprMatrix adj(n, std::vector<Expr>(n));
  if (n == 1) {
    adj[0][0] = Expr::constant(1.0);
    return adj;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      ExprMatrix minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == l) continue;
        std::vector<Expr> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != k) row.push_back(m[r][c]);
        minor.push_back(std::move(row));
      }
      const Expr d = determinant(minor);
      adj[k][l] = ((k + l) % 2 == 0) ? d : -d;
    }
  return adj;
}

}  // namespace

Connection christoffel_from_metric(const MetricField& g, const std::vector<Vec>& probes) {
  const int n = g.dim();
  std::vector<Vec> pts = probes;
  if (pts.empty()) pts.push_back(g.domain().center());
  for (const auto& p : pts) {
    const Mat gm = g.at(p);
    if ((gm - gm.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gm.cwiseAbs().maxCoeff()))
      throw DomainError("metric is not symmetric at a probe point");
    Eigen::LLT<Mat> llt(gm);
    if (llt.info() != Eigen::Success || std::abs(gm.determinant()) < 1e-14)
      throw DomainError("metric is singular or not positive definite at a probe point");
  }

  ExprMatrix m(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = g(i, j);
  const Expr det = determinant(m);
  const ExprMatrix adj = adjugate(m);

  std::vector<Expr> gamma(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Expr sum;
        for (int l = 0; l < n; ++l) {
          if (adj[k][l].is_zero()) continue;
          const Expr bracket = g(j, l).diff(i) + g(i, l).diff(j) - g(i, j).diff(l);
          if (!bracket.is_zero()) sum += adj[k][l] * bracket;
        }
        gamma[(k * n + i) * n + j] = sum.is_zero() ? Expr() : Expr::constant(0.5) * sum / det;
      }
  return Connection(g.domain(), std::move(gamma));
}

// --- Lifts ------------------------------------------------------------------

namespace {

Expr fiber_var(int n, int j) { return Expr::variable(n + j); }

}  // namespace

VectorField vertical_lift(const VectorField& X) {
  const int n = X.dim();
  std::vector<Expr> c(2 * n);
  for (int k = 0; k < n; ++k) c[n + k] = X[k];
  return VectorField(X.domain().tangent_bundle(), std::move(c));
}

VectorField complete_lift(const VectorField& X) {
  const int n = X.dim();
  std::vector<Expr> c(2 * n);
  for (int k = 0; k < n; ++k) {
    c[k] = X[k];
    Expr e;
    for (int i = 0; i < n; ++i) {
      const Expr d = X[k].diff(i);
      if (!d.is_zero()) e += d * fiber_var(n, i);
    }
    c[n + k] = e;
  }
  return VectorField(X.domain().tangent_bundle(), std::move(c));
}

VectorField horizontal_lift(const Connection& c, const VectorField& X) {
  require_same_dim(c.dim(), X.dim(), "horizontal_lift");
  const int n = X.dim();
  std::vector<Expr> comp(2 * n);
  for (int k = 0; k < n; ++k) {
    comp[k] = X[k];
    Expr e;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!c.gamma(k, i, j).is_zero()) e -= c.gamma(k, i, j) * X[i] * fiber_var(n, j);
    comp[n + k] = e;
  }
  return VectorField(X.domain().tangent_bundle(), std::move(comp));
}

VectorField geodesic_spray(const Connection& c) {
  const int n = c.dim();
  std::vector<Expr> comp(2 * n);
  for (int k = 0; k < n; ++k) {
    comp[k] = fiber_var(n, k);
    Expr e;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!c.gamma(k, i, j).is_zero()) e -= c.gamma(k, i, j) * fiber_var(n, i) * fiber_var(n, j);
    comp[n + k] = e;
  }
  return VectorField(c.domain().tangent_bundle(), std::move(comp));
}

}  // namespace affine
