#include "affine/invariance.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "affine/error.hpp"

namespace affine {

Distribution::Distribution(ChartDomain domain, std::vector<VectorField> generators, std::optional<int> rank,
                           double rank_tolerance)
    : domain_(std::move(domain)), generators_(std::move(generators)), rank_tolerance_(rank_tolerance) {
  if (generators_.empty()) throw PreconditionError("distribution needs at least one generator");
  for (const auto& g : generators_)
    if (g.dim() != domain_.dim()) throw DimensionError("distribution generator has the wrong dimension");
  rank_ = rank.value_or(static_cast<int>(generators_.size()));
  if (rank_ < 1 || rank_ > static_cast<int>(generators_.size()) || rank_ > domain_.dim())
    throw PreconditionError("declared distribution rank is out of range");
  if (!(rank_tolerance_ > 0.0)) throw PreconditionError("rank tolerance must be positive");
}

Mat Distribution::frame_at(const Vec& x) const {
  Mat F(dim(), static_cast<long>(generators_.size()));
  for (std::size_t i = 0; i < generators_.size(); ++i) F.col(static_cast<long>(i)) = generators_[i](x);
  return F;
}

namespace {

// Left singular vectors above tol.
Mat range_basis(const Mat& A, double tol, std::optional<int> expected_rank) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  if (expected_rank && r != *expected_rank)
    throw RankError("pointwise rank " + std::to_string(r) + " differs from declared rank " +
                    std::to_string(*expected_rank));
  return svd.matrixU().leftCols(r);
}

}  // namespace

Mat Distribution::basis_at(const Vec& x) const {
  domain_.require(x, "distribution base point");
  return range_basis(frame_at(x), rank_tolerance_, rank_);
}

VectorField Distribution::combination(const Vec& a) const {
  if (a.size() != static_cast<long>(generators_.size()))
    throw DimensionError("coefficient count differs from generator count");
  VectorField sum = VectorField::zero(domain_);
  for (std::size_t i = 0; i < generators_.size(); ++i)
    if (a(static_cast<long>(i)) != 0.0) sum = sum + a(static_cast<long>(i)) * generators_[i];
  return sum;
}

double orthogonal_residual(const Mat& A, const Vec& w, double tol, std::optional<int> expected_rank) {
  const Mat B = range_basis(A, tol, expected_rank);
  return (w - B * (B.transpose() * w)).norm();
}

double membership_residual(const Distribution& D, const TangentPoint& v) {
  if (v.base.size() != D.dim() || v.fiber.size() != D.dim()) throw DimensionError("membership_residual: dimension");
  const Mat B = D.basis_at(v.base);
  return (v.fiber - B * (B.transpose() * v.fiber)).norm();
}

double vector_field_in_distribution(const Distribution& D, const VectorField& X, const std::vector<Vec>& probes) {
  double worst = 0.0;
  for (const auto& x : probes) worst = std::max(worst, membership_residual(D, {x, X(x)}));
  return worst;
}

namespace {

void note_worst(ScanResult& r, double value, std::size_t probe) {
  if (!r.worst_probe || value > r.worst) {
    r.worst = value;
    r.worst_probe = probe;
  }
}

void require_probe(const Distribution& D, const Probe& p) {
  if (p.base.size() != D.dim()) throw DimensionError("probe base has the wrong dimension");
  if (p.coefficients.size() != static_cast<long>(D.generators().size()))
    throw DimensionError("probe coefficient count differs from generator count");
}

}  // namespace

ScanResult geodesic_invariance_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes,
                                    double horizon, const IntegratorConfig& cfg) {
  const int n = c.dim();
  ScanResult r;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    require_probe(D, probes[p]);
    const Vec v0 = D.frame_at(probes[p].base) * probes[p].coefficients;
    for (double T : {horizon, -horizon}) {
      CurveSample trace;
      try {
        trace = geodesic_trace(c, {probes[p].base, v0}, T, cfg);
      } catch (const BoundsError& e) {
        r.notes.push_back("probe " + std::to_string(p) + ": " + e.what());
      }
      for (const auto& y : trace.points) note_worst(r, membership_residual(D, {y.head(n), y.tail(n)}), p);
    }
  }
  return r;
}

ScanResult symmetric_closure_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes) {
  const auto& gens = D.generators();
  std::vector<VectorField> products;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i; j < gens.size(); ++j) products.push_back(symmetric_product(c, gens[i], gens[j]));
  ScanResult r;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    require_probe(D, probes[p]);
    for (const auto& P : products) note_worst(r, membership_residual(D, {probes[p].base, P(probes[p].base)}), p);
  }
  return r;
}

ScanResult nabla_xx_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes) {
  const auto& gens = D.generators();
  const std::size_t m = gens.size();
  std::vector<VectorField> pairs;
  pairs.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) pairs.push_back(covariant_derivative(c, gens[i], gens[j]));
  ScanResult r;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    require_probe(D, probes[p]);
    const Vec& x = probes[p].base;
    const Vec& a = probes[p].coefficients;
    Vec w = Vec::Zero(D.dim());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) w += a(static_cast<long>(i)) * a(static_cast<long>(j)) * pairs[i * m + j](x);
    note_worst(r, membership_residual(D, {x, w}), p);
  }
  return r;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

Verdict classify(double worst, double threshold) {
  if (!std::isfinite(worst)) return Verdict::Indeterminate;
  if (worst <= threshold / 10.0) return Verdict::True;
  if (worst >= threshold * 10.0) return Verdict::False;
  return Verdict::Indeterminate;
}

bool InvarianceVerdict::any_indeterminate() const {
  return geodesic_invariant.verdict == Verdict::Indeterminate || symprod_closed.verdict == Verdict::Indeterminate ||
         nabla_xx_closed.verdict == Verdict::Indeterminate;
}

bool InvarianceVerdict::agree() const {
  return !any_indeterminate() && geodesic_invariant.verdict == symprod_closed.verdict &&
         symprod_closed.verdict == nabla_xx_closed.verdict;
}

InvarianceVerdict theorem_equivalence_harness(const Connection& c, const Distribution& D,
                                              const std::vector<Probe>& probes, double horizon,
                                              const IntegratorConfig& cfg, double threshold) {
  if (probes.empty()) throw PreconditionError("equivalence harness needs at least one probe");
  InvarianceVerdict v;
  v.threshold = threshold;
  v.geodesic_invariant.scan = geodesic_invariance_scan(c, D, probes, horizon, cfg);
  v.symprod_closed.scan = symmetric_closure_scan(c, D, probes);
  v.nabla_xx_closed.scan = nabla_xx_scan(c, D, probes);
  for (CriterionResult* r : {&v.geodesic_invariant, &v.symprod_closed, &v.nabla_xx_closed})
    r->verdict = classify(r->scan.worst, threshold);
  v.probes = std::to_string(probes.size()) + " probes, horizon " + std::to_string(horizon);
  return v;
}

double xc_xh_identity_check(const Connection& c, const VectorField& X, const TangentPoint& v) {
  const Vec& x = v.base;
  const TTMPoint lhs = complete_lift_at(X, v);
  const Vec correction = covariant_derivative_at(c, x, v.fiber, X) + torsion_at(c, x, X(x), v.fiber);
  const TTMPoint rhs = add_primary(hlft(c, v, X(x)), vlft(v, correction));
  return distance(lhs, rhs);
}

double xvzyv_identity_check(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v) {
  const int n = c.dim();
  c.domain().require(v.base, "base point");
  const VectorField inner = lie_bracket(geodesic_spray(c), vertical_lift(Y));
  const VectorField lhs = lie_bracket(vertical_lift(X), inner);
  Vec state(2 * n);
  state << v.base, v.fiber;
  Vec rhs = Vec::Zero(2 * n);
  rhs.tail(n) = symmetric_product(c, X, Y)(v.base);
  return (lhs(state) - rhs).norm();
}

double xh_restricted_check(const Connection& c, const Distribution& D, const Vec& coefficients, double alpha,
                           const Vec& x, double fd_step) {
  const int n = D.dim();
  const long m = static_cast<long>(D.generators().size());
  if (coefficients.size() != m) throw DimensionError("coefficient count differs from generator count");
  D.basis_at(x);  // rank check at the base point
  const Vec b = alpha * coefficients;
  const VectorField X = D.combination(coefficients);
  const Vec Xx = X(x);
  const Vec v = alpha * Xx;

  // Tangent space of D at v from the parametrization (y, b) -> (y, F(y) b).
  Mat basis(2 * n, n + m);
  for (int j = 0; j < n; ++j) {
    Vec xp = x, xm = x;
    xp(j) += fd_step;
    xm(j) -= fd_step;
    basis.col(j) << Vec::Unit(n, j), (D.frame_at(xp) * b - D.frame_at(xm) * b) / (2.0 * fd_step);
  }
  const Mat F = D.frame_at(x);
  for (long i = 0; i < m; ++i) basis.col(n + i) << Vec::Zero(n), F.col(i);

  Vec target(2 * n);
  target << Xx, -c.contract(x, Xx, v);
  return orthogonal_residual(basis, target, D.rank_tolerance());
}

}  // namespace affine
