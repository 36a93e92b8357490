#include "affine/ttm.hpp"

#include <algorithm>

#include "affine/error.hpp"

namespace affine {

namespace {

double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void require_anchor(const Vec& x1, const Vec& y1, const Vec& x2, const Vec& y2, const char* op) {
  if (x1.size() != x2.size() || y1.size() != y2.size()) throw DimensionError(std::string(op) + ": dimension mismatch");
  if (max_abs(x1 - x2) > kAnchorTolerance || max_abs(y1 - y2) > kAnchorTolerance)
    throw PreconditionError(std::string(op) + ": operands lie over different anchor points");
}

void require_lengths(const TangentPoint& v, const Vec& u, const char* op) {
  if (v.fiber.size() != v.base.size() || u.size() != v.base.size())
    throw DimensionError(std::string(op) + ": length mismatch");
}

}  // namespace

TangentPoint project_primary(const TTMPoint& w) { return {w.base, w.a}; }
TangentPoint project_secondary(const TTMPoint& w) { return {w.base, w.b}; }

double distance(const TTMPoint& w1, const TTMPoint& w2) {
  return std::max({max_abs(w1.base - w2.base), max_abs(w1.a - w2.a), max_abs(w1.b - w2.b), max_abs(w1.c - w2.c)});
}

double distance(const TangentPoint& v1, const TangentPoint& v2) {
  return std::max(max_abs(v1.base - v2.base), max_abs(v1.fiber - v2.fiber));
}

TTMPoint add_primary(const TTMPoint& w1, const TTMPoint& w2) {
  require_anchor(w1.base, w1.a, w2.base, w2.a, "+1");
  return {w1.base, w1.a, w1.b + w2.b, w1.c + w2.c};
}

TTMPoint add_secondary(const TTMPoint& w1, const TTMPoint& w2) {
  require_anchor(w1.base, w1.b, w2.base, w2.b, "+2");
  return {w1.base, w1.a + w2.a, w1.b, w1.c + w2.c};
}

TTMPoint scale_primary(double s, const TTMPoint& w) { return {w.base, w.a, s * w.b, s * w.c}; }
TTMPoint scale_secondary(double s, const TTMPoint& w) { return {w.base, s * w.a, w.b, s * w.c}; }

TTMPoint sub_primary(const TTMPoint& w1, const TTMPoint& w2) { return add_primary(w1, scale_primary(-1.0, w2)); }
TTMPoint sub_secondary(const TTMPoint& w1, const TTMPoint& w2) {
  return add_secondary(w1, scale_secondary(-1.0, w2));
}

TTMPoint involution(const TTMPoint& w) { return {w.base, w.b, w.a, w.c}; }

TTMPoint vlft(const TangentPoint& v, const Vec& u) {
  require_lengths(v, u, "vlft");
  return {v.base, v.fiber, Vec::Zero(u.size()), u};
}

TTMPoint hlft(const Connection& c, const TangentPoint& v, const Vec& u) {
  require_lengths(v, u, "hlft");
  c.domain().require(v.base, "hlft base point");
  return {v.base, v.fiber, u, -c.contract(v.base, u, v.fiber)};
}

TTMPoint complete_lift_at(const VectorField& X, const TangentPoint& v) {
  require_lengths(v, v.fiber, "complete_lift_at");
  X.domain().require(v.base, "complete_lift_at base point");
  return {v.base, v.fiber, X(v.base), X.jacobian_at(v.base) * v.fiber};
}

TTMPoint tangent_map_at(const VectorField& X, const TangentPoint& u) {
  require_lengths(u, u.fiber, "tangent_map_at");
  X.domain().require(u.base, "tangent_map_at base point");
  return {u.base, X(u.base), u.fiber, X.jacobian_at(u.base) * u.fiber};
}

double torsion_lemma_check(const Connection& c, const TangentPoint& v, const Vec& u) {
  const TTMPoint lhs = sub_primary(hlft(c, v, u), involution(hlft(c, {v.base, u}, v.fiber)));
  const TTMPoint rhs = vlft(v, torsion_at(c, v.base, v.fiber, u));
  return distance(lhs, rhs);
}

double interchange_residual(const TTMPoint& u, const TTMPoint& v, const TTMPoint& w, const TTMPoint& z, double s,
                            double r) {
  double res = distance(add_primary(add_secondary(u, v), add_secondary(w, z)),
                        add_secondary(add_primary(u, w), add_primary(v, z)));
  res = std::max(res, distance(scale_primary(s, add_secondary(u, v)),
                               add_secondary(scale_primary(s, u), scale_primary(s, v))));
  res = std::max(res, distance(scale_secondary(s, add_primary(u, w)),
                               add_primary(scale_secondary(s, u), scale_secondary(s, w))));
  res = std::max(res, distance(scale_primary(s, scale_secondary(r, w)), scale_secondary(r, scale_primary(s, w))));
  return res;
}

double complete_lift_involution_residual(const VectorField& X, const TangentPoint& v) {
  return distance(complete_lift_at(X, v), involution(tangent_map_at(X, v)));
}

double involution_vlft_residual(const TTMPoint& w, const Vec& z) {
  const TangentPoint v = project_primary(w);
  const TangentPoint u = project_secondary(w);
  return distance(add_secondary(w, involution(vlft(u, z))), add_primary(w, vlft(v, z)));
}

double bracket_vertical_residual(const VectorField& X, const VectorField& Y, const Vec& x) {
  const TTMPoint lhs = sub_primary(tangent_map_at(Y, {x, X(x)}), involution(tangent_map_at(X, {x, Y(x)})));
  const TTMPoint rhs = vlft({x, Y(x)}, lie_bracket(X, Y)(x));
  return distance(lhs, rhs);
}

}  // namespace affine
