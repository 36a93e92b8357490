#pragma once

#include "affine/geometry.hpp"
#include "affine/linalg.hpp"

namespace affine {

/// A point of TM in natural coordinates: base x and fiber v.
struct TangentPoint {
  Vec base;
  Vec fiber;

  int dim() const noexcept { return static_cast<int>(base.size()); }
};

/// A point of TTM in natural coordinates (x, a, b, c).
///
/// Slot convention used throughout: tau_TM(w) = (x, a) is the point of TM the
/// vector is attached to, and T tau_M(w) = (x, b) is its projection to TM.
/// Slot c is the remaining (fiber-of-fiber) coordinate.
struct TTMPoint {
  Vec base;
  Vec a;
  Vec b;
  Vec c;

  int dim() const noexcept { return static_cast<int>(base.size()); }
};

/// tau_TM(w) = (x, a).
TangentPoint project_primary(const TTMPoint& w);
/// T tau_M(w) = (x, b).
TangentPoint project_secondary(const TTMPoint& w);

/// Largest absolute coordinate difference over all four slots.
double distance(const TTMPoint& w1, const TTMPoint& w2);
double distance(const TangentPoint& v1, const TangentPoint& v2);

/// Anchor tolerance for the fibered additions.
inline constexpr double kAnchorTolerance = 1e-12;

/// +_1: requires equal (x, a); adds slots b and c.
TTMPoint add_primary(const TTMPoint& w1, const TTMPoint& w2);
/// +_2: requires equal (x, b); adds slots a and c.
TTMPoint add_secondary(const TTMPoint& w1, const TTMPoint& w2);
TTMPoint scale_primary(double s, const TTMPoint& w);
TTMPoint scale_secondary(double s, const TTMPoint& w);
TTMPoint sub_primary(const TTMPoint& w1, const TTMPoint& w2);
TTMPoint sub_secondary(const TTMPoint& w1, const TTMPoint& w2);

/// Canonical involution I_M: (x, a, b, c) -> (x, b, a, c).
TTMPoint involution(const TTMPoint& w);

/// vlft(v, u) = (x, v, 0, u).
TTMPoint vlft(const TangentPoint& v, const Vec& u);

/// hlft(v, u) = (x, v, u, w) with w^k = -Gamma^k_ij(x) u^i v^j.
TTMPoint hlft(const Connection& c, const TangentPoint& v, const Vec& u);

/// X^C(v) = (x, v, X(x), DX(x) v).
TTMPoint complete_lift_at(const VectorField& X, const TangentPoint& v);

/// TX(u) = (x, X(x), u, DX(x) u).
TTMPoint tangent_map_at(const VectorField& X, const TangentPoint& u);

/// Residual of hlft(v,u) -_1 I_M(hlft(u,v)) = vlft(v, T(v,u)); identically zero.
double torsion_lemma_check(const Connection& c, const TangentPoint& v, const Vec& u);

// Residuals of the remaining double-tangent-bundle identities. Each returns
// the slot-wise maximum difference between the two sides.

/// (u+_2 v)+_1(w+_2 z) vs (u+_1 w)+_2(v+_1 z), plus the three scaling laws.
double interchange_residual(const TTMPoint& u, const TTMPoint& v, const TTMPoint& w, const TTMPoint& z, double s,
                            double r);

/// X^C(v) vs I_M(TX(v)).
double complete_lift_involution_residual(const VectorField& X, const TangentPoint& v);

/// w +_2 I_M(vlft(u, z)) vs w +_1 vlft(v, z), where v = tau_TM(w), u = T tau_M(w).
double involution_vlft_residual(const TTMPoint& w, const Vec& z);

/// TY(X(x)) -_1 I_M(TX(Y(x))) vs vlft(Y(x), [X,Y](x)).
double bracket_vertical_residual(const VectorField& X, const VectorField& Y, const Vec& x);

}  // namespace affine
