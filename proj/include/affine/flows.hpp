#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "affine/geometry.hpp"
#include "affine/linalg.hpp"
#include "affine/ttm.hpp"

namespace affine {

/// Fixed-step classical RK4. The step count for an interval of length |t| is
/// max(min_steps, ceil(|t| * substeps_per_unit_time)) unless fixed_steps is set.
struct IntegratorConfig {
  int substeps_per_unit_time = 200;
  int min_steps = 10;
  std::optional<int> fixed_steps;

  int steps_for(double duration) const;
  void validate() const;
};

/// Trajectory nodes produced by an integration. Times are strictly monotone in
/// the direction of integration.
struct CurveSample {
  std::vector<double> times;
  std::vector<Vec> points;
};

using OdeRhs = std::function<Vec(double, const Vec&)>;
/// Called on every node, including the initial one; may throw.
using NodeCheck = std::function<void(double, const Vec&)>;

/// Integrates y' = f(s, y) from t0 to t1 in `steps` RK4 steps. If `trace` is
/// given it receives every node.
Vec rk4(const OdeRhs& f, Vec y0, double t0, double t1, int steps, const NodeCheck& check = {},
        CurveSample* trace = nullptr);

/// A curve on M that can be integrated forward or backward from time 0. The
/// state vector starts with the n base coordinates; the rest is private.
class Curve {
 public:
  virtual ~Curve() = default;
  virtual const ChartDomain& domain() const = 0;
  virtual Vec initial_state() const = 0;
  virtual Vec state_rhs(double s, const Vec& state) const = 0;
  /// Velocity of the base curve given its state at time s.
  virtual Vec velocity(double s, const Vec& state) const = 0;
  int dim() const { return domain().dim(); }
};

/// Integral curve of X through x0.
class IntegralCurve final : public Curve {
 public:
  IntegralCurve(VectorField X, Vec x0);
  const ChartDomain& domain() const override { return X_.domain(); }
  Vec initial_state() const override { return x0_; }
  Vec state_rhs(double s, const Vec& state) const override;
  Vec velocity(double s, const Vec& state) const override;

 private:
  VectorField X_;
  Vec x0_;
};

/// Geodesic of c with initial velocity v0. State is (x, x').
class GeodesicCurve final : public Curve {
 public:
  GeodesicCurve(Connection c, TangentPoint v0);
  const ChartDomain& domain() const override { return c_.domain(); }
  Vec initial_state() const override;
  Vec state_rhs(double s, const Vec& state) const override;
  Vec velocity(double s, const Vec& state) const override;

 private:
  Connection c_;
  TangentPoint v0_;
};

/// Curve given by closed-form position and velocity.
class ExplicitCurve final : public Curve {
 public:
  ExplicitCurve(ChartDomain domain, std::function<Vec(double)> position, std::function<Vec(double)> velocity);
  const ChartDomain& domain() const override { return domain_; }
  Vec initial_state() const override { return position_(0.0); }
  Vec state_rhs(double s, const Vec& state) const override;
  Vec velocity(double s, const Vec& state) const override;

 private:
  ChartDomain domain_;
  std::function<Vec(double)> position_;
  std::function<Vec(double)> velocity_;
};

/// Phi^X_t(x0).
Vec flow(const VectorField& X, const Vec& x0, double t, const IntegratorConfig& cfg = {});
/// ||Phi_s(Phi_t(x0)) - Phi_{s+t}(x0)||.
double flow_group_property_check(const VectorField& X, const Vec& x0, double s, double t,
                                 const IntegratorConfig& cfg = {});

/// Geodesic from v0 after time t; the fiber of the result is gamma'(t).
TangentPoint geodesic(const Connection& c, const TangentPoint& v0, double t, const IntegratorConfig& cfg = {});
/// Nodes of the geodesic from v0 up to time t; points are (x, x') in R^{2n}.
CurveSample geodesic_trace(const Connection& c, const TangentPoint& v0, double t, const IntegratorConfig& cfg = {});

/// Transport of V0 from curve(t_from) to curve(t_to), i.e. tau^{(t_to, t_from)}.
Vec parallel_transport(const Connection& c, const Curve& curve, const Vec& V0, double t_from, double t_to,
                       const IntegratorConfig& cfg = {});

/// Phi^{X^V}_t(v) = (x, v + t X(x)); exact.
TangentPoint vertical_flow(const VectorField& X, const TangentPoint& v, double t);
/// Phi^{X^H}_t(v): base flows along X, fiber is transported along the integral curve.
TangentPoint horizontal_flow(const Connection& c, const VectorField& X, const TangentPoint& v, double t,
                             const IntegratorConfig& cfg = {});
/// Phi^{X^C}_t(v): variational equation x' = X(x), v' = DX(x) v.
TangentPoint complete_flow(const VectorField& X, const TangentPoint& v, double t, const IntegratorConfig& cfg = {});

/// Central difference at 0 of s -> tau^{(0,s)}(Y(eta(s))), eta the integral curve of X through x.
Vec covariant_derivative_via_transport(const Connection& c, const VectorField& X, const VectorField& Y, const Vec& x,
                                       double step, const IntegratorConfig& cfg = {});

struct TransportDifference {
  Vec lhs;  // tau V - taubar V
  Vec rhs;  // taubar( -1/2 integral taubar^{(0,s)} T(gamma', tau^{(s,0)} V) ds )
  double residual = 0.0;
};

/// Both sides of the torsion correction to parallel transport along the
/// geodesic from v0, up to time t.
TransportDifference transport_difference_check(const Connection& c, const TangentPoint& v0, const Vec& V, double t,
                                               const IntegratorConfig& cfg = {});

}  // namespace affine
