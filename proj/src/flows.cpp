#include "affine/flows.hpp"

#include <cmath>
#include <string>

#include "affine/error.hpp"

namespace affine {

int IntegratorConfig::steps_for(double duration) const {
  if (fixed_steps) return *fixed_steps;
  const double want = std::ceil(std::abs(duration) * substeps_per_unit_time);
  return std::max(min_steps, static_cast<int>(want));
}

void IntegratorConfig::validate() const {
  if (substeps_per_unit_time < 1) throw ConfigError("substeps_per_unit_time must be at least 1");
  if (min_steps < 1) throw ConfigError("min_steps must be at least 1");
  if (fixed_steps && *fixed_steps < 1) throw ConfigError("fixed_steps must be at least 1");
}

Vec rk4(const OdeRhs& f, Vec y, double t0, double t1, int steps, const NodeCheck& check, CurveSample* trace) {
  if (steps < 1) throw PreconditionError("rk4: step count must be positive");
  const double h = (t1 - t0) / steps;
  auto visit = [&](double s, const Vec& state) {
    if (check) check(s, state);
    if (trace) {
      trace->times.push_back(s);
      trace->points.push_back(state);
    }
  };
  visit(t0, y);
  if (t1 == t0) return y;
  for (int i = 0; i < steps; ++i) {
    const double s = t0 + i * h;
    const Vec k1 = f(s, y);
    const Vec k2 = f(s + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = f(s + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = f(s + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    visit(i + 1 == steps ? t1 : t0 + (i + 1) * h, y);
  }
  return y;
}

namespace {

NodeCheck bounds_check(const ChartDomain& domain, const char* what) {
  return [&domain, what](double s, const Vec& y) {
    if (!y.allFinite())
      throw BoundsError(std::string(what) + ": non-finite state at t=" + std::to_string(s), s);
    if (!domain.contains(y))
      throw BoundsError(std::string(what) + ": trajectory left the chart at t=" + std::to_string(s), s);
  };
}

Vec stack(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

void require_dim(long got, int want, const char* what) {
  if (got != want) throw DimensionError(std::string(what) + ": dimension mismatch");
}

}  // namespace

IntegralCurve::IntegralCurve(VectorField X, Vec x0) : X_(std::move(X)), x0_(std::move(x0)) {
  require_dim(x0_.size(), X_.dim(), "IntegralCurve");
}

Vec IntegralCurve::state_rhs(double, const Vec& state) const { return X_(state); }
Vec IntegralCurve::velocity(double, const Vec& state) const { return X_(state); }

GeodesicCurve::GeodesicCurve(Connection c, TangentPoint v0) : c_(std::move(c)), v0_(std::move(v0)) {
  require_dim(v0_.base.size(), c_.dim(), "GeodesicCurve");
  require_dim(v0_.fiber.size(), c_.dim(), "GeodesicCurve");
}

Vec GeodesicCurve::initial_state() const { return stack(v0_.base, v0_.fiber); }

Vec GeodesicCurve::state_rhs(double, const Vec& state) const {
  const int n = c_.dim();
  const Vec x = state.head(n);
  const Vec v = state.tail(n);
  return stack(v, -c_.contract(x, v, v));
}

Vec GeodesicCurve::velocity(double, const Vec& state) const { return state.tail(c_.dim()); }

ExplicitCurve::ExplicitCurve(ChartDomain domain, std::function<Vec(double)> position,
                             std::function<Vec(double)> velocity)
    : domain_(std::move(domain)), position_(std::move(position)), velocity_(std::move(velocity)) {}

Vec ExplicitCurve::state_rhs(double s, const Vec&) const { return velocity_(s); }
Vec ExplicitCurve::velocity(double s, const Vec&) const { return velocity_(s); }

Vec flow(const VectorField& X, const Vec& x0, double t, const IntegratorConfig& cfg) {
  require_dim(x0.size(), X.dim(), "flow");
  X.domain().require(x0, "flow start");
  return rk4([&X](double, const Vec& y) { return X(y); }, x0, 0.0, t, cfg.steps_for(t),
             bounds_check(X.domain(), "flow"));
}

double flow_group_property_check(const VectorField& X, const Vec& x0, double s, double t,
                                 const IntegratorConfig& cfg) {
  const Vec composed = flow(X, flow(X, x0, t, cfg), s, cfg);
  return (composed - flow(X, x0, s + t, cfg)).norm();
}

TangentPoint geodesic(const Connection& c, const TangentPoint& v0, double t, const IntegratorConfig& cfg) {
  const GeodesicCurve g(c, v0);
  c.domain().require(v0.base, "geodesic start");
  const Vec y = rk4([&g](double s, const Vec& st) { return g.state_rhs(s, st); }, g.initial_state(), 0.0, t,
                    cfg.steps_for(t), bounds_check(c.domain(), "geodesic"));
  const int n = c.dim();
  return {y.head(n), y.tail(n)};
}

CurveSample geodesic_trace(const Connection& c, const TangentPoint& v0, double t, const IntegratorConfig& cfg) {
  const GeodesicCurve g(c, v0);
  c.domain().require(v0.base, "geodesic start");
  CurveSample out;
  rk4([&g](double s, const Vec& st) { return g.state_rhs(s, st); }, g.initial_state(), 0.0, t, cfg.steps_for(t),
      bounds_check(c.domain(), "geodesic"), &out);
  return out;
}

Vec parallel_transport(const Connection& c, const Curve& curve, const Vec& V0, double t_from, double t_to,
                       const IntegratorConfig& cfg) {
  const int n = c.dim();
  require_dim(curve.dim(), n, "parallel_transport");
  require_dim(V0.size(), n, "parallel_transport");
  const NodeCheck check = bounds_check(c.domain(), "parallel transport");

  auto curve_rhs = [&curve](double s, const Vec& st) { return curve.state_rhs(s, st); };
  Vec state = curve.initial_state();
  if (t_from != 0.0) state = rk4(curve_rhs, state, 0.0, t_from, cfg.steps_for(t_from), check);

  const long m = state.size();
  auto joint = [&](double s, const Vec& y) {
    const Vec st = y.head(m);
    const Vec V = y.tail(n);
    const Vec gdot = curve.velocity(s, st);
    return stack(curve.state_rhs(s, st), -c.contract(st.head(n), gdot, V));
  };
  const Vec y = rk4(joint, stack(state, V0), t_from, t_to, cfg.steps_for(t_to - t_from), check);
  return y.tail(n);
}

TangentPoint vertical_flow(const VectorField& X, const TangentPoint& v, double t) {
  require_dim(v.base.size(), X.dim(), "vertical_flow");
  require_dim(v.fiber.size(), X.dim(), "vertical_flow");
  X.domain().require(v.base, "vertical flow base point");
  return {v.base, v.fiber + t * X(v.base)};
}

TangentPoint horizontal_flow(const Connection& c, const VectorField& X, const TangentPoint& v, double t,
                             const IntegratorConfig& cfg) {
  const int n = c.dim();
  require_dim(X.dim(), n, "horizontal_flow");
  require_dim(v.base.size(), n, "horizontal_flow");
  require_dim(v.fiber.size(), n, "horizontal_flow");
  c.domain().require(v.base, "horizontal flow start");
  auto rhs = [&](double, const Vec& y) {
    const Vec x = y.head(n);
    const Vec Xx = X(x);
    return stack(Xx, -c.contract(x, Xx, y.tail(n)));
  };
  const Vec y = rk4(rhs, stack(v.base, v.fiber), 0.0, t, cfg.steps_for(t), bounds_check(c.domain(), "horizontal flow"));
  return {y.head(n), y.tail(n)};
}

TangentPoint complete_flow(const VectorField& X, const TangentPoint& v, double t, const IntegratorConfig& cfg) {
  const int n = X.dim();
  require_dim(v.base.size(), n, "complete_flow");
  require_dim(v.fiber.size(), n, "complete_flow");
  X.domain().require(v.base, "complete flow start");
  const std::vector<Expr> jac = X.jacobian();
  auto rhs = [&](double, const Vec& y) {
    const Vec x = y.head(n);
    Mat J(n, n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) J(k, i) = jac[k * n + i].eval(as_span(x));
    return stack(X(x), J * y.tail(n));
  };
  const Vec y = rk4(rhs, stack(v.base, v.fiber), 0.0, t, cfg.steps_for(t), bounds_check(X.domain(), "complete flow"));
  return {y.head(n), y.tail(n)};
}

Vec covariant_derivative_via_transport(const Connection& c, const VectorField& X, const VectorField& Y, const Vec& x,
                                       double step, const IntegratorConfig& cfg) {
  if (!(step > 0.0)) throw PreconditionError("covariant_derivative_via_transport: step must be positive");
  const IntegralCurve eta(X, x);
  auto pulled_back = [&](double s) {
    const Vec at = flow(X, x, s, cfg);
    return parallel_transport(c, eta, Y(at), s, 0.0, cfg);
  };
  return (pulled_back(step) - pulled_back(-step)) / (2.0 * step);
}

TransportDifference transport_difference_check(const Connection& c, const TangentPoint& v0, const Vec& V, double t,
                                               const IntegratorConfig& cfg) {
  const int n = c.dim();
  require_dim(V.size(), n, "transport_difference_check");
  const Connection cbar = torsion_free_part(c);
  const GeodesicCurve gamma(c, v0);
  c.domain().require(v0.base, "transport difference start");

  int N = cfg.steps_for(t);
  if (N % 2 != 0) ++N;
  IntegratorConfig node_cfg = cfg;
  node_cfg.fixed_steps.reset();

  // Joint state (x, x', tau V, taubar V) sampled at the quadrature nodes.
  auto joint = [&](double, const Vec& y) {
    const Vec x = y.head(n);
    const Vec xd = y.segment(n, n);
    Vec out(4 * n);
    out << xd, -c.contract(x, xd, xd), -c.contract(x, xd, y.segment(2 * n, n)), -cbar.contract(x, xd, y.tail(n));
    return out;
  };
  Vec y0(4 * n);
  y0 << v0.base, v0.fiber, V, V;
  CurveSample nodes;
  const Vec yt = rk4(joint, y0, 0.0, t, N, bounds_check(c.domain(), "transport difference"), &nodes);

  TransportDifference out;
  out.lhs = yt.segment(2 * n, n) - yt.tail(n);

  // Integrand taubar^{(0,s)} T(gamma'(s), tau^{(s,0)} V), pulled back along the
  // same geodesic restarted at the node.
  const double h = t / N;
  Vec integral = Vec::Zero(n);
  for (int i = 0; i <= N; ++i) {
    const Vec& y = nodes.points[static_cast<std::size_t>(i)];
    const Vec x = y.head(n);
    const Vec xd = y.segment(n, n);
    const Vec T = torsion_at(c, x, xd, y.segment(2 * n, n));
    const double s = nodes.times[static_cast<std::size_t>(i)];
    const Vec back =
        s == 0.0 ? T : parallel_transport(cbar, GeodesicCurve(c, {x, xd}), T, 0.0, -s, node_cfg);
    const double w = (i == 0 || i == N) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += w * back;
  }
  integral *= h / 3.0;

  const Vec pushed = parallel_transport(cbar, gamma, -0.5 * integral, 0.0, t, cfg);
  out.rhs = pushed;
  out.residual = (out.lhs - out.rhs).norm();
  return out;
}

}  // namespace affine
