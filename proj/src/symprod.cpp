#include "affine/symprod.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "affine/error.hpp"

namespace affine {

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::U1: return "U1";
    case Kind::U2: return "U2";
    case Kind::U3: return "U3";
    case Kind::U4: return "U4";
    case Kind::U3Z: return "U3Z";
    case Kind::U4Z: return "U4Z";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
  for (Kind k : kAllKinds)
    if (kind_name(k) == up) return k;
  throw ConfigError("unknown curve kind '" + std::string(name) + "'");
}

IntegratorConfig leg_config(double t, const IntegratorConfig& cfg) {
  IntegratorConfig out = cfg;
  if (!cfg.fixed_steps) {
    const double want = t == 0.0 ? 0.0 : std::ceil(0.05 / std::abs(t) * cfg.substeps_per_unit_time);
    out.fixed_steps = std::max(cfg.min_steps, static_cast<int>(std::min(want, 1e7)));
  }
  return out;
}

namespace {

using Leg = std::function<TangentPoint(const TangentPoint&)>;

TangentPoint run_legs(const std::vector<Leg>& legs, TangentPoint v) {
  for (const auto& leg : legs) v = leg(v);
  return v;
}

// Vertical legs interleaved with a conjugating pair: `out` carries the fiber
// from x to the far end of a curve, `back` returns it.
std::vector<Leg> word(const Leg& out2, const Leg& back2, const Leg& out1, const Leg& back1, const VectorField& X1,
                      const VectorField& X2, double t) {
  return {out2,
          [&X1, t](const TangentPoint& p) { return vertical_flow(X1, p, t); },
          back2,
          [&X1, t](const TangentPoint& p) { return vertical_flow(X1, p, -t); },
          out1,
          [&X2, t](const TangentPoint& p) { return vertical_flow(X2, p, t); },
          back1,
          [&X2, t](const TangentPoint& p) { return vertical_flow(X2, p, -t); }};
}

TangentPoint upsilon_horizontal(const Connection& c, const VectorField& X1, const VectorField& X2,
                                const TangentPoint& v, double t, const IntegratorConfig& cfg) {
  auto h = [&c, &cfg](const VectorField& X, double s) {
    return Leg([&c, &cfg, &X, s](const TangentPoint& p) { return horizontal_flow(c, X, p, s, cfg); });
  };
  return run_legs(word(h(X2, t), h(X2, -t), h(X1, t), h(X1, -t), X1, X2, t), v);
}

// Transport legs along a curve through x with far end at time t.
TangentPoint upsilon_transport(const Connection& c, const Curve& curve2, const Curve& curve1, const VectorField& X1,
                               const VectorField& X2, const TangentPoint& v, double t, const IntegratorConfig& cfg) {
  auto end_point = [&cfg, t](const Curve& curve) {
    const Vec y = rk4([&curve](double s, const Vec& st) { return curve.state_rhs(s, st); }, curve.initial_state(),
                      0.0, t, cfg.steps_for(t));
    Vec x = y.head(curve.dim());
    curve.domain().require(x, "curve end point");
    return x;
  };
  const Vec x = v.base;
  const Vec end2 = end_point(curve2);
  const Vec end1 = end_point(curve1);
  auto out = [&](const Curve& curve, const Vec& end) {
    return Leg([&c, &curve, &end, &cfg, t](const TangentPoint& p) {
      return TangentPoint{end, parallel_transport(c, curve, p.fiber, 0.0, t, cfg)};
    });
  };
  auto back = [&](const Curve& curve) {
    return Leg([&c, &curve, &x, &cfg, t](const TangentPoint& p) {
      return TangentPoint{x, parallel_transport(c, curve, p.fiber, t, 0.0, cfg)};
    });
  };
  return run_legs(word(out(curve2, end2), back(curve2), out(curve1, end1), back(curve1), X1, X2, t), v);
}

double norm_or_zero(const Vec& v) { return v.size() == 0 ? 0.0 : v.norm(); }

void finish(EstimatorReport& r) {
  r.abs_error = norm_or_zero(r.estimate - r.reference);
  r.raw_abs_error = norm_or_zero(r.raw - r.reference);
  r.rel_error = r.abs_error / std::max(1.0, norm_or_zero(r.reference));
}

// Second difference 1/2 (f(t) + f(-t) - 2 f(0)) / t^2 of a curve in R^m.
struct Difference {
  Vec second;
  Vec first;
};

Difference differences(const std::function<Vec(double)>& f, const Vec& f0, double t) {
  const Vec fp = f(t);
  const Vec fm = f(-t);
  return {0.5 * (fp + fm - 2.0 * f0) / (t * t), (fp - fm) / (2.0 * t)};
}

Vec stack(const TangentPoint& p) {
  Vec out(p.base.size() + p.fiber.size());
  out << p.base, p.fiber;
  return out;
}

void require_step(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("estimator step must be positive and finite");
}

}  // namespace

TangentPoint upsilon(Kind kind, const Connection& c, const VectorField& X1, const VectorField& X2,
                     const TangentPoint& v, double t, const IntegratorConfig& cfg) {
  const int n = c.dim();
  if (X1.dim() != n || X2.dim() != n || v.base.size() != n || v.fiber.size() != n)
    throw DimensionError("upsilon: dimension mismatch");
  c.domain().require(v.base, "upsilon base point");
  if (t == 0.0) return v;
  const IntegratorConfig leg = leg_config(t, cfg);
  const Vec& x = v.base;
  switch (kind) {
    case Kind::U1: return upsilon_horizontal(c, X1, X2, v, t, leg);
    case Kind::U2: return upsilon_horizontal(torsion_free_part(c), X1, X2, v, t, leg);
    case Kind::U3:
    case Kind::U4: {
      const IntegralCurve eta2(X2, x), eta1(X1, x);
      return upsilon_transport(kind == Kind::U3 ? c : torsion_free_part(c), eta2, eta1, X1, X2, v, t, leg);
    }
    case Kind::U3Z:
    case Kind::U4Z: {
      const GeodesicCurve gamma2(c, {x, X2(x)}), gamma1(c, {x, X1(x)});
      return upsilon_transport(kind == Kind::U3Z ? c : torsion_free_part(c), gamma2, gamma1, X1, X2, v, t, leg);
    }
  }
  throw PreconditionError("upsilon: unknown kind");
}

std::vector<WeightedField> upsilon_word(const Connection& c, const VectorField& X1, const VectorField& X2, double t,
                                        bool bar) {
  const Connection h = bar ? torsion_free_part(c) : c;
  const VectorField X1H = horizontal_lift(h, X1), X2H = horizontal_lift(h, X2);
  const VectorField X1V = vertical_lift(X1), X2V = vertical_lift(X2);
  return {{t, X2H}, {t, X1V}, {-t, X2H}, {-t, X1V}, {t, X1H}, {t, X2V}, {-t, X1H}, {-t, X2V}};
}

EstimatorReport second_derivative_estimate(Kind kind, const Connection& c, const VectorField& X1,
                                           const VectorField& X2, const TangentPoint& v, double t,
                                           const IntegratorConfig& cfg, bool richardson) {
  require_step(t);
  const int n = c.dim();
  auto f = [&](double s) { return stack(upsilon(kind, c, X1, X2, v, s, cfg)); };
  const Vec f0 = stack(v);
  const Difference d = differences(f, f0, t);

  EstimatorReport r;
  r.step = t;
  r.richardson = richardson;
  r.raw = d.second.tail(n);
  r.base_drift = d.second.head(n);
  r.first_derivative = d.first.norm();
  r.estimate = r.raw;
  if (richardson) {
    const Difference half = differences(f, f0, t / 2);
    r.estimate = (4.0 * half.second.tail(n) - r.raw) / 3.0;
  }
  r.reference = symmetric_product(c, X1, X2)(v.base);
  finish(r);
  return r;
}

TangentPoint corollary_closed_form(const Connection& c, const VectorField& X1, const VectorField& X2, const Vec& x,
                                   double t, const IntegratorConfig& cfg) {
  const int n = c.dim();
  if (X1.dim() != n || X2.dim() != n || x.size() != n) throw DimensionError("corollary_closed_form: dimension mismatch");
  c.domain().require(x, "corollary base point");
  if (t == 0.0) return {x, Vec::Zero(n)};
  const IntegratorConfig leg = leg_config(t, cfg);
  const IntegralCurve eta1(X1, x), eta2(X2, x);
  const Vec a = parallel_transport(c, eta2, X1(flow(X2, x, t, leg)), t, 0.0, leg) - X1(x);
  const Vec b = parallel_transport(c, eta1, X2(flow(X1, x, t, leg)), t, 0.0, leg) - X2(x);
  return {x, t * (a + b)};
}

Vec bracket_word(const VectorField& X, const VectorField& Y, const Vec& x, double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return x;
  const IntegratorConfig leg = leg_config(t, cfg);
  Vec y = flow(X, x, t, leg);
  y = flow(Y, y, t, leg);
  y = flow(X, y, -t, leg);
  return flow(Y, y, -t, leg);
}

EstimatorReport lie_bracket_flow_estimate(const VectorField& X, const VectorField& Y, const Vec& x, double t,
                                          const IntegratorConfig& cfg, bool richardson) {
  require_step(t);
  if (X.dim() != Y.dim() || x.size() != X.dim()) throw DimensionError("lie_bracket_flow_estimate: dimension mismatch");
  auto f = [&](double s) { return bracket_word(X, Y, x, s, cfg); };
  const Difference d = differences(f, x, t);
  EstimatorReport r;
  r.step = t;
  r.richardson = richardson;
  r.raw = d.second;
  r.first_derivative = d.first.norm();
  r.estimate = r.raw;
  if (richardson) r.estimate = (4.0 * differences(f, x, t / 2).second - r.raw) / 3.0;
  r.reference = lie_bracket(X, Y)(x);
  finish(r);
  return r;
}

TangentPoint crampin_word(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v,
                          double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return v;
  const IntegratorConfig leg = leg_config(t, cfg);
  TangentPoint p = vertical_flow(Y, v, t);
  p = horizontal_flow(c, X, p, t, leg);
  p = vertical_flow(Y, p, -t);
  return horizontal_flow(c, X, p, -t, leg);
}

TangentPoint crampin_closed_form(const Connection& c, const VectorField& X, const VectorField& Y,
                                 const TangentPoint& v, double t, const IntegratorConfig& cfg) {
  c.domain().require(v.base, "crampin base point");
  if (t == 0.0) return v;
  const IntegratorConfig leg = leg_config(t, cfg);
  const IntegralCurve eta(X, v.base);
  const Vec pulled = parallel_transport(c, eta, Y(flow(X, v.base, t, leg)), t, 0.0, leg);
  return {v.base, v.fiber - t * (pulled - Y(v.base))};
}

EstimatorReport crampin_check(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v,
                              double t, const IntegratorConfig& cfg, bool richardson) {
  require_step(t);
  const int n = c.dim();
  auto f = [&](double s) { return stack(crampin_word(c, X, Y, v, s, cfg)); };
  const Vec f0 = stack(v);
  const Difference d = differences(f, f0, t);
  EstimatorReport r;
  r.step = t;
  r.richardson = richardson;
  r.raw = -d.second.tail(n);
  r.base_drift = d.second.head(n);
  r.first_derivative = d.first.norm();
  r.estimate = r.raw;
  if (richardson) r.estimate = (-4.0 * differences(f, f0, t / 2).second.tail(n) - r.raw) / 3.0;
  r.reference = covariant_derivative(c, X, Y)(v.base);
  finish(r);
  return r;
}

}  // namespace affine
