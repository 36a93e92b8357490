#include <doctest.h>

#include <cmath>

#include "affine/catalog.hpp"
#include "affine/error.hpp"
#include "affine/flows.hpp"
#include "oracles.hpp"

using namespace affine;

namespace {

const ChartDomain R1(1);
const ChartDomain R2(2);
const ChartDomain R3(3);

Vec v1(double a) { return Vec{{a}}; }

IntegratorConfig steps(int n) {
  IntegratorConfig cfg;
  cfg.fixed_steps = n;
  return cfg;
}

}  // namespace

TEST_CASE("flows of simple fields") {
  CHECK(flow(VectorField::zero(R2), Vec{{0.3, 0.4}}, 1.7)(0) == 0.3);
  CHECK(std::abs(flow(VectorField::parse(R1, {"1"}), v1(0), 2.0)(0) - 2.0) <= 1e-13);
  CHECK(std::abs(flow(VectorField::parse(R1, {"x1"}), v1(1), 1.0)(0) - std::exp(1.0)) <= 1e-9);
  CHECK(std::abs(flow(VectorField::parse(R1, {"x1"}), v1(1), -1.0)(0) - std::exp(-1.0)) <= 1e-9);
  CHECK(flow(VectorField::parse(R1, {"x1"}), v1(0.7), 0.0)(0) == 0.7);
}

TEST_CASE("rk4 is fourth order") {
  const VectorField X = VectorField::parse(R1, {"x1"});
  double prev = 0.0;
  for (int m : {4, 8, 16, 32}) {
    const double err = std::abs(flow(X, v1(1), 1.0, steps(m))(0) - std::exp(1.0));
    if (prev > 0.0) {
      CHECK(prev / err >= 12.0);
      CHECK(prev / err <= 20.0);
    }
    prev = err;
  }
}

TEST_CASE("rk4 traces strictly monotone nodes and reports bounds exits") {
  CurveSample trace;
  rk4([](double, const Vec& y) { return y; }, v1(1.0), 0.0, -1.0, 10, {}, &trace);
  REQUIRE(trace.times.size() == 11);
  for (std::size_t i = 1; i < trace.times.size(); ++i) CHECK(trace.times[i] < trace.times[i - 1]);
  CHECK(trace.points.size() == trace.times.size());

  const ChartDomain box(1, v1(-1), v1(1));
  try {
    flow(VectorField::parse(box, {"1"}), v1(0), 3.0);
    FAIL("expected a bounds error");
  } catch (const BoundsError& e) {
    CHECK(e.time() > 0.99);
    CHECK(e.time() < 1.1);
  }
  CHECK_THROWS_AS(flow(VectorField::parse(R1, {"x1^2"}), v1(1), 2.0), Error);
}

TEST_CASE("flow group property") {
  Rng rng(2);
  const VectorField X = catalog::random_field(R3, rng);
  const Vec x0 = rng.uniform(3, -1, 1);
  CHECK(flow_group_property_check(X, x0, 0.0, 0.0) == 0.0);
  CHECK(flow_group_property_check(X, x0, -0.4, 0.4) <= 1e-8);
  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    for (int trial = 0; trial < 10; ++trial) {
      const VectorField Y = catalog::random_field(entry.connection.domain(), rng);
      const Vec y = rng.uniform(entry.sample_box.lower, entry.sample_box.upper);
      CHECK(flow_group_property_check(Y, y, rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) <= 1e-7);
    }
  }
}

TEST_CASE("geodesics") {
  const Connection flat = Connection::flat(R3);
  const TangentPoint v{Vec{{0.1, 0.2, 0.3}}, Vec{{1.0, -2.0, 0.5}}};
  const TangentPoint g = geodesic(flat, v, 0.8);
  CHECK((g.base - (v.base + 0.8 * v.fiber)).norm() <= 1e-14);
  CHECK((g.fiber - v.fiber).norm() == 0.0);

  const Connection hyper = catalog::hyperbolic_half_plane();
  const TangentPoint still = geodesic(hyper, {Vec{{0.0, 1.0}}, Vec::Zero(2)}, 1.0);
  CHECK(still.base == Vec{{0.0, 1.0}});
  CHECK(still.fiber.isZero());

  for (double t : {0.5, 1.0, -1.0}) {
    const TangentPoint h = geodesic(hyper, {Vec{{0.0, 1.0}}, Vec{{1.0, 0.0}}}, t);
    const auto [pos, vel] = oracle::half_plane_unit_geodesic(t);
    CHECK((h.base - pos).norm() <= 1e-6);
    CHECK((h.fiber - vel).norm() <= 1e-6);
  }
  const CurveSample trace = geodesic_trace(hyper, {Vec{{0.0, 1.0}}, Vec{{1.0, 0.0}}}, 1.0);
  CHECK(trace.points.front().size() == 4);
  CHECK(trace.times.back() == 1.0);
}

TEST_CASE("parallel transport") {
  Rng rng(3);
  const Connection flat = Connection::flat(R3);
  const VectorField X = catalog::random_field(R3, rng);
  const Vec V = rng.uniform(3, -1, 1);
  CHECK((parallel_transport(flat, IntegralCurve(X, Vec::Zero(3)), V, 0.0, 0.5) - V).norm() == 0.0);

  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    const Connection& c = entry.connection;
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = rng.uniform(entry.sample_box.lower, entry.sample_box.upper);
      const VectorField Y = catalog::random_field(c.domain(), rng);
      const IntegralCurve eta(Y, x);
      const Vec A = rng.uniform(c.dim(), -1, 1), B = rng.uniform(c.dim(), -1, 1);
      const double t = rng.uniform(-0.5, 0.5), a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
      const Vec there = parallel_transport(c, eta, A, 0.0, t);
      CHECK((parallel_transport(c, eta, there, t, 0.0) - A).norm() <= 1e-7);
      const Vec lin = parallel_transport(c, eta, a * A + b * B, 0.0, t);
      CHECK((lin - a * there - b * parallel_transport(c, eta, B, 0.0, t)).norm() <= 1e-9);
      // Starting away from 0 exercises advancing the curve first.
      const double s = rng.uniform(-0.3, 0.3);
      const Vec mid = parallel_transport(c, eta, A, 0.0, s);
      CHECK((parallel_transport(c, eta, mid, s, t) - there).norm() <= 1e-7);

      const TangentPoint v0{x, A};
      const Vec moved = parallel_transport(c, GeodesicCurve(c, v0), A, 0.0, t);
      CHECK((moved - geodesic(c, v0, t).fiber).norm() <= 1e-7);
    }
  }

  // Along the unit-circle geodesic of the half-plane, transported vectors keep their hyperbolic length.
  const Connection hyper = catalog::hyperbolic_half_plane();
  const ExplicitCurve circle(
      hyper.domain(), [](double s) { return oracle::half_plane_unit_geodesic(s).first; },
      [](double s) { return oracle::half_plane_unit_geodesic(s).second; });
  const Vec W{{0.3, 0.7}};
  const Vec Wt = parallel_transport(hyper, circle, W, 0.0, 1.0);
  const double y1 = oracle::half_plane_unit_geodesic(1.0).first(1);
  CHECK(std::abs(Wt.norm() / y1 - W.norm()) <= 1e-8);
}

TEST_CASE("vertical flow") {
  Rng rng(4);
  const VectorField X = catalog::random_field(R3, rng);
  const TangentPoint v{rng.uniform(3, -1, 1), rng.uniform(3, -1, 1)};
  CHECK(distance(vertical_flow(X, v, 0.0), v) == 0.0);
  CHECK(distance(vertical_flow(VectorField::zero(R3), v, 2.0), v) == 0.0);
  const TangentPoint w = vertical_flow(VectorField::parse(R2, {"1", "0"}), {Vec::Zero(2), Vec::Zero(2)}, 3.0);
  CHECK(w.fiber == Vec{{3.0, 0.0}});
  CHECK(distance(vertical_flow(X, v, 1.3), {v.base, v.fiber + 1.3 * X(v.base)}) == 0.0);
}

TEST_CASE("horizontal flow") {
  Rng rng(5);
  const Connection flat = Connection::flat(R3);
  const VectorField X = catalog::random_field(R3, rng);
  const TangentPoint v{rng.uniform(3, -1, 1), rng.uniform(3, -1, 1)};
  const TangentPoint hf = horizontal_flow(flat, X, v, 0.4);
  CHECK((hf.base - flow(X, v.base, 0.4)).norm() <= 1e-14);
  CHECK((hf.fiber - v.fiber).norm() == 0.0);
  CHECK(distance(horizontal_flow(flat, X, v, 0.0), v) == 0.0);

  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    const Connection& c = entry.connection;
    for (int trial = 0; trial < 5; ++trial) {
      const VectorField Y = catalog::random_field(c.domain(), rng);
      const TangentPoint u{rng.uniform(entry.sample_box.lower, entry.sample_box.upper), rng.uniform(c.dim(), -1, 1)};
      const double t = rng.uniform(-0.3, 0.3);
      const TangentPoint h = horizontal_flow(c, Y, u, t);
      CHECK((h.fiber - parallel_transport(c, IntegralCurve(Y, u.base), u.fiber, 0.0, t)).norm() <= 1e-9);
      CHECK(distance(horizontal_flow(c, Y, h, -t), u) <= 1e-7);
    }
  }
}

TEST_CASE("complete flow") {
  const VectorField nil = VectorField::parse(R2, {"x2", "0"});
  const TangentPoint v{Vec{{0.2, 0.5}}, Vec{{1.5, -0.5}}};
  const TangentPoint w = complete_flow(nil, v, 1.0);
  CHECK((w.fiber - Vec{{1.0, -0.5}}).norm() <= 1e-12);

  const VectorField lin = VectorField::parse(R2, {"0.3*x1 - 0.8*x2", "0.5*x1 + 0.1*x2"});
  const Mat A{{0.3, -0.8}, {0.5, 0.1}};
  const TangentPoint u = complete_flow(lin, v, 1.0);
  CHECK((u.fiber - oracle::expm(A) * v.fiber).norm() <= 1e-9);
  CHECK((u.base - oracle::expm(A) * v.base).norm() <= 1e-9);
  CHECK(distance(complete_flow(VectorField::zero(R2), v, 1.0), v) == 0.0);

  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorField X = catalog::random_field(R3, rng);
    const Vec x = rng.uniform(3, -1, 1), d = rng.uniform(3, -1, 1);
    const double t = rng.uniform(-0.5, 0.5);
    const double h = 1e-4;
    const Vec fd = (flow(X, x + h * d, t) - flow(X, x - h * d, t)) / (2 * h);
    CHECK((complete_flow(X, {x, d}, t).fiber - fd).norm() <= 1e-6);
  }
}

TEST_CASE("covariant derivative through transport") {
  const Connection flat = Connection::flat(R3);
  const VectorField C = VectorField::parse(R3, {"1", "-2", "0.5"});
  CHECK(covariant_derivative_via_transport(flat, VectorField::parse(R3, {"x2", "x3", "1"}), C, Vec::Zero(3), 1e-3)
            .norm() <= 1e-12);

  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    const Connection& c = entry.connection;
    const ChartDomain& d = c.domain();
    const VectorField X = d.dim() == 2 ? VectorField::parse(d, {"0.5 + 0.2*x2", "0.3*sin(x1)"})
                                       : VectorField::parse(d, {"0.5 + 0.2*x2", "0.3*sin(x1)", "0.4*x1*x3"});
    const VectorField Y = d.dim() == 2 ? VectorField::parse(d, {"cos(x2)", "0.5*x1^2"})
                                       : VectorField::parse(d, {"cos(x2)", "0.5*x1^2", "0.2 + x2"});
    const Vec x = entry.sample_box.lower + 0.3 * (entry.sample_box.upper - entry.sample_box.lower);
    const Vec ref = covariant_derivative(c, X, Y)(x);
    const double e1 = (covariant_derivative_via_transport(c, X, Y, x, 1e-3) - ref).norm();
    CHECK(e1 <= 1e-6);
    const double e2 = (covariant_derivative_via_transport(c, X, Y, x, 2e-2) - ref).norm();
    const double e3 = (covariant_derivative_via_transport(c, X, Y, x, 1e-2) - ref).norm();
    CHECK(e2 / e3 >= 3.0);
    CHECK(e2 / e3 <= 5.0);
  }
}

TEST_CASE("transport difference") {
  Rng rng(7);
  const Connection eps = catalog::epsilon_torsion();
  for (int trial = 0; trial < 10; ++trial) {
    const TangentPoint v0{rng.uniform(3, -1, 1), rng.uniform(3, -1, 1)};
    const Vec V = rng.uniform(3, -1, 1);
    const TransportDifference d = transport_difference_check(eps, v0, V, 0.5);
    CHECK(d.residual <= 1e-5);
    CHECK(d.lhs.norm() > 1e-3);
  }
  for (const char* name : {"flat", "hyperbolic", "sphere"}) {
    const auto entry = catalog::connection(name);
    const int n = entry.connection.dim();
    const TangentPoint v0{rng.uniform(entry.sample_box.lower, entry.sample_box.upper), rng.uniform(n, -1, 1)};
    const TransportDifference d = transport_difference_check(entry.connection, v0, rng.uniform(n, -1, 1), 0.4);
    CHECK(d.lhs.norm() <= 1e-8);
    CHECK(d.rhs.norm() <= 1e-8);
  }
  const TransportDifference flat =
      transport_difference_check(Connection::flat(R3), {Vec::Zero(3), Vec::Ones(3)}, Vec::Ones(3), 0.5);
  CHECK(flat.residual == 0.0);
}

TEST_CASE("integrator configuration") {
  IntegratorConfig cfg;
  CHECK(cfg.steps_for(0.001) == 10);
  CHECK(cfg.steps_for(1.0) == 200);
  CHECK(cfg.steps_for(-0.5) == 100);
  cfg.substeps_per_unit_time = 0;
  CHECK_THROWS(cfg.validate());
}
