#include <doctest.h>

#include <cmath>

#include "affine/catalog.hpp"
#include "affine/error.hpp"
#include "affine/geometry.hpp"
#include "oracles.hpp"

using namespace affine;

namespace {

const ChartDomain R2(2);
const ChartDomain R3(3);

VectorField field(const ChartDomain& d, std::vector<std::string> comps) { return VectorField::parse(d, comps); }

oracle::Map as_map(const VectorField& X) {
  return [X](const Vec& x) { return X(x); };
}

oracle::Symbols symbols_of(const Connection& c) {
  return [c](const Vec& x) { return c.gamma_at(x); };
}

bool near(const Vec& a, const Vec& b, double tol) { return (a - b).lpNorm<Eigen::Infinity>() <= tol; }

}  // namespace

TEST_CASE("covariant derivative on flat R2") {
  const Connection flat = Connection::flat(R2);
  CHECK(covariant_derivative(flat, VectorField::coordinate(R2, 0), VectorField::coordinate(R2, 1))(Vec{{0.3, 0.1}})
            .isZero());
  const VectorField X = field(R2, {"x2", "0"}), Y = field(R2, {"0", "x1"});
  const VectorField D = covariant_derivative(flat, X, Y);
  Rng rng(3);
  for (int p = 0; p < 10; ++p) {
    const Vec x = rng.uniform(2, -2, 2);
    CHECK(near(D(x), Vec{{0.0, x(1)}}, 1e-15));
    CHECK(near(D(x), oracle::covariant_derivative(symbols_of(flat), as_map(X), as_map(Y), x), 1e-9));
  }
  const Connection torsion = catalog::epsilon_torsion();
  const VectorField Z = VectorField::zero(R3);
  CHECK(covariant_derivative(torsion, field(R3, {"x2", "sin(x1)", "1"}), Z)(Vec{{0.2, 0.3, 0.4}}).isZero());
}

TEST_CASE("covariant derivative at a tangent vector") {
  const Connection flat = Connection::flat(R2);
  CHECK(near(covariant_derivative_at(flat, Vec{{0.0, 0.0}}, Vec{{1.0, 0.0}}, field(R2, {"0", "x1"})),
             Vec{{0.0, 1.0}}, 0.0));
  CHECK(covariant_derivative_at(flat, Vec{{0.4, 0.1}}, Vec::Zero(2), field(R2, {"x1*x2", "x1"})).isZero());

  const ChartDomain R1(1);
  const Connection one(R1, {Expr::constant(1)});
  CHECK(covariant_derivative_at(one, Vec{{0.0}}, Vec{{2.0}}, field(R1, {"x1"}))(0) == 2.0);
}

TEST_CASE("tensoriality: three extensions of the same vector") {
  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    const ChartDomain& d = entry.connection.domain();
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x = rng.uniform(entry.sample_box.lower, entry.sample_box.upper);
      const VectorField Y = catalog::random_field(d, rng);
      const VectorField X0 = catalog::random_field(d, rng);
      const Vec v = X0(x);
      const Vec direct = covariant_derivative_at(entry.connection, x, v, Y);
      for (int e = 0; e < 3; ++e) {
        const VectorField W = catalog::random_field(d, rng);
        const Vec shift = v - W(x);
        std::vector<Expr> comps;
        for (int k = 0; k < d.dim(); ++k) comps.push_back(W[k] + Expr::constant(shift(k)));
        const VectorField X(d, comps);
        CHECK(near(covariant_derivative(entry.connection, X, Y)(x), direct, 1e-10));
      }
      CHECK(near(direct,
                 oracle::covariant_derivative(symbols_of(entry.connection), as_map(X0), as_map(Y), x), 1e-7));
    }
  }
}

TEST_CASE("torsion") {
  const Connection hyper = catalog::hyperbolic_half_plane();
  const VectorField X = field(hyper.domain(), {"x2", "x1"}), Y = field(hyper.domain(), {"1", "x1*x2"});
  CHECK(torsion(hyper, X, Y)(Vec{{0.3, 1.2}}).norm() < 1e-15);

  const Connection eps = catalog::epsilon_torsion();
  const Vec T12 = torsion_at(eps, Vec::Zero(3), Vec{{1.0, 0.0, 0.0}}, Vec{{0.0, 1.0, 0.0}});
  CHECK(near(T12, Vec{{0.0, 0.0, 2.0}}, 0.0));
  const std::vector<double> g = oracle::epsilon_symbols();
  Rng rng(5);
  for (int p = 0; p < 10; ++p) {
    const VectorField A = catalog::random_field(R3, rng), B = catalog::random_field(R3, rng);
    const Vec x = rng.uniform(3, -1, 1);
    const Vec tab = torsion(eps, A, B)(x);
    CHECK(near(tab, -torsion(eps, B, A)(x), 1e-14));
    CHECK(near(tab, oracle::contract(g, A(x), B(x)) - oracle::contract(g, B(x), A(x)), 1e-13));
    // T(X,Y) = nabla_X Y - nabla_Y X - [X,Y]
    const Vec alt = covariant_derivative(eps, A, B)(x) - covariant_derivative(eps, B, A)(x) - lie_bracket(A, B)(x);
    CHECK(near(tab, alt, 1e-13));
  }
}

TEST_CASE("torsion-free part") {
  const Connection eps = catalog::epsilon_torsion();
  const Connection bar = torsion_free_part(eps);
  for (const Expr& e : bar.gamma()) CHECK(e.eval(std::vector<double>{0.1, 0.2, 0.3}) == 0.0);
  const Connection sphere = catalog::sphere();
  const Connection sbar = torsion_free_part(sphere);
  const Vec x{{1.2, 0.4}};
  const auto a = sphere.gamma_at(x), b = sbar.gamma_at(x);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));

  const Connection lam = catalog::epsilon_torsion(0.7);
  Rng rng(9);
  for (int p = 0; p < 10; ++p) {
    const VectorField X = catalog::random_field(R3, rng), Y = catalog::random_field(R3, rng);
    const Vec y = rng.uniform(3, -1, 1);
    CHECK(torsion(torsion_free_part(lam), X, Y)(y).norm() == 0.0);
    const Vec lhs = covariant_derivative(torsion_free_part(lam), X, Y)(y);
    const Vec rhs = covariant_derivative(lam, X, Y)(y) - 0.5 * torsion(lam, X, Y)(y);
    CHECK(near(lhs, rhs, 1e-12));
  }
}

TEST_CASE("Lie bracket") {
  const VectorField X = field(R2, {"x2", "0"}), Y = field(R2, {"0", "x1"});
  Rng rng(1);
  for (int p = 0; p < 10; ++p) {
    const Vec x = rng.uniform(2, -2, 2);
    CHECK(near(lie_bracket(X, Y)(x), Vec{{-x(0), x(1)}}, 1e-15));
    CHECK(near(lie_bracket(X, Y)(x), oracle::lie_bracket(as_map(X), as_map(Y), x), 1e-9));
  }
  CHECK(lie_bracket(VectorField::coordinate(R2, 0), field(R2, {"3", "-1"}))(Vec{{0.5, 0.5}}).isZero());
  for (int p = 0; p < 10; ++p) {
    const VectorField A = catalog::random_field(R3, rng), B = catalog::random_field(R3, rng),
                      C = catalog::random_field(R3, rng);
    const Vec x = rng.uniform(3, -1, 1);
    CHECK(lie_bracket(A, A)(x).norm() <= 1e-15);
    CHECK(near(lie_bracket(A, B)(x), -lie_bracket(B, A)(x), 1e-14));
    CHECK(near(lie_bracket(2.0 * A + B, C)(x), 2.0 * lie_bracket(A, C)(x) + lie_bracket(B, C)(x), 1e-13));
  }
}

TEST_CASE("symmetric product") {
  const Connection flat = Connection::flat(R2);
  const VectorField X = field(R2, {"x2", "0"}), Y = field(R2, {"0", "x1"});
  const Vec x{{1.0, 2.0}};
  CHECK(near(symmetric_product(flat, X, Y)(x), Vec{{1.0, 2.0}}, 0.0));
  const oracle::Symbols zero = [](const Vec&) { return std::vector<double>(8, 0.0); };
  const Vec both = oracle::covariant_derivative(zero, as_map(X), as_map(Y), x) +
                   oracle::covariant_derivative(zero, as_map(Y), as_map(X), x);
  CHECK(near(symmetric_product(flat, X, Y)(x), both, 1e-9));

  const Connection eps = catalog::epsilon_torsion();
  Rng rng(2);
  for (int p = 0; p < 10; ++p) {
    const VectorField A = catalog::random_field(R3, rng), B = catalog::random_field(R3, rng);
    const Vec y = rng.uniform(3, -1, 1);
    CHECK(near(symmetric_product(eps, A, B)(y), symmetric_product(eps, B, A)(y), 1e-14));
    CHECK(near(symmetric_product(eps, A, A)(y), 2.0 * covariant_derivative(eps, A, A)(y), 1e-14));
  }
}

TEST_CASE("Levi-Civita connection from a metric") {
  const ChartDomain R2b(2);
  const MetricField euclid(R2b, {Expr::constant(1), Expr(), Expr(), Expr::constant(1)});
  const Connection lc = christoffel_from_metric(euclid);
  for (const Expr& e : lc.gamma()) CHECK(e.is_zero());

  const Connection hyper = catalog::hyperbolic_half_plane();
  auto g = [](const Vec& x) { return Mat(Mat::Identity(2, 2) / (x(1) * x(1))); };
  Rng rng(4);
  for (int p = 0; p < 10; ++p) {
    const Vec x{{rng.uniform(-1, 1), rng.uniform(0.5, 2.0)}};
    const auto ours = hyper.gamma_at(x);
    const auto ref = oracle::levi_civita(g, x);
    for (std::size_t i = 0; i < ours.size(); ++i) CHECK(std::abs(ours[i] - ref[i]) <= 1e-7);
    CHECK(hyper.gamma(0, 0, 1).eval(std::vector<double>{x(0), x(1)}) == doctest::Approx(-1.0 / x(1)));
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(ours[(k * 2 + i) * 2 + j] == ours[(k * 2 + j) * 2 + i]);
  }

  const Connection sphere = catalog::sphere();
  auto gs = [](const Vec& x) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 1) = std::sin(x(0)) * std::sin(x(0));
    return m;
  };
  const Vec x{{1.1, 0.3}};
  const auto ours = sphere.gamma_at(x), ref = oracle::levi_civita(gs, x);
  for (std::size_t i = 0; i < ours.size(); ++i) CHECK(std::abs(ours[i] - ref[i]) <= 1e-8);

  // A metric with off-diagonal terms in three dimensions.
  const ChartDomain d3(3, Vec::Constant(3, -1), Vec::Constant(3, 1));
  std::vector<Expr> m;
  for (const char* s : {"2 + x2^2", "x1*0.3", "0", "x1*0.3", "1 + x3^2", "0.1*sin(x1)", "0", "0.1*sin(x1)", "3"})
    m.push_back(parse(s, 3));
  const Connection c3 = christoffel_from_metric(MetricField(d3, m));
  auto g3 = [&m](const Vec& y) {
    Mat out(3, 3);
    for (int i = 0; i < 9; ++i) out(i / 3, i % 3) = m[i].eval(as_span(y));
    return out;
  };
  const Vec y{{0.2, -0.4, 0.5}};
  const auto ours3 = c3.gamma_at(y), ref3 = oracle::levi_civita(g3, y);
  for (std::size_t i = 0; i < ours3.size(); ++i) CHECK(std::abs(ours3[i] - ref3[i]) <= 1e-8);

  const MetricField singular(R2b, {Expr::constant(1), Expr::constant(1), Expr::constant(1), Expr::constant(1)});
  CHECK_THROWS(christoffel_from_metric(singular));
}

TEST_CASE("chart bounds and dimension checks") {
  const ChartDomain box(2, Vec{{0.0, 0.0}}, Vec{{1.0, 1.0}});
  CHECK(box.contains(Vec{{0.5, 0.5}}));
  CHECK_FALSE(box.contains(Vec{{1.5, 0.5}}));
  CHECK_THROWS_AS(box.require(Vec{{1.5, 0.5}}), BoundsError);
  CHECK_THROWS_AS(lie_bracket(VectorField::zero(R2), VectorField::zero(R3)), DimensionError);
  CHECK_THROWS_AS(VectorField::parse(R2, {"x1"}), DimensionError);
}

TEST_CASE("lifted fields on TM") {
  const Connection eps = catalog::epsilon_torsion();
  Rng rng(8);
  const VectorField X = catalog::random_field(R3, rng);
  const Vec x = rng.uniform(3, -1, 1), v = rng.uniform(3, -1, 1);
  Vec xv(6);
  xv << x, v;
  const Mat DX = X.jacobian_at(x);
  CHECK(near(vertical_lift(X)(xv).tail(3), X(x), 0.0));
  CHECK(vertical_lift(X)(xv).head(3).isZero());
  CHECK(near(complete_lift(X)(xv).tail(3), DX * v, 1e-14));
  CHECK(near(horizontal_lift(eps, X)(xv).tail(3), -eps.contract(x, X(x), v), 1e-14));
  CHECK(near(geodesic_spray(eps)(xv).head(3), v, 0.0));
  CHECK(geodesic_spray(eps)(xv).tail(3).norm() <= 1e-15);
}
