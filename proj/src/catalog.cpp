#include "affine/catalog.hpp"

#include <limits>

#include "affine/error.hpp"

namespace affine {

Vec Rng::uniform(const Vec& lo, const Vec& hi) {
  Vec out(lo.size());
  for (long i = 0; i < lo.size(); ++i) out(i) = uniform(lo(i), hi(i));
  return out;
}

Vec Rng::uniform(int n, double lo, double hi) {
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = uniform(lo, hi);
  return out;
}

namespace catalog {

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

ChartDomain box_domain(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return ChartDomain(static_cast<int>(lo.size()), vec(lo), vec(hi));
}

Expr x(int i) { return Expr::variable(i); }

}  // namespace

std::vector<std::string> connection_names() { return {"flat", "hyperbolic", "sphere", "torsion"}; }

Connection flat(int n) { return Connection::flat(ChartDomain(n)); }

Connection hyperbolic_half_plane() {
  const ChartDomain d = box_domain({-10, 0.1}, {10, 10});
  const Expr w = Expr::constant(1) / pow(x(1), 2);
  return christoffel_from_metric(MetricField(d, {w, Expr(), Expr(), w}));
}

Connection sphere() {
  const ChartDomain d = box_domain({0.5, -10}, {2.6, 10});
  return christoffel_from_metric(MetricField(d, {Expr::constant(1), Expr(), Expr(), pow(sin(x(0)), 2)}));
}

Connection epsilon_torsion(double lambda) {
  const ChartDomain d(3);
  std::vector<Expr> g(27);
  auto eps = [](int i, int j, int k) { return (i - j) * (j - k) * (k - i) / 2; };
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (const int e = eps(i, j, k); e != 0) g[(k * 3 + i) * 3 + j] = Expr::constant(lambda * e);
  return Connection(d, std::move(g));
}

ConnectionEntry connection(const std::string& name) {
  if (name == "flat") return {name, flat(3), {Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)}};
  if (name == "hyperbolic") return {name, hyperbolic_half_plane(), {vec({-1, 0.5}), vec({1, 2})}};
  if (name == "sphere") return {name, sphere(), {vec({1.0, -1}), vec({2.1, 1})}};
  if (name == "torsion") return {name, epsilon_torsion(), {Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)}};
  throw ConfigError("unknown catalog connection '" + name + "'");
}

Distribution distribution(const std::string& name, const ChartDomain& domain) {
  const int n = domain.dim();
  if (name == "plane") {
    if (n < 3) throw ConfigError("distribution 'plane' needs dimension at least 3");
    return Distribution(domain, {VectorField::coordinate(domain, 0), VectorField::coordinate(domain, 1)});
  }
  if (name == "twisted") {
    if (n != 3) throw ConfigError("distribution 'twisted' needs dimension 3");
    return Distribution(domain, {VectorField::coordinate(domain, 0),
                                 VectorField(domain, {Expr(), Expr::constant(1), x(0)})});
  }
  if (name.size() >= 2 && name[0] == 'e') {
    const int i = std::stoi(name.substr(1)) - 1;
    if (i < 0 || i >= n) throw ConfigError("coordinate distribution index out of range: " + name);
    return Distribution(domain, {VectorField::coordinate(domain, i)});
  }
  throw ConfigError("unknown catalog distribution '" + name + "'");
}

std::vector<DistributionEntry> distributions() {
  std::vector<DistributionEntry> out;
  auto add = [&out](const std::string& conn, const std::string& dist, bool invariant) {
    const ConnectionEntry e = connection(conn);
    out.push_back({dist, conn, distribution(dist, e.connection.domain()), invariant});
  };
  add("flat", "plane", true);
  add("torsion", "plane", true);
  add("hyperbolic", "e2", true);
  add("sphere", "e1", true);
  add("flat", "twisted", false);
  add("torsion", "twisted", false);
  add("hyperbolic", "e1", false);
  add("sphere", "e2", false);
  return out;
}

VectorField random_field(const ChartDomain& domain, Rng& rng) {
  const int n = domain.dim();
  auto pick = [&rng, n]() { return std::min(n - 1, static_cast<int>(rng.uniform() * n)); };
  std::vector<Expr> comps;
  for (int k = 0; k < n; ++k) {
    Expr e = Expr::constant(rng.uniform(-1, 1));
    for (int i = 0; i < n; ++i) e += rng.uniform(-1, 1) * x(i);
    const double d = rng.uniform(-1, 1);
    const int p = pick(), q = pick();
    e += d * (x(p) * x(q));
    const double s = rng.uniform(-1, 1);
    e += s * sin(x(pick()));
    comps.push_back(e);
  }
  return VectorField(domain, std::move(comps));
}

std::vector<Probe> probes(const Box& box, int generators, int random_count, Rng& rng) {
  const int n = static_cast<int>(box.lower.size());
  std::vector<Probe> out;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int idx = 0; idx < total; ++idx) {
    Vec base(n);
    int rest = idx;
    for (int i = 0; i < n; ++i) {
      base(i) = box.lower(i) + 0.5 * (rest % 3) * (box.upper(i) - box.lower(i));
      rest /= 3;
    }
    out.push_back({base, rng.uniform(generators, -1, 1)});
  }
  for (int r = 0; r < random_count; ++r) {
    Vec base = rng.uniform(box.lower, box.upper);
    out.push_back({base, rng.uniform(generators, -1, 1)});
  }
  return out;
}

}  // namespace catalog
}  // namespace affine
