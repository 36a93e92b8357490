// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "affine/bch.hpp"
#include "affine/catalog.hpp"
#include "affine/cli.hpp"
#include "affine/error.hpp"
#include "affine/flows.hpp"
#include "affine/invariance.hpp"
#include "affine/symprod.hpp"
#include "affine/ttm.hpp"
#include "oracles.hpp"

using namespace affine;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Running maximum that also fails on NaN.
struct Worst {
  double value = 0.0;
  bool finite = true;
  void add(double v) {
    if (!std::isfinite(v)) finite = false;
    else value = std::max(value, v);
  }
  bool within(double limit) const { return finite && value <= limit; }
};

TangentPoint draw_tangent(Rng& rng, const catalog::ConnectionEntry& e) {
  return {rng.uniform(e.sample_box.lower, e.sample_box.upper), rng.uniform(e.connection.dim(), -1, 1)};
}

// Shared sweep for criteria 1 to 3: 4 connections x 5 pairs x 6 kinds.
struct SweepEntry {
  EstimatorReport richardson;  // t = 1e-2
  EstimatorReport raw_half;    // t = 5e-3, no extrapolation
};

struct Sweep {
  std::vector<std::vector<SweepEntry>> pairs;  // one vector of six kinds per (connection, pair)
};

Sweep run_sweep() {
  Sweep s;
  Rng rng(2024);
  for (const auto& name : catalog::connection_names()) {
    const auto entry = catalog::connection(name);
    for (int p = 0; p < 5; ++p) {
      const VectorField X1 = catalog::random_field(entry.connection.domain(), rng);
      const VectorField X2 = catalog::random_field(entry.connection.domain(), rng);
      const TangentPoint v = draw_tangent(rng, entry);
      std::vector<SweepEntry> row;
      for (Kind k : kAllKinds)
        row.push_back({second_derivative_estimate(k, entry.connection, X1, X2, v, 1e-2),
                       second_derivative_estimate(k, entry.connection, X1, X2, v, 5e-3, {}, false)});
      s.pairs.push_back(std::move(row));
    }
  }
  return s;
}

Outcome six_ways(const Sweep& s) {
  Worst rel, spread_ratio;
  for (const auto& row : s.pairs) {
    double max_abs = 0.0;
    for (const auto& e : row) {
      rel.add(e.richardson.rel_error);
      max_abs = std::max(max_abs, e.richardson.abs_error);
    }
    for (const auto& a : row)
      for (const auto& b : row) {
        const double gap = (a.richardson.estimate - b.richardson.estimate).norm();
        spread_ratio.add(gap == 0.0 ? 0.0 : gap / (2.0 * max_abs));
      }
  }
  return {rel.within(1e-3) && spread_ratio.within(1.0),
          fmt::format("{} estimates, worst rel error {:.2e} (limit 1e-3), worst spread/(2 max error) {:.3f}",
                      s.pairs.size() * 6, rel.value, spread_ratio.value)};
}

Outcome first_derivative(const Sweep& s) {
  Worst scaled;
  for (const auto& row : s.pairs)
    for (const auto& e : row) {
      const double ref = e.richardson.reference.norm();
      scaled.add(e.richardson.first_derivative / (10.0 * 1e-2 * ref));
      scaled.add(e.raw_half.first_derivative / (10.0 * 5e-3 * ref));
    }
  return {scaled.within(1.0),
          fmt::format("worst |first derivative| / (10 t |reference|) = {:.2e} at t = 1e-2, 5e-3", scaled.value)};
}

Outcome orders(const Sweep& s) {
  double lo = INFINITY, hi = 0.0;
  bool finite = true;
  auto track = [&](double q, double& l, double& h) {
    if (!std::isfinite(q)) finite = false;
    l = std::min(l, q);
    h = std::max(h, q);
  };
  for (const auto& row : s.pairs)
    for (const auto& e : row) track(e.richardson.raw_abs_error / e.raw_half.raw_abs_error, lo, hi);

  Rng rng(77);
  const ChartDomain R3(3);
  double blo = INFINITY, bhi = 0.0, alo = INFINITY, ahi = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const VectorField X = catalog::random_field(R3, rng), Y = catalog::random_field(R3, rng);
    const Vec x = rng.uniform(3, -1, 1);
    track(lie_bracket_flow_estimate(X, Y, x, 1e-2, {}, false).abs_error /
              lie_bracket_flow_estimate(X, Y, x, 5e-3, {}, false).abs_error,
          blo, bhi);
    auto residual = [&](double t) { return asymptotic_check({{t, X}, {t, Y}, {-t, X}, {-t, Y}}, x).residual; };
    track(residual(0.05) / residual(0.025), alo, ahi);
  }
  const bool pass = finite && lo >= 3 && hi <= 5 && blo >= 3 && bhi <= 5 && alo >= 6 && ahi <= 10;
  return {pass, fmt::format("symmetric-product ratios [{:.3f}, {:.3f}], Lie bracket [{:.3f}, {:.3f}], "
                            "BCH residual [{:.3f}, {:.3f}]",
                            lo, hi, blo, bhi, alo, ahi)};
}

TTMPoint draw_ttm(Rng& rng, const Vec& x, const Vec& a, const Vec& b) {
  return {x, a, b, rng.uniform(static_cast<int>(x.size()), -1, 1)};
}

Outcome identities() {
  constexpr int draws = 100;
  std::vector<std::pair<std::string, Worst>> rows;
  auto sweep = [&rows](const std::string& name, const std::function<double(const catalog::ConnectionEntry&, Rng&)>& f) {
    Worst w;
    Rng rng(std::hash<std::string>{}(name) & 0xffffffffu);
    for (const auto& cname : catalog::connection_names()) {
      const auto e = catalog::connection(cname);
      for (int i = 0; i < draws; ++i) w.add(f(e, rng));
    }
    rows.emplace_back(name, w);
  };
  sweep("interchange", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const int n = e.connection.dim();
    const Vec x = rng.uniform(e.sample_box.lower, e.sample_box.upper);
    const Vec A1 = rng.uniform(n, -1, 1), A2 = rng.uniform(n, -1, 1), B1 = rng.uniform(n, -1, 1),
              B2 = rng.uniform(n, -1, 1);
    return interchange_residual(draw_ttm(rng, x, A1, B1), draw_ttm(rng, x, A2, B1), draw_ttm(rng, x, A1, B2),
                                draw_ttm(rng, x, A2, B2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  });
  sweep("complete lift", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const VectorField X = catalog::random_field(e.connection.domain(), rng);
    return complete_lift_involution_residual(X, draw_tangent(rng, e));
  });
  sweep("involution of vlft", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const int n = e.connection.dim();
    const Vec x = rng.uniform(e.sample_box.lower, e.sample_box.upper);
    const TTMPoint w = draw_ttm(rng, x, rng.uniform(n, -1, 1), rng.uniform(n, -1, 1));
    return involution_vlft_residual(w, rng.uniform(n, -1, 1));
  });
  sweep("bracket-vertical", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const VectorField X = catalog::random_field(e.connection.domain(), rng);
    const VectorField Y = catalog::random_field(e.connection.domain(), rng);
    return bracket_vertical_residual(X, Y, rng.uniform(e.sample_box.lower, e.sample_box.upper));
  });
  sweep("torsion lemma", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const TangentPoint v = draw_tangent(rng, e);
    return torsion_lemma_check(e.connection, v, rng.uniform(e.connection.dim(), -1, 1));
  });
  sweep("XC/XH", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const VectorField X = catalog::random_field(e.connection.domain(), rng);
    return xc_xh_identity_check(e.connection, X, draw_tangent(rng, e));
  });
  sweep("nested bracket", [](const catalog::ConnectionEntry& e, Rng& rng) {
    const VectorField X = catalog::random_field(e.connection.domain(), rng);
    const VectorField Y = catalog::random_field(e.connection.domain(), rng);
    return xvzyv_identity_check(e.connection, X, Y, draw_tangent(rng, e));
  });
  bool pass = true;
  std::ostringstream detail;
  detail << draws << " draws per connection;";
  for (const auto& [name, w] : rows) {
    pass = pass && w.within(1e-10);
    detail << fmt::format(" {} {:.1e}", name, w.value);
  }
  return {pass, detail.str()};
}

Outcome transport_difference() {
  Worst torsion, sides;
  Rng rng(12);
  for (const auto& name : catalog::connection_names()) {
    const auto e = catalog::connection(name);
    const bool twisted = name == "torsion";
    for (int i = 0; i < 20; ++i) {
      const TangentPoint v0 = draw_tangent(rng, e);
      const Vec V = rng.uniform(e.connection.dim(), -1, 1);
      const TransportDifference d = transport_difference_check(e.connection, v0, V, rng.uniform(0.05, 0.5));
      if (twisted)
        torsion.add(d.residual);
      else
        sides.add(std::max(d.lhs.norm(), d.rhs.norm()));
    }
  }
  return {torsion.within(1e-5) && sides.within(1e-8),
          fmt::format("torsion residual {:.2e} (limit 1e-5), torsion-free sides {:.2e} (limit 1e-8)", torsion.value,
                      sides.value)};
}

Outcome equivalence() {
  int invariant = 0, non_invariant = 0, mismatches = 0;
  bool counterexample = false;
  double pass_worst = 0.0, fail_least = INFINITY;
  for (const auto& d : catalog::distributions()) {
    const auto e = catalog::connection(d.connection);
    Rng rng(1);
    const auto probes = catalog::probes(e.sample_box, static_cast<int>(d.distribution.generators().size()), 20, rng);
    const InvarianceVerdict v = theorem_equivalence_harness(e.connection, d.distribution, probes, 0.4);
    const Verdict expected = d.invariant ? Verdict::True : Verdict::False;
    if (!v.agree() || v.geodesic_invariant.verdict != expected) ++mismatches;
    for (const CriterionResult* r : {&v.geodesic_invariant, &v.symprod_closed, &v.nabla_xx_closed}) {
      if (d.invariant)
        pass_worst = std::max(pass_worst, r->scan.worst);
      else
        fail_least = std::min(fail_least, r->scan.worst);
    }
    (d.invariant ? invariant : non_invariant)++;
    if (d.connection == "flat" && d.name == "twisted" && !d.invariant) counterexample = true;
  }
  const bool pass = mismatches == 0 && invariant >= 2 && non_invariant >= 2 && counterexample && pass_worst <= 1e-7 &&
                    fail_least >= 1e-2;
  return {pass, fmt::format("{} invariant, {} non-invariant, {} disagreements; pass residuals <= {:.2e}, "
                            "fail residuals >= {:.2e}",
                            invariant, non_invariant, mismatches, pass_worst, fail_least)};
}

Outcome integrators() {
  const Connection hyper = catalog::hyperbolic_half_plane();
  const auto [x1, v1] = oracle::half_plane_unit_geodesic(1.0);
  const TangentPoint end = geodesic(hyper, {Vec{{0.0, 1.0}}, Vec{{1.0, 0.0}}}, 1.0);
  const double geo = std::max((end.base - x1).norm(), (end.fiber - v1).norm());

  Worst round, group;
  Rng rng(31);
  for (const auto& name : catalog::connection_names()) {
    const auto e = catalog::connection(name);
    for (int i = 0; i < 20; ++i) {
      const VectorField X = catalog::random_field(e.connection.domain(), rng);
      const IntegralCurve eta(X, rng.uniform(e.sample_box.lower, e.sample_box.upper));
      const Vec V = rng.uniform(e.connection.dim(), -1, 1);
      const double t = rng.uniform(-0.3, 0.3);
      try {
        const Vec there = parallel_transport(e.connection, eta, V, 0.0, t);
        round.add((parallel_transport(e.connection, eta, there, t, 0.0) - V).norm());
        group.add(flow_group_property_check(X, rng.uniform(e.sample_box.lower, e.sample_box.upper),
                                            rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)));
      } catch (const BoundsError&) {
        // Draw left the chart; the next one replaces it.
        --i;
      }
    }
  }
  return {geo <= 1e-6 && round.within(1e-7) && group.within(1e-7),
          fmt::format("half-plane geodesic error {:.2e} at t = 1, transport round trip {:.2e}, group property {:.2e}",
                      geo, round.value, group.value)};
}

Outcome determinism() {
  const std::vector<const char*> argv{"affine_lab", "--format", "json", "--seed", "11", "verify", "--connection",
                                      "torsion"};
  std::string first;
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    std::ostringstream out, err;
    codes[i] = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (i == 0)
      first = out.str();
    else
      return {codes[0] != kUsage && codes[1] != kUsage && !first.empty() && first == out.str(),
              fmt::format("two verify runs with seed 11: {} bytes, identical = {}", first.size(),
                          first == out.str())};
  }
  return {false, "unreachable"};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  int failures = 0;
  auto report = [&failures](int id, const std::string& title, const std::function<Outcome()>& f) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << fmt::format("{} [{}] {}: {} ({:.1f} s)", o.pass ? "PASS" : "FAIL", id, title, o.detail, secs)
              << std::endl;
  };

  Sweep sweep;
  const auto t0 = Clock::now();
  try {
    sweep = run_sweep();
  } catch (const std::exception& e) {
    std::cout << "sweep failed: " << e.what() << std::endl;
  }
  std::cout << fmt::format("symmetric-product sweep: {:.1f} s", std::chrono::duration<double>(Clock::now() - t0).count())
            << std::endl;
  const bool have_sweep = sweep.pairs.size() == 20;
  auto needs_sweep = [&](Outcome (*f)(const Sweep&)) {
    return [&sweep, have_sweep, f]() { return have_sweep ? f(sweep) : Outcome{false, "sweep incomplete"}; };
  };

  report(1, "symmetric product six ways", needs_sweep(six_ways));
  report(2, "first derivative vanishes", needs_sweep(first_derivative));
  report(3, "convergence orders", needs_sweep(orders));
  report(4, "exact coordinate identities", identities);
  report(5, "transport difference", transport_difference);
  report(6, "geodesic invariance equivalence", equivalence);
  report(7, "integrator self-checks", integrators);
  report(8, "determinism", determinism);

  std::cout << fmt::format("{} of 8 criteria passed in {:.1f} s", 8 - failures,
                           std::chrono::duration<double>(Clock::now() - start).count())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
