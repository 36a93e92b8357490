#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "affine/geometry.hpp"
#include "affine/invariance.hpp"

namespace affine {

/// Deterministic uniform draws: the top 53 bits of mt19937_64, so that
/// sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vec uniform(const Vec& lo, const Vec& hi);
  Vec uniform(int n, double lo, double hi);
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Axis-aligned box used for drawing sample points.
struct Box {
  Vec lower;
  Vec upper;
};

namespace catalog {

/// A named connection together with a box well inside its chart.
struct ConnectionEntry {
  std::string name;
  Connection connection;
  Box sample_box;
};

/// "flat", "hyperbolic", "sphere", "torsion" (flat is R^3).
std::vector<std::string> connection_names();
ConnectionEntry connection(const std::string& name);

Connection flat(int n);
/// Levi-Civita connection of diag(1/x2^2, 1/x2^2) on x2 in [0.1, 10].
Connection hyperbolic_half_plane();
/// Levi-Civita connection of diag(1, sin(x1)^2) on x1 in [0.5, 2.6].
Connection sphere();
/// Gamma^k_ij = lambda * eps_ijk on R^3.
Connection epsilon_torsion(double lambda = 1.0);

struct DistributionEntry {
  std::string name;
  std::string connection;
  Distribution distribution;
  bool invariant;  // expected verdict
};

/// The shipped (connection, distribution) pairs for the equivalence harness.
std::vector<DistributionEntry> distributions();
/// Distributions by name over a given chart ("plane", "twisted", "e1", "e2").
Distribution distribution(const std::string& name, const ChartDomain& domain);

/// Field with components c0 + sum c_i x_i + d x_p x_q + e sin(x_r), coefficients in [-1, 1].
VectorField random_field(const ChartDomain& domain, Rng& rng);

/// 3^n grid over the box plus `random_count` uniform draws, each with random
/// coefficients in [-1, 1]^m.
std::vector<Probe> probes(const Box& box, int generators, int random_count, Rng& rng);

}  // namespace catalog
}  // namespace affine
