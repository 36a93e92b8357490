#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affine/catalog.hpp"
#include "affine/flows.hpp"
#include "affine/geometry.hpp"
#include "affine/invariance.hpp"

namespace affine {

/// How a connection is specified in a problem file.
struct ConnectionSpec {
  std::string catalog;                                 // catalog name, or empty
  std::optional<double> lambda;                        // parameter of the torsion catalog entry
  std::map<std::string, std::string> christoffel;      // "k,i,j" (1-based) -> expression
  std::vector<std::vector<std::string>> metric;        // n x n expressions
};

/// A distribution generator: a field name or inline component expressions.
struct GeneratorSpec {
  std::string field;
  std::vector<std::string> components;
};

struct DistributionSpec {
  std::vector<GeneratorSpec> generators;
  std::optional<int> rank;
  double rank_tolerance = 1e-8;
};

struct ProbeSettings {
  std::optional<Box> box;  // defaults to the connection's sample box
  int random = 20;
  std::uint64_t seed = 1;
  double horizon = 0.4;
};

struct EstimatorSettings {
  double t = 1e-2;
  bool richardson = true;
  double tolerance = 1e-3;
  std::vector<std::string> kinds;  // empty: all six
};

struct VerifySettings {
  int draws = 100;
  std::uint64_t seed = 42;
};

struct ConvergenceSettings {
  std::string target = "lie_bracket";
  double t0 = 0.1;
  int points = 8;
};

/// A problem file. Expression strings are kept as text and parsed against
/// the chart of whichever connection a command selects.
struct ProblemConfig {
  std::optional<int> dim;
  std::optional<Box> bounds;
  std::map<std::string, ConnectionSpec> connections;
  std::string connection = "flat";
  std::map<std::string, std::vector<std::string>> fields;
  std::map<std::string, DistributionSpec> distributions;
  std::string distribution;
  std::vector<std::string> symprod_fields;  // two names
  std::optional<Vec> point;
  std::optional<Vec> fiber;
  ProbeSettings probes;
  IntegratorConfig integrator;
  EstimatorSettings estimator;
  VerifySettings verify;
  ConvergenceSettings convergence;
  double threshold = 1e-5;
};

/// Parses JSON text; throws ConfigError on malformed input or unknown keys.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

/// A resolved connection with the box used for random draws and probes.
struct ResolvedConnection {
  std::string name;
  Connection connection;
  Box sample_box;
};

/// Looks `name` up among the configured connections, then the catalog.
ResolvedConnection resolve_connection(const ProblemConfig& cfg, const std::string& name);
VectorField resolve_field(const ProblemConfig& cfg, const std::string& name, const ChartDomain& domain);
/// Configured distributions first, then catalog names ("plane", "twisted", "e1", ...).
Distribution resolve_distribution(const ProblemConfig& cfg, const std::string& name, const ChartDomain& domain);

}  // namespace affine
