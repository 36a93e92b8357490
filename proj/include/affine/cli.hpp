#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "affine/config.hpp"
#include "affine/report.hpp"

namespace affine {

/// Exit codes shared by every command.
enum ExitCode : int { kPass = 0, kFail = 1, kIndeterminate = 2, kUsage = 64 };

/// Command-line overrides of config entries. Empty / unset means "use the config".
struct CommandOptions {
  std::string connection;
  std::string distribution;
  std::vector<std::string> fields;
  std::optional<Vec> point;
  std::optional<Vec> fiber;
  std::vector<std::string> kinds;
  std::string suite = "all";
  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

/// Per-kind symmetric product estimates with convergence ratios over t, t/2, t/4.
Report cmd_symprod(const ProblemConfig& cfg, const CommandOptions& opt);
/// Property suites: "lemmas", "bch", "transport" or "all".
Report cmd_verify(const ProblemConfig& cfg, const CommandOptions& opt);
/// Three-way geodesic-invariance verdict for one (connection, distribution) pair.
Report cmd_invariance(const ProblemConfig& cfg, const CommandOptions& opt);
/// Error ladder over t0, t0/2, ... for one estimator, with fitted orders.
/// Targets: "lie_bracket", "crampin", "bch", "symprod:<kind>".
Report cmd_convergence(const ProblemConfig& cfg, const CommandOptions& opt);

/// Full command-line driver. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace affine
