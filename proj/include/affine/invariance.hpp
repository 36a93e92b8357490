#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affine/flows.hpp"
#include "affine/geometry.hpp"
#include "affine/ttm.hpp"

namespace affine {

/// A smooth constant-rank distribution given by a spanning family of fields.
class Distribution {
 public:
  /// `rank` defaults to the number of generators.
  Distribution(ChartDomain domain, std::vector<VectorField> generators, std::optional<int> rank = {},
               double rank_tolerance = 1e-8);

  const ChartDomain& domain() const noexcept { return domain_; }
  const std::vector<VectorField>& generators() const noexcept { return generators_; }
  int rank() const noexcept { return rank_; }
  double rank_tolerance() const noexcept { return rank_tolerance_; }
  int dim() const noexcept { return domain_.dim(); }

  /// n x m matrix whose columns are the generators at x.
  Mat frame_at(const Vec& x) const;
  /// Orthonormal n x rank basis of D_x; RankError if the pointwise rank differs.
  Mat basis_at(const Vec& x) const;
  /// sum_i a_i X_i.
  VectorField combination(const Vec& a) const;

 private:
  ChartDomain domain_;
  std::vector<VectorField> generators_;
  int rank_;
  double rank_tolerance_;
};

/// Norm of the component of `w` orthogonal to the column span of `A`, the
/// span being cut at singular values <= tol.
double orthogonal_residual(const Mat& A, const Vec& w, double tol, std::optional<int> expected_rank = {});

/// Distance of v's fiber from D at v's base.
double membership_residual(const Distribution& D, const TangentPoint& v);
/// max over probes of membership_residual(D, (x, X(x))).
double vector_field_in_distribution(const Distribution& D, const VectorField& X, const std::vector<Vec>& probes);

/// A base point together with generator coefficients.
struct Probe {
  Vec base;
  Vec coefficients;
};

struct ScanResult {
  double worst = 0.0;
  /// Index of the probe achieving `worst`, if any.
  std::optional<std::size_t> worst_probe;
  /// Probes whose trajectory left the chart; the scan used the nodes before the exit.
  std::vector<std::string> notes;
};

/// Geodesics from (x, sum a_i X_i(x)) over [-T, T]; worst membership residual at the nodes.
ScanResult geodesic_invariance_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes,
                                    double horizon, const IntegratorConfig& cfg = {});
/// Worst residual of <X_i : X_j> over all unordered generator pairs, equal pairs included.
ScanResult symmetric_closure_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes);
/// Worst residual of nabla_X X for X = sum a_i X_i with the probe coefficients.
ScanResult nabla_xx_scan(const Connection& c, const Distribution& D, const std::vector<Probe>& probes);

enum class Verdict { True, False, Indeterminate };
std::string_view verdict_name(Verdict v);

/// True at or below threshold/10, false at or above threshold*10, indeterminate between.
Verdict classify(double worst, double threshold);

struct CriterionResult {
  Verdict verdict = Verdict::Indeterminate;
  ScanResult scan;
};

struct InvarianceVerdict {
  CriterionResult geodesic_invariant;
  CriterionResult symprod_closed;
  CriterionResult nabla_xx_closed;
  std::string probes;
  double threshold = 1e-5;

  bool any_indeterminate() const;
  /// All three verdicts decisive and equal.
  bool agree() const;
};

InvarianceVerdict theorem_equivalence_harness(const Connection& c, const Distribution& D,
                                              const std::vector<Probe>& probes, double horizon,
                                              const IntegratorConfig& cfg = {}, double threshold = 1e-5);

/// X^C(v) against X^H(v) +_1 vlft(v, nabla_v X + T(X(x), v)).
double xc_xh_identity_check(const Connection& c, const VectorField& X, const TangentPoint& v);

/// [X^V, [Z, Y^V]](v) against <X:Y>^V(v), all brackets symbolic on TM.
double xvzyv_identity_check(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v);

/// Distance of X^H(v), v = alpha X(x), from a finite-difference basis of the
/// tangent space of D (as a submanifold of TM) at v. X = sum a_i X_i.
double xh_restricted_check(const Connection& c, const Distribution& D, const Vec& coefficients, double alpha,
                           const Vec& x, double fd_step = 1e-5);

}  // namespace affine
