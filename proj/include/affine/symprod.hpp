#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "affine/bch.hpp"
#include "affine/flows.hpp"
#include "affine/geometry.hpp"
#include "affine/ttm.hpp"

namespace affine {

/// The six flow-composition curves whose second derivative at 0 is the
/// symmetric product. U1/U2 conjugate vertical flows by horizontal flows of
/// nabla / nablabar; U3/U4 by parallel transport along integral curves;
/// U3Z/U4Z by parallel transport along geodesics.
enum class Kind { U1, U2, U3, U4, U3Z, U4Z };

inline constexpr std::array<Kind, 6> kAllKinds = {Kind::U1, Kind::U2, Kind::U3, Kind::U4, Kind::U3Z, Kind::U4Z};

std::string_view kind_name(Kind k);
/// Accepts "U1".."U4", "U3Z", "U4Z" (case-insensitive); throws ConfigError otherwise.
Kind parse_kind(std::string_view name);

/// Per-leg step count for a curve probed at parameter t:
/// max(min_steps, ceil(0.05 / |t| * substeps_per_unit_time)).
IntegratorConfig leg_config(double t, const IntegratorConfig& cfg);

TangentPoint upsilon(Kind kind, const Connection& c, const VectorField& X1, const VectorField& X2,
                     const TangentPoint& v, double t, const IntegratorConfig& cfg = {});

/// The eight lifted-field terms of the U1 (or, with bar = true, U2) word in
/// application order, as fields on TM.
std::vector<WeightedField> upsilon_word(const Connection& c, const VectorField& X1, const VectorField& X2, double t,
                                        bool bar = false);

struct EstimatorReport {
  Vec estimate;    // fiber part (or point part for curves on M)
  Vec raw;         // plain second difference at `step`
  Vec base_drift;  // second difference of base coordinates; empty for curves on M
  Vec reference;
  double abs_error = 0.0;
  double raw_abs_error = 0.0;
  double rel_error = 0.0;
  double step = 0.0;
  bool richardson = false;
  /// ||(curve(t) - curve(-t)) / 2t|| at `step`.
  double first_derivative = 0.0;
};

/// 1/2 second derivative at 0 of upsilon against <X1:X2>(x).
EstimatorReport second_derivative_estimate(Kind kind, const Connection& c, const VectorField& X1,
                                           const VectorField& X2, const TangentPoint& v, double t,
                                           const IntegratorConfig& cfg = {}, bool richardson = true);

/// t (tau_{eta2}^{(0,t)} X1(eta2(t)) - X1(x) + tau_{eta1}^{(0,t)} X2(eta1(t)) - X2(x)) at the zero vector of x.
TangentPoint corollary_closed_form(const Connection& c, const VectorField& X1, const VectorField& X2, const Vec& x,
                                   double t, const IntegratorConfig& cfg = {});

/// Phi^Y_{-t} Phi^X_{-t} Phi^Y_t Phi^X_t (x).
Vec bracket_word(const VectorField& X, const VectorField& Y, const Vec& x, double t, const IntegratorConfig& cfg = {});

/// Second-difference estimate of [X,Y](x) from bracket_word.
EstimatorReport lie_bracket_flow_estimate(const VectorField& X, const VectorField& Y, const Vec& x, double t,
                                          const IntegratorConfig& cfg = {}, bool richardson = true);

/// Phi^{X^H}_{-t} Phi^{Y^V}_{-t} Phi^{X^H}_t Phi^{Y^V}_t (v).
TangentPoint crampin_word(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v,
                          double t, const IntegratorConfig& cfg = {});
/// v - t (tau_eta^{(0,t)} Y(eta(t)) - Y(x)), eta the integral curve of X.
TangentPoint crampin_closed_form(const Connection& c, const VectorField& X, const VectorField& Y,
                                 const TangentPoint& v, double t, const IntegratorConfig& cfg = {});

/// Estimates [X^H, Y^V](v) as -1/2 the second derivative of crampin_word; reference nabla_X Y(x).
EstimatorReport crampin_check(const Connection& c, const VectorField& X, const VectorField& Y, const TangentPoint& v,
                              double t, const IntegratorConfig& cfg = {}, bool richardson = true);

}  // namespace affine
