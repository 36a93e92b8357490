#pragma once

#include <vector>

#include "affine/flows.hpp"
#include "affine/geometry.hpp"

namespace affine {

/// The term t_i X_i of a flow word. Words are listed in application order:
/// terms[0] is flowed first.
struct WeightedField {
  double coefficient;
  VectorField field;
};

/// sum_i t_i X_i.
VectorField bch1(const std::vector<WeightedField>& terms);
/// 1/2 sum_{a<b} t_a t_b [X_a, X_b].
VectorField bch2(const std::vector<WeightedField>& terms);

struct AsymptoticResult {
  Vec composed;  // the flow word applied to x
  Vec truncated;  // Phi^{bch1 + bch2}_1(x)
  double residual = 0.0;
};

/// Compares the flow word with the time-one flow of its degree-2 truncation.
AsymptoticResult asymptotic_check(const std::vector<WeightedField>& terms, const Vec& x,
                                  const IntegratorConfig& cfg = {});

}  // namespace affine
