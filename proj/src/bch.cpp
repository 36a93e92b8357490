#include "affine/bch.hpp"

#include "affine/error.hpp"

namespace affine {

namespace {

void require_terms(const std::vector<WeightedField>& terms, const char* op) {
  if (terms.empty()) throw PreconditionError(std::string(op) + ": empty term list");
  for (const auto& t : terms)
    if (t.field.dim() != terms.front().field.dim()) throw DimensionError(std::string(op) + ": dimension mismatch");
}

}  // namespace

VectorField bch1(const std::vector<WeightedField>& terms) {
  require_terms(terms, "bch1");
  VectorField sum = VectorField::zero(terms.front().field.domain());
  for (const auto& t : terms)
    if (t.coefficient != 0.0) sum = sum + t.coefficient * t.field;
  return sum;
}

VectorField bch2(const std::vector<WeightedField>& terms) {
  require_terms(terms, "bch2");
  VectorField sum = VectorField::zero(terms.front().field.domain());
  for (std::size_t a = 0; a < terms.size(); ++a)
    for (std::size_t b = a + 1; b < terms.size(); ++b) {
      const double w = 0.5 * terms[a].coefficient * terms[b].coefficient;
      if (w != 0.0) sum = sum + w * lie_bracket(terms[a].field, terms[b].field);
    }
  return sum;
}

AsymptoticResult asymptotic_check(const std::vector<WeightedField>& terms, const Vec& x,
                                  const IntegratorConfig& cfg) {
  require_terms(terms, "asymptotic_check");
  AsymptoticResult out;
  out.composed = x;
  for (const auto& t : terms) out.composed = flow(t.field, out.composed, t.coefficient, cfg);
  out.truncated = flow(bch1(terms) + bch2(terms), x, 1.0, cfg);
  out.residual = (out.composed - out.truncated).norm();
  return out;
}

}  // namespace affine
