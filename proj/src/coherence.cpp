#include "gqmet/coherence.hpp"

#include <cmath>

#include "gqmet/errors.hpp"

namespace gqmet {

double ref_occupation(const GaussianState& state) {
  require_physical(state.cov, "ref_occupation");
  const auto& d = state.mean;
  return std::max(0.0, (state.cov.trace() + d.q * d.q + d.p * d.p - 2.0) / 4.0);
}

CoherenceReport coherence(const GaussianState& state) {
  CoherenceReport r;
  r.ref_occupation = ref_occupation(state);
  r.state_entropy = von_neumann_entropy(state);
  r.ref_entropy = thermal_entropy(r.ref_occupation);
  r.coherence = r.ref_entropy - r.state_entropy;
  return r;
}

namespace {

double stencil(const StateFamily& f, double theta, double h) {
  auto c = [&](double t) { return coherence(f.evaluate(t)).coherence; };
  if (theta - h >= f.lower && theta + h <= f.upper) {
    return (c(theta + h) - c(theta - h)) / (2.0 * h);
  }
  if (theta + 2.0 * h <= f.upper) {
    return (-3.0 * c(theta) + 4.0 * c(theta + h) - c(theta + 2.0 * h)) / (2.0 * h);
  }
  if (theta - 2.0 * h >= f.lower) {
    return (3.0 * c(theta) - 4.0 * c(theta - h) + c(theta - 2.0 * h)) / (2.0 * h);
  }
  throw DomainError("coherence_derivative: family domain narrower than the stencil");
}

}  // namespace

double coherence_derivative(const StateFamily& f, double theta, double step) {
  if (!(step > 0.0)) throw DomainError("coherence_derivative: step must be positive");
  const double h = step * std::max(1.0, std::abs(theta));
  const double coarse = stencil(f, theta, h);
  const double fine = stencil(f, theta, 0.5 * h);
  const double out = (4.0 * fine - coarse) / 3.0;
  if (!std::isfinite(out)) throw NumericalFailure("coherence_derivative: non-finite result");
  return out;
}

}  // namespace gqmet
