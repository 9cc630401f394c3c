#pragma once

#include "gqmet/gaussian.hpp"
#include "gqmet/metrology.hpp"

namespace gqmet {

// Relative entropy of coherence in the Fock basis, measured against the
// thermal reference state of equal mean energy. All entropies in nats.
struct CoherenceReport {
  double coherence = 0.0;
  double ref_occupation = 0.0;
  double state_entropy = 0.0;
  double ref_entropy = 0.0;
};

// [Tr Sigma + d1^2 + d2^2 - 2] / 4
double ref_occupation(const GaussianState& state);

CoherenceReport coherence(const GaussianState& state);

/// d C / d theta along the family: central differences with one Richardson
/// refinement (h, h/2); one-sided second-order stencils at domain edges.
double coherence_derivative(const StateFamily& f, double theta, double step = kDefaultStep);

}  // namespace gqmet
