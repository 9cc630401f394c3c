#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "gqmet/gaussian.hpp"
#include "reference/reference_values.hpp"

namespace gqmet::testing {

inline double rel(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Fixed-seed generator so property failures reproduce.
class Gen {
 public:
  explicit Gen(std::uint64_t seed = 20261016) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  // Physical covariance: rotated squeezed thermal state.
  CovarianceMatrix cov(double max_nu = 6.0, double max_r = 1.0) {
    const double nu = uniform(1.0, max_nu);
    const double r = uniform(-max_r, max_r);
    const double t = uniform(0.0, 3.14159);
    const double a = nu * std::exp(2 * r);
    const double b = nu * std::exp(-2 * r);
    const double c = std::cos(t);
    const double s = std::sin(t);
    return {c * c * a + s * s * b, c * s * (a - b), s * s * a + c * c * b};
  }

  GaussianState state(double max_nu = 6.0, double max_r = 1.0, double max_d = 2.0) {
    return {{uniform(-max_d, max_d), uniform(-max_d, max_d)}, cov(max_nu, max_r)};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace gqmet::testing
