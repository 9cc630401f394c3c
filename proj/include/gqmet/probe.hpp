#pragma once

#include <variant>

#include "gqmet/gaussian.hpp"

namespace gqmet {

// Dimensionless measurement uncertainties; sigma = 1 leaves the thermal state untouched.
struct MeasurementSettings {
  double sigma_q = 1.0;
  double sigma_p = 1.0;

  void validate() const;
  MeasurementSettings swapped() const { return {sigma_p, sigma_q}; }
};

// sigma_q = sigma / sqrt(1 - epsilon), sigma_p = sigma / sqrt(1 + epsilon).
struct AsymmetrySettings {
  double sigma = 1.0;
  double epsilon = 0.0;

  void validate() const;
};

MeasurementSettings settings_from_asymmetry(const AsymmetrySettings& a);

struct ProbeSpec {
  double nbar = 0.0;
  std::variant<MeasurementSettings, AsymmetrySettings> settings = MeasurementSettings{};

  static ProbeSpec from_temperature(double beta, double omega,
                                    std::variant<MeasurementSettings, AsymmetrySettings> settings);
  MeasurementSettings measurement() const;
  // 2 nbar + 1, i.e. coth(beta omega / 2)
  double thermal_factor() const { return 2.0 * nbar + 1.0; }
};

struct ProbeCheck {
  bool ok = false;
  double product = 0.0;  // sigma_q * sigma_p
  double bound = 0.0;    // 2 nbar + 1
};

/// Covariance after the non-selective q- then p-measurement on a thermal state:
/// diag((2 nbar + 1) / sigma_p^2, (2 nbar + 1) / sigma_q^2).
CovarianceMatrix probe_cov(double nbar, const MeasurementSettings& m);

ProbeCheck validate_probe(const ProbeSpec& spec);

// The state plus its validity flag; sweeps keep unphysical points and mark them.
struct PreparedProbe {
  GaussianState state;
  ProbeCheck check;
};

PreparedProbe prepare_probe(const ProbeSpec& spec);

// Like prepare_probe but throws UnphysicalState on a violated bound.
GaussianState prepare_physical_probe(const ProbeSpec& spec);

}  // namespace gqmet
