#include "gqmet/probe.hpp"

#include <cmath>
#include <string>

#include "gqmet/errors.hpp"

namespace gqmet {

void MeasurementSettings::validate() const {
  if (!std::isfinite(sigma_q) || !std::isfinite(sigma_p) || sigma_q <= 0.0 || sigma_p <= 0.0) {
    throw DomainError("measurement uncertainties must be positive and finite");
  }
}

void AsymmetrySettings::validate() const {
  if (!std::isfinite(sigma) || sigma <= 0.0) throw DomainError("sigma must be positive and finite");
  if (!std::isfinite(epsilon) || std::abs(epsilon) >= 1.0) {
    throw DomainError("epsilon must lie in (-1, 1)");
  }
}

MeasurementSettings settings_from_asymmetry(const AsymmetrySettings& a) {
  a.validate();
  return {a.sigma / std::sqrt(1.0 - a.epsilon), a.sigma / std::sqrt(1.0 + a.epsilon)};
}

ProbeSpec ProbeSpec::from_temperature(double beta, double omega,
                                      std::variant<MeasurementSettings, AsymmetrySettings> settings) {
  return {thermal_occupation(beta, omega), settings};
}

MeasurementSettings ProbeSpec::measurement() const {
  if (const auto* a = std::get_if<AsymmetrySettings>(&settings)) return settings_from_asymmetry(*a);
  const auto& m = std::get<MeasurementSettings>(settings);
  m.validate();
  return m;
}

CovarianceMatrix probe_cov(double nbar, const MeasurementSettings& m) {
  m.validate();
  if (!std::isfinite(nbar) || nbar < 0.0) throw DomainError("probe_cov: nbar must be >= 0");
  const double c = 2.0 * nbar + 1.0;
  return CovarianceMatrix::diagonal(c / (m.sigma_p * m.sigma_p), c / (m.sigma_q * m.sigma_q));
}

ProbeCheck validate_probe(const ProbeSpec& spec) {
  ProbeCheck check;
  check.bound = spec.thermal_factor();
  try {
    const auto m = spec.measurement();
    check.product = m.sigma_q * m.sigma_p;
    check.ok = std::isfinite(spec.nbar) && spec.nbar >= 0.0 &&
               check.product <= check.bound * (1.0 + kValidityTol);
  } catch (const DomainError&) {
    check.ok = false;
  }
  return check;
}

PreparedProbe prepare_probe(const ProbeSpec& spec) {
  const auto m = spec.measurement();
  PreparedProbe out;
  out.state.cov = probe_cov(spec.nbar, m);
  out.check = validate_probe(spec);
  return out;
}

GaussianState prepare_physical_probe(const ProbeSpec& spec) {
  auto prepared = prepare_probe(spec);
  if (!prepared.check.ok) {
    throw UnphysicalState("probe violates the uncertainty bound: sigma_q * sigma_p = " +
                          std::to_string(prepared.check.product) + " > 2 nbar + 1 = " +
                          std::to_string(prepared.check.bound));
  }
  return prepared.state;
}

}  // namespace gqmet
