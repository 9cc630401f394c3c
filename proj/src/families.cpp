#include <cmath>
#include <limits>
#include <numbers>

#include "gqmet/metrology.hpp"

namespace gqmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FamilyDerivative cov_only(const Eigen::Matrix2d& dcov) {
  FamilyDerivative d;
  d.dcov = dcov;
  return d;
}

}  // namespace

StateFamily attenuator_phi_family(const ProbeSpec& probe, double mbar) {
  const GaussianState start = prepare_physical_probe(probe);
  AttenuatorParams{0.0, mbar}.validate();
  StateFamily f;
  f.parameter = "phi";
  f.lower = 0.0;
  f.upper = std::numbers::pi / 2;
  f.evaluate = [start, mbar](double phi) { return apply_channel(attenuator({phi, mbar}), start); };
  // d/dphi [cos^2 Sigma_p + sin^2 (2 mbar + 1) I] = sin(2 phi) [(2 mbar + 1) I - Sigma_p]
  f.derivative = [start, mbar](double phi) {
    const Eigen::Matrix2d env = (2.0 * mbar + 1.0) * Eigen::Matrix2d::Identity();
    return cov_only(std::sin(2.0 * phi) * (env - start.cov.to_eigen()));
  };
  return f;
}

StateFamily attenuator_mbar_family(const ProbeSpec& probe, double phi) {
  const GaussianState start = prepare_physical_probe(probe);
  AttenuatorParams{phi, 0.0}.validate();
  StateFamily f;
  f.parameter = "mbar";
  f.lower = 0.0;
  f.upper = kInf;
  f.evaluate = [start, phi](double mbar) { return apply_channel(attenuator({phi, mbar}), start); };
  f.derivative = [phi](double) {
    const double s = std::sin(phi);
    return cov_only(2.0 * s * s * Eigen::Matrix2d::Identity());
  };
  return f;
}

StateFamily amplifier_rg_family(const ProbeSpec& probe, double mbar) {
  const GaussianState start = prepare_physical_probe(probe);
  AmplifierParams{0.0, mbar}.validate();
  StateFamily f;
  f.parameter = "rg";
  f.lower = 0.0;
  f.upper = kInf;
  f.evaluate = [start, mbar](double rg) { return apply_channel(amplifier({rg, mbar}), start); };
  f.derivative = [start, mbar](double rg) {
    const Eigen::Matrix2d env = (2.0 * mbar + 1.0) * Eigen::Matrix2d::Identity();
    return cov_only(std::sinh(2.0 * rg) * (start.cov.to_eigen() + env));
  };
  return f;
}

StateFamily amplifier_mbar_family(const ProbeSpec& probe, double rg) {
  const GaussianState start = prepare_physical_probe(probe);
  AmplifierParams{rg, 0.0}.validate();
  StateFamily f;
  f.parameter = "mbar";
  f.lower = 0.0;
  f.upper = kInf;
  f.evaluate = [start, rg](double mbar) { return apply_channel(amplifier({rg, mbar}), start); };
  f.derivative = [rg](double) {
    const double s = std::sinh(rg);
    return cov_only(2.0 * s * s * Eigen::Matrix2d::Identity());
  };
  return f;
}

StateFamily without_derivative(StateFamily f) {
  f.derivative = nullptr;
  return f;
}

}  // namespace gqmet
