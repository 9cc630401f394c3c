#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "gqmet/channels.hpp"
#include "gqmet/gaussian.hpp"
#include "gqmet/probe.hpp"

namespace gqmet {

inline constexpr double kDefaultStep = 1e-4;
inline constexpr double kDefaultTau = 1e-5;

struct FamilyDerivative {
  Eigen::Matrix2d dcov = Eigen::Matrix2d::Zero();
  Eigen::Vector2d dmean = Eigen::Vector2d::Zero();
};

/// A one-parameter family theta -> Gaussian state.
///
/// `derivative` is optional; when empty the estimators fall back to finite
/// differences. `lower`/`upper` bound the domain on which `evaluate` returns
/// physical states, and are used to switch to one-sided stencils at the edges.
/// Both callables must be re-entrant.
struct StateFamily {
  std::string parameter;
  std::function<GaussianState(double)> evaluate;
  std::function<FamilyDerivative(double)> derivative;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct QfiBreakdown {
  double term_cov = 0.0;
  double term_purity = 0.0;
  double term_mean = 0.0;
  double total = 0.0;
};

// Finite-difference derivative of the family at theta (central where the
// domain allows, second-order one-sided otherwise). `step` is relative to
// max(1, |theta|).
FamilyDerivative numeric_derivative(const StateFamily& f, double theta, double step = kDefaultStep);

QfiBreakdown qfi_from_derivative(const GaussianState& state, const FamilyDerivative& d);

/// Generic single-mode QFI; analytic derivatives are used when the family has them.
QfiBreakdown qfi_generic(const StateFamily& f, double theta, double step = kDefaultStep);

/// Bures estimator 8 (1 - sqrt F(rho_theta, rho_theta+tau)) / tau^2 with one
/// Richardson step over (tau, tau/2).
double qfi_bures(const StateFamily& f, double theta, double tau = kDefaultTau);

struct AttenuatorEigenvalues {
  double nu1 = 1.0;  // q-quadrature variance, set by sigma_p
  double nu2 = 1.0;  // p-quadrature variance, set by sigma_q
  double product() const { return nu1 * nu2; }
};

struct AmplifierEigenvalues {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double product() const { return mu1 * mu2; }
};

AttenuatorEigenvalues att_eigenvalues(const AttenuatorParams& ch, double nbar,
                                      const MeasurementSettings& m);
AmplifierEigenvalues amp_eigenvalues(const AmplifierParams& ch, double nbar,
                                     const MeasurementSettings& m);

enum class AttMbarVariant { corrected, as_printed };

// Closed forms. A divergence (nu1 nu2 -> 1 with a nonvanishing numerator) is
// returned as +infinity.
double qfi_att_phi(const AttenuatorParams& ch, double nbar, const MeasurementSettings& m);
double qfi_att_mbar(const AttenuatorParams& ch, double nbar, const MeasurementSettings& m,
                    AttMbarVariant variant = AttMbarVariant::corrected);
double qfi_amp_rg(const AmplifierParams& ch, double nbar, const MeasurementSettings& m);
double qfi_amp_mbar(const AmplifierParams& ch, double nbar, const MeasurementSettings& m);

// Probe -> channel families with analytic derivatives. The probe must be physical.
StateFamily attenuator_phi_family(const ProbeSpec& probe, double mbar);
StateFamily attenuator_mbar_family(const ProbeSpec& probe, double phi);
StateFamily amplifier_rg_family(const ProbeSpec& probe, double mbar);
StateFamily amplifier_mbar_family(const ProbeSpec& probe, double rg);

// Same families with the analytic derivative stripped.
StateFamily without_derivative(StateFamily f);

}  // namespace gqmet
