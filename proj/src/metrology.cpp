#include "gqmet/metrology.hpp"

#include <cmath>
#include <limits>

#include "gqmet/errors.hpp"

namespace gqmet {

namespace {

constexpr double kPureTol = 1e-9;

using Packed = Eigen::Matrix<double, 5, 1>;

Packed pack(const GaussianState& s) {
  Packed v;
  v << s.cov.s11, s.cov.s12, s.cov.s22, s.mean.q, s.mean.p;
  return v;
}

FamilyDerivative unpack(const Packed& v) {
  FamilyDerivative d;
  d.dcov << v(0), v(1), v(1), v(2);
  d.dmean << v(3), v(4);
  return d;
}

}  // namespace

FamilyDerivative numeric_derivative(const StateFamily& f, double theta, double step) {
  if (!(step > 0.0)) throw DomainError("numeric_derivative: step must be positive");
  const double h = step * std::max(1.0, std::abs(theta));
  auto at = [&](double t) { return pack(f.evaluate(t)); };

  Packed d;
  if (theta - h >= f.lower && theta + h <= f.upper) {
    d = (at(theta + h) - at(theta - h)) / (2.0 * h);
  } else if (theta + 2.0 * h <= f.upper) {
    d = (-3.0 * at(theta) + 4.0 * at(theta + h) - at(theta + 2.0 * h)) / (2.0 * h);
  } else if (theta - 2.0 * h >= f.lower) {
    d = (3.0 * at(theta) - 4.0 * at(theta - h) + at(theta - 2.0 * h)) / (2.0 * h);
  } else {
    throw DomainError("numeric_derivative: family domain narrower than the stencil");
  }
  if (!d.allFinite()) throw NumericalFailure("numeric_derivative: non-finite derivative");
  return unpack(d);
}

QfiBreakdown qfi_from_derivative(const GaussianState& state, const FamilyDerivative& d) {
  if (!d.dcov.allFinite() || !d.dmean.allFinite()) {
    throw NumericalFailure("qfi: non-finite derivative");
  }
  require_physical(state.cov, "qfi");
  const Eigen::Matrix2d sigma_inv = state.cov.to_eigen().inverse();
  const Eigen::Matrix2d a = sigma_inv * d.dcov;

  const double p = 1.0 / std::sqrt(state.cov.det());
  // d(det)/det = tr(Sigma^-1 Sigma'), so P' = -P tr(Sigma^-1 Sigma') / 2.
  const double dp = -0.5 * p * a.trace();

  QfiBreakdown out;
  out.term_cov = 0.5 * (a * a).trace() / (1.0 + p * p);
  if (std::abs(p - 1.0) < kPureTol) {
    if (std::abs(dp) >= kPureTol) {
      throw PureStateSingularity("qfi: pure state with nonzero purity derivative");
    }
    out.term_purity = 0.0;
  } else {
    const double p2 = p * p;
    out.term_purity = 2.0 * dp * dp / (1.0 - p2 * p2);
  }
  out.term_mean = d.dmean.dot(sigma_inv * d.dmean);
  out.total = out.term_cov + out.term_purity + out.term_mean;
  if (!std::isfinite(out.total)) throw NumericalFailure("qfi: non-finite result");
  return out;
}

QfiBreakdown qfi_generic(const StateFamily& f, double theta, double step) {
  const GaussianState state = f.evaluate(theta);
  const FamilyDerivative d = f.derivative ? f.derivative(theta) : numeric_derivative(f, theta, step);
  return qfi_from_derivative(state, d);
}

double qfi_bures(const StateFamily& f, double theta, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("qfi_bures: tau must be positive");
  const double dir = (theta + tau <= f.upper) ? 1.0 : -1.0;
  if (dir < 0.0 && theta - tau < f.lower) {
    throw DomainError("qfi_bures: tau larger than the family domain");
  }
  const GaussianState base = f.evaluate(theta);
  auto estimate = [&](double t) {
    return 8.0 * root_infidelity(base, f.evaluate(theta + dir * t)) / (t * t);
  };
  return 2.0 * estimate(0.5 * tau) - estimate(tau);
}

AttenuatorEigenvalues att_eigenvalues(const AttenuatorParams& ch, double nbar,
                                      const MeasurementSettings& m) {
  ch.validate();
  m.validate();
  const double c2 = std::cos(ch.phi) * std::cos(ch.phi);
  const double s2 = std::sin(ch.phi) * std::sin(ch.phi);
  const double thermal = 2.0 * nbar + 1.0;
  const double env = (2.0 * ch.mbar + 1.0) * s2;
  return {thermal * c2 / (m.sigma_p * m.sigma_p) + env, thermal * c2 / (m.sigma_q * m.sigma_q) + env};
}

AmplifierEigenvalues amp_eigenvalues(const AmplifierParams& ch, double nbar,
                                     const MeasurementSettings& m) {
  ch.validate();
  m.validate();
  const double c2 = std::cosh(ch.rg) * std::cosh(ch.rg);
  const double s2 = std::sinh(ch.rg) * std::sinh(ch.rg);
  const double thermal = 2.0 * nbar + 1.0;
  const double env = (2.0 * ch.mbar + 1.0) * s2;
  return {thermal * c2 / (m.sigma_p * m.sigma_p) + env, thermal * c2 / (m.sigma_q * m.sigma_q) + env};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// prefactor * [ a / (D (D + 1)) + b / (D (D^2 - 1)) ]
double bracket(double prefactor, double a, double b, double d, bool drop_d_in_second = false) {
  if (prefactor == 0.0) return 0.0;
  const double second_denom = (drop_d_in_second ? 1.0 : d) * (d * d - 1.0);
  if (second_denom <= 0.0) return b == 0.0 ? prefactor * a / (d * (d + 1.0)) : kInf;
  return prefactor * (a / (d * (d + 1.0)) + b / second_denom);
}

}  // namespace

double qfi_att_phi(const AttenuatorParams& ch, double nbar, const MeasurementSettings& m) {
  const auto ev = att_eigenvalues(ch, nbar, m);
  const double env = 2.0 * ch.mbar + 1.0;
  const double thermal = 2.0 * nbar + 1.0;
  const double hp = env - thermal / (m.sigma_p * m.sigma_p);
  const double hq = env - thermal / (m.sigma_q * m.sigma_q);
  const double s = std::sin(2.0 * ch.phi);
  const double first = ev.nu2 * ev.nu2 * hp * hp + ev.nu1 * ev.nu1 * hq * hq;
  const double mixed = hq * ev.nu1 + hp * ev.nu2;
  return bracket(0.5 * s * s, first, mixed * mixed, ev.product());
}

double qfi_att_mbar(const AttenuatorParams& ch, double nbar, const MeasurementSettings& m,
                    AttMbarVariant variant) {
  const auto ev = att_eigenvalues(ch, nbar, m);
  const double s2 = std::sin(ch.phi) * std::sin(ch.phi);
  const double first = ev.nu1 * ev.nu1 + ev.nu2 * ev.nu2;
  const double sum = ev.nu1 + ev.nu2;
  // The printed expression lacks the nu1 nu2 factor in the second denominator.
  return bracket(2.0 * s2 * s2, first, sum * sum, ev.product(),
                 variant == AttMbarVariant::as_printed);
}

double qfi_amp_rg(const AmplifierParams& ch, double nbar, const MeasurementSettings& m) {
  const auto ev = amp_eigenvalues(ch, nbar, m);
  const double env = 2.0 * ch.mbar + 1.0;
  const double thermal = 2.0 * nbar + 1.0;
  const double fp = env + thermal / (m.sigma_p * m.sigma_p);
  const double fq = env + thermal / (m.sigma_q * m.sigma_q);
  const double s = std::sinh(2.0 * ch.rg);
  const double first = ev.mu2 * ev.mu2 * fp * fp + ev.mu1 * ev.mu1 * fq * fq;
  const double mixed = fq * ev.mu1 + fp * ev.mu2;
  return bracket(0.5 * s * s, first, mixed * mixed, ev.product());
}

double qfi_amp_mbar(const AmplifierParams& ch, double nbar, const MeasurementSettings& m) {
  const auto ev = amp_eigenvalues(ch, nbar, m);
  const double s2 = std::sinh(ch.rg) * std::sinh(ch.rg);
  const double sum = ev.mu1 + ev.mu2;
  return bracket(2.0 * s2 * s2, ev.mu1 * ev.mu1 + ev.mu2 * ev.mu2, sum * sum, ev.product());
}

}  // namespace gqmet
