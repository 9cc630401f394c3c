#include "gqmet/channels.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "gqmet/errors.hpp"

namespace gqmet {

namespace {

constexpr double kAngleSlack = 1e-12;

bool finite(const Eigen::Matrix2d& m) { return m.allFinite(); }

}  // namespace

double AttenuatorParams::eta() const {
  const double c = std::cos(phi);
  return c * c;
}

void AttenuatorParams::validate() const {
  if (!std::isfinite(phi) || phi < -kAngleSlack || phi > std::numbers::pi / 2 + kAngleSlack) {
    throw DomainError("attenuator: phi must lie in [0, pi/2]");
  }
  if (!std::isfinite(mbar) || mbar < 0.0) throw DomainError("attenuator: mbar must be >= 0");
}

double AmplifierParams::gain() const {
  const double c = std::cosh(rg);
  return c * c;
}

void AmplifierParams::validate() const {
  if (!std::isfinite(rg) || rg < 0.0) throw DomainError("amplifier: rg must be >= 0");
  if (!std::isfinite(mbar) || mbar < 0.0) throw DomainError("amplifier: mbar must be >= 0");
}

CpReport cp_check(const GaussianChannel& ch) {
  if (!finite(ch.M) || !finite(ch.N) || !ch.offset.is_finite()) {
    throw MalformedInput("cp_check: non-finite channel matrices");
  }
  using Matrix2cd = Eigen::Matrix2cd;
  const std::complex<double> i(0.0, 1.0);
  const Eigen::Matrix2d omega = symplectic_form();
  const Eigen::Matrix2d n_sym = 0.5 * (ch.N + ch.N.transpose());
  const Matrix2cd h = n_sym.cast<std::complex<double>>() + i * omega.cast<std::complex<double>>() -
                      i * (ch.M * omega * ch.M.transpose()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Matrix2cd> solver(h, Eigen::EigenvaluesOnly);

  CpReport r;
  r.margin = solver.eigenvalues().minCoeff();
  r.physical = r.margin >= -kCpTol;

  // Single mode: M Omega M^T = det(M) Omega, so the condition reduces to
  // N >= 0 together with det N >= (det M - 1)^2.
  const double k = ch.M.determinant() - 1.0;
  const double tr = n_sym.trace();
  r.scalar_margin = n_sym.determinant() - k * k;
  r.scalar_physical = tr >= -kCpTol && r.scalar_margin >= -kCpTol * std::max(1.0, tr);
  return r;
}

GaussianChannel attenuator(const AttenuatorParams& p) {
  p.validate();
  const double s = std::sin(p.phi);
  GaussianChannel ch;
  ch.M = std::cos(p.phi) * Eigen::Matrix2d::Identity();
  ch.N = s * s * (2.0 * p.mbar + 1.0) * Eigen::Matrix2d::Identity();
  return ch;
}

GaussianChannel amplifier(const AmplifierParams& p) {
  p.validate();
  const double s = std::sinh(p.rg);
  GaussianChannel ch;
  ch.M = std::cosh(p.rg) * Eigen::Matrix2d::Identity();
  ch.N = s * s * (2.0 * p.mbar + 1.0) * Eigen::Matrix2d::Identity();
  return ch;
}

GaussianChannel unitary_channel(const UnitaryKind& kind) {
  GaussianChannel ch;
  std::visit(
      [&ch](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Squeeze>) {
          ch.M = Eigen::Vector2d(std::exp(-k.r), std::exp(k.r)).asDiagonal();
        } else if constexpr (std::is_same_v<T, Rotate>) {
          const double c = std::cos(k.angle);
          const double s = std::sin(k.angle);
          ch.M << c, -s, s, c;
        } else {
          ch.offset = k.d;
        }
      },
      kind);
  if (!finite(ch.M) || !ch.offset.is_finite()) {
    throw MalformedInput("unitary_channel: non-finite parameters");
  }
  return ch;
}

GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& s) {
  if (!cp_check(ch).physical) {
    throw UnphysicalState("apply_channel: channel is not completely positive");
  }
  if (!s.mean.is_finite()) throw MalformedInput("apply_channel: non-finite mean");
  require_physical(s.cov, "apply_channel");

  const Eigen::Vector2d mean = ch.M * s.mean.to_eigen() + ch.offset.to_eigen();
  const Eigen::Matrix2d cov = ch.M * s.cov.to_eigen() * ch.M.transpose() + ch.N;
  return {QuadratureVector::from_eigen(mean), CovarianceMatrix::from_eigen(cov)};
}

}  // namespace gqmet
