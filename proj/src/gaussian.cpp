#include "gqmet/gaussian.hpp"

#include <cmath>
#include <string>

#include "gqmet/errors.hpp"

namespace gqmet {

bool QuadratureVector::is_finite() const { return std::isfinite(q) && std::isfinite(p); }

CovarianceMatrix CovarianceMatrix::from_eigen(const Eigen::Matrix2d& m) {
  return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
}

Eigen::Matrix2d CovarianceMatrix::to_eigen() const {
  Eigen::Matrix2d m;
  m << s11, s12, s12, s22;
  return m;
}

bool CovarianceMatrix::is_finite() const {
  return std::isfinite(s11) && std::isfinite(s12) && std::isfinite(s22);
}

Eigen::Matrix2d symplectic_form() {
  Eigen::Matrix2d omega;
  omega << 0.0, 1.0, -1.0, 0.0;
  return omega;
}

double thermal_occupation(double beta, double omega) {
  if (!std::isfinite(beta) || !std::isfinite(omega) || beta <= 0.0 || omega <= 0.0) {
    throw DomainError("thermal_occupation: beta and omega must be positive and finite");
  }
  return 1.0 / std::expm1(beta * omega);
}

GaussianState make_thermal(double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
    throw DomainError("make_thermal: nbar must be finite and >= 0");
  }
  const double v = 2.0 * nbar + 1.0;
  return {{0.0, 0.0}, CovarianceMatrix::diagonal(v, v)};
}

GaussianState make_vacuum() { return make_thermal(0.0); }

CovValidity validate_cov(const CovarianceMatrix& cov) {
  if (!cov.is_finite()) {
    throw MalformedInput("validate_cov: non-finite covariance entry");
  }
  CovValidity v;
  v.det = cov.det();
  v.margin = v.det - 1.0;
  v.physical = cov.s11 > 0.0 && v.det >= 1.0 - kValidityTol;
  return v;
}

void require_physical(const CovarianceMatrix& cov, const char* what) {
  const auto v = validate_cov(cov);
  if (!v.physical) {
    throw UnphysicalState(std::string(what) + ": covariance violates the uncertainty bound (det = " +
                          std::to_string(v.det) + ")");
  }
}

double symplectic_eigenvalue(const CovarianceMatrix& cov) {
  require_physical(cov, "symplectic_eigenvalue");
  return std::sqrt(std::max(cov.det(), 1.0));
}

double purity(const GaussianState& state) {
  return 1.0 / symplectic_eigenvalue(state.cov);
}

double entropy_from_symplectic(double nu) {
  if (nu - 1.0 < 1e-12) return 0.0;
  const double up = 0.5 * (nu + 1.0);
  const double down = 0.5 * (nu - 1.0);
  return up * std::log(up) - down * std::log(down);
}

double thermal_entropy(double nbar) {
  if (nbar < 0.0) throw DomainError("thermal_entropy: negative occupation");
  if (nbar == 0.0) return 0.0;
  return (nbar + 1.0) * std::log1p(nbar) - nbar * std::log(nbar);
}

double von_neumann_entropy(const GaussianState& state) {
  return entropy_from_symplectic(symplectic_eigenvalue(state.cov));
}

namespace {

void require_pair(const GaussianState& a, const GaussianState& b, const char* what) {
  if (!a.mean.is_finite() || !b.mean.is_finite()) {
    throw MalformedInput(std::string(what) + ": non-finite mean");
  }
  require_physical(a.cov, what);
  require_physical(b.cov, what);
}

Eigen::Matrix2d summed_inverse(const CovarianceMatrix& a, const CovarianceMatrix& b, double& det_sum,
                               const char* what) {
  const Eigen::Matrix2d sum = a.to_eigen() + b.to_eigen();
  det_sum = sum.determinant();
  if (!(det_sum > 0.0) || !std::isfinite(det_sum)) {
    throw NumericalFailure(std::string(what) + ": singular Sigma_a + Sigma_b");
  }
  return sum.inverse();
}

}  // namespace

double fidelity(const GaussianState& a, const GaussianState& b) {
  require_pair(a, b, "fidelity");
  double big_delta = 0.0;
  const Eigen::Matrix2d inv = summed_inverse(a.cov, b.cov, big_delta, "fidelity");
  const double small_delta =
      std::max(0.0, (a.cov.det() - 1.0) * (b.cov.det() - 1.0));
  const Eigen::Vector2d dd = a.mean.to_eigen() - b.mean.to_eigen();
  const double quad = dd.dot(inv * dd);
  const double f =
      2.0 / (std::sqrt(big_delta + small_delta) - std::sqrt(small_delta)) * std::exp(-0.5 * quad);
  if (!std::isfinite(f)) throw NumericalFailure("fidelity: non-finite result");
  return f;
}

double root_infidelity(const GaussianState& a, const GaussianState& b) {
  require_pair(a, b, "root_infidelity");
  double big_delta = 0.0;
  const Eigen::Matrix2d inv = summed_inverse(a.cov, b.cov, big_delta, "root_infidelity");

  // With X^2 = sqrt(Delta + delta) - sqrt(delta), sqrt(F0) = sqrt(2) / X and
  //   X^2 - 2 = (Delta - 4 - 4 sqrt(delta)) / (sqrt(Delta + delta) + sqrt(delta) + 2),
  //   Delta - 4 - 4 sqrt(delta) = 2 (x - y)^2 - det(Sigma_a - Sigma_b),
  // where x = sqrt(det Sigma_a - 1), y = sqrt(det Sigma_b - 1). Every term is
  // built from Sigma_a - Sigma_b, so nothing cancels as the states merge.
  const CovarianceMatrix& sa = a.cov;
  const CovarianceMatrix& sb = b.cov;
  const double d11 = sa.s11 - sb.s11;
  const double d12 = sa.s12 - sb.s12;
  const double d22 = sa.s22 - sb.s22;
  const double det_diff = d11 * d22 - d12 * d12;
  const double det_a_minus_det_b = d11 * sa.s22 + sb.s11 * d22 - d12 * (sa.s12 + sb.s12);

  const double x = std::sqrt(std::max(0.0, sa.det() - 1.0));
  const double y = std::sqrt(std::max(0.0, sb.det() - 1.0));
  const double x_minus_y = (x + y > 0.0) ? det_a_minus_det_b / (x + y) : 0.0;
  const double root_delta = x * y;

  const double numer = 2.0 * x_minus_y * x_minus_y - det_diff;
  const double denom = std::sqrt(big_delta + root_delta * root_delta) + root_delta + 2.0;
  const double x2_minus_2 = numer / denom;
  const double big_x = std::sqrt(2.0 + x2_minus_2);
  const double one_minus_root_f0 = x2_minus_2 / (big_x * (big_x + std::sqrt(2.0)));
  const double root_f0 = 1.0 - one_minus_root_f0;

  const Eigen::Vector2d dd = a.mean.to_eigen() - b.mean.to_eigen();
  const double quad = dd.dot(inv * dd);
  const double out = one_minus_root_f0 - root_f0 * std::expm1(-0.25 * quad);
  if (!std::isfinite(out)) throw NumericalFailure("root_infidelity: non-finite result");
  return out;
}

double bures_distance(const GaussianState& a, const GaussianState& b) {
  return std::sqrt(2.0) * std::sqrt(std::max(0.0, root_infidelity(a, b)));
}

}  // namespace gqmet
