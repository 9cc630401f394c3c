#pragma once

// Single-mode Gaussian states in the dimensionless convention hbar = m = omega = 1,
// with the covariance normalised so that the vacuum has Sigma = identity and a
// thermal state with mean occupation nbar has Sigma = (2 nbar + 1) identity.

#include <Eigen/Dense>

namespace gqmet {

inline constexpr double kValidityTol = 1e-12;

struct QuadratureVector {
  double q = 0.0;
  double p = 0.0;

  Eigen::Vector2d to_eigen() const { return {q, p}; }
  static QuadratureVector from_eigen(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
  bool is_finite() const;
  friend bool operator==(const QuadratureVector&, const QuadratureVector&) = default;
};

// Symmetric 2x2 matrix; only the upper triangle is stored so symmetry holds by construction.
struct CovarianceMatrix {
  double s11 = 1.0;
  double s12 = 0.0;
  double s22 = 1.0;

  static CovarianceMatrix identity() { return {1.0, 0.0, 1.0}; }
  static CovarianceMatrix diagonal(double a, double b) { return {a, 0.0, b}; }
  static CovarianceMatrix from_eigen(const Eigen::Matrix2d& m);

  Eigen::Matrix2d to_eigen() const;
  double det() const { return s11 * s22 - s12 * s12; }
  double trace() const { return s11 + s22; }
  bool is_finite() const;
  bool is_diagonal() const { return s12 == 0.0; }
  // q <-> p relabelling.
  CovarianceMatrix swapped() const { return {s22, s12, s11}; }

  friend bool operator==(const CovarianceMatrix&, const CovarianceMatrix&) = default;
};

struct GaussianState {
  QuadratureVector mean;
  CovarianceMatrix cov;
};

// Omega with Omega_12 = 1, Omega_21 = -1.
Eigen::Matrix2d symplectic_form();

struct CovValidity {
  bool physical = false;
  double det = 0.0;
  double margin = 0.0;  // det - 1
};

double thermal_occupation(double beta, double omega);
GaussianState make_thermal(double nbar);
GaussianState make_vacuum();

CovValidity validate_cov(const CovarianceMatrix& cov);
void require_physical(const CovarianceMatrix& cov, const char* what);

double symplectic_eigenvalue(const CovarianceMatrix& cov);
double purity(const GaussianState& state);

// Entropy (nats) of a state with symplectic eigenvalue nu.
double entropy_from_symplectic(double nu);
// (N+1) ln(N+1) - N ln N.
double thermal_entropy(double nbar);
double von_neumann_entropy(const GaussianState& state);

double fidelity(const GaussianState& a, const GaussianState& b);

/// 1 - sqrt(F(a, b)), evaluated without the catastrophic cancellation of the
/// direct formula when a and b are close. Both states must be physical.
double root_infidelity(const GaussianState& a, const GaussianState& b);

double bures_distance(const GaussianState& a, const GaussianState& b);

}  // namespace gqmet
