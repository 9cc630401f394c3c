#pragma once

// Brute-force validators that share no code path with the closed forms:
// a sampled density-matrix kernel rho(x, x') for the sequential Gaussian
// measurements, and a truncated Fock-space construction for coherence.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "gqmet/gaussian.hpp"
#include "gqmet/probe.hpp"

namespace gqmet::oracle {

enum class Representation { position, momentum };

struct GridParams {
  double half_width = 0.0;  // L; the grid spans [-L, L)
  std::size_t points = 2048;
};

/// Samples of rho on an N x N grid, row-major, rows indexed by the first argument.
/// In the position representation x_j = -L + j dx; in the momentum
/// representation p_k = (k - N/2) dp with dp = pi / L.
struct KernelGrid {
  double half_width = 0.0;
  std::size_t points = 0;
  Representation rep = Representation::position;
  std::vector<std::complex<double>> samples;

  double spacing() const;
  double coordinate(std::size_t i) const;
  std::complex<double>& at(std::size_t i, std::size_t j) { return samples[i * points + j]; }
  const std::complex<double>& at(std::size_t i, std::size_t j) const {
    return samples[i * points + j];
  }
  // Diagonal quadrature sum times the spacing.
  double trace() const;
  // Max |rho(a, b) - conj(rho(b, a))|.
  double hermiticity_defect() const;
};

// Grid with L = 8 standard deviations of the widest quadrature.
GridParams default_grid(const CovarianceMatrix& cov, std::size_t points = 2048);

KernelGrid kernel_from_state(const GaussianState& state, const GridParams& grid);

// Non-selective q-measurement with physical width sigma: rho(x, x') *= exp[-(x - x')^2 / (8 sigma^2)].
KernelGrid apply_q_measurement(KernelGrid kernel, double sigma_q_physical);
// Same in the momentum representation.
KernelGrid apply_p_measurement(KernelGrid kernel, double sigma_p_physical);

KernelGrid to_momentum_rep(KernelGrid kernel);
KernelGrid to_position_rep(KernelGrid kernel);

struct KernelMoments {
  double q2 = 0.0;
  double p2 = 0.0;
  CovarianceMatrix cov;  // diag(2 <q^2>, 2 <p^2>)
};

KernelMoments kernel_moments(const KernelGrid& kernel);

struct ProbeCovReport {
  double nbar = 0.0;
  MeasurementSettings settings;
  double sigma_q_physical = 0.0;
  double sigma_p_physical = 0.0;
  GridParams grid;
  CovarianceMatrix oracle_cov;
  CovarianceMatrix production_cov;
  CovarianceMatrix difference;  // oracle - production
  double trace_initial = 0.0;
  double trace_after_q = 0.0;
  double trace_final = 0.0;
  double q2_before = 0.0;
  double q2_after_q = 0.0;
  double p2_after_q = 0.0;
  double p2_final = 0.0;
  std::vector<std::string> notes;
};

/// Runs thermal kernel -> q-measurement -> momentum transform -> p-measurement
/// -> moments and sets the result beside the production probe covariance.
/// The comparison is a report: the two are expected to differ.
ProbeCovReport oracle_probe_cov(double nbar, const MeasurementSettings& settings,
                                std::size_t points = 2048);

struct FockCoherence {
  double coherence_thermal_ref = 0.0;
  double coherence_dephased = 0.0;
  double tail_population = 0.0;
  double mean_photons = 0.0;
  double state_entropy = 0.0;
  CovarianceMatrix cov;  // recomputed from the Fock matrix
};

inline constexpr double kFockTailBound = 1e-10;

/// Zero-mean diagonal state built as S(r) rho_th((nu - 1)/2) S(r)^dagger with
/// r = ln(Sigma22 / Sigma11) / 4 in a Fock space truncated at `cutoff`.
FockCoherence fock_coherence(const GaussianState& state, int cutoff);

}  // namespace gqmet::oracle
