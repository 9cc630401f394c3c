#include "gqmet/oracle.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gqmet/errors.hpp"

namespace gqmet::oracle {

namespace {

constexpr double kTailBound = 1e-10;
constexpr double kAliasBound = 1e-9;
constexpr double kPi = std::numbers::pi;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_grid(const GridParams& g) {
  if (!(g.half_width > 0.0) || !std::isfinite(g.half_width)) {
    throw GridError("kernel grid: half width must be positive");
  }
  if (g.points < 1024 || !std::has_single_bit(g.points)) {
    throw GridError("kernel grid: points must be a power of two >= 1024");
  }
}

// Mass of the diagonal in the outer sixteenth of the grid on each side.
double edge_mass(const KernelGrid& k) {
  const std::size_t band = k.points / 16;
  double mass = 0.0;
  for (std::size_t i = 0; i < band; ++i) {
    mass += std::abs(k.at(i, i).real());
    const std::size_t j = k.points - 1 - i;
    mass += std::abs(k.at(j, j).real());
  }
  return mass * k.spacing();
}

enum class Direction { forward, backward };

void transform_axis(std::vector<std::complex<double>>& data, std::size_t n, bool over_first_index,
                    Direction dir) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  const int len = static_cast<int>(n);
  const int stride = over_first_index ? static_cast<int>(n) : 1;
  const int dist = over_first_index ? 1 : static_cast<int>(n);
  const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_many_dft(1, &len, len, buf, nullptr, stride, dist, buf, nullptr, stride, dist,
                              sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

// rho' = U rho U^dagger (or U^dagger rho U) with U the centred unitary DFT.
void change_basis(KernelGrid& k, bool to_momentum) {
  const std::size_t n = k.points;
  auto flip = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = (i & 1) ? 0 : 1; j < n; j += 2) k.at(i, j) = -k.at(i, j);
    }
  };
  flip();
  // The first index carries the ket: forward DFT on it for x -> p, backward on the bra.
  transform_axis(k.samples, n, true, to_momentum ? Direction::forward : Direction::backward);
  transform_axis(k.samples, n, false, to_momentum ? Direction::backward : Direction::forward);
  flip();
  const double dx = k.spacing();
  const double scale = dx * dx / (2.0 * kPi);
  for (auto& v : k.samples) v *= scale;
  k.rep = to_momentum ? Representation::momentum : Representation::position;
}

double diagonal_second_moment(const KernelGrid& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k.points; ++i) {
    const double c = k.coordinate(i);
    acc += c * c * k.at(i, i).real();
  }
  return acc * k.spacing();
}

}  // namespace

double KernelGrid::spacing() const {
  const double dx = 2.0 * half_width / static_cast<double>(points);
  return rep == Representation::position ? dx : kPi / half_width;
}

double KernelGrid::coordinate(std::size_t i) const {
  if (rep == Representation::position) return -half_width + static_cast<double>(i) * spacing();
  return (static_cast<double>(i) - static_cast<double>(points / 2)) * spacing();
}

double KernelGrid::trace() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < points; ++i) acc += at(i, i).real();
  return acc * spacing();
}

double KernelGrid::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = i; j < points; ++j) {
      worst = std::max(worst, std::abs(at(i, j) - std::conj(at(j, i))));
    }
  }
  return worst;
}

GridParams default_grid(const CovarianceMatrix& cov, std::size_t points) {
  return {8.0 * std::sqrt(std::max(cov.s11, cov.s22) / 2.0), points};
}

KernelGrid kernel_from_state(const GaussianState& state, const GridParams& grid) {
  check_grid(grid);
  if (!state.cov.is_diagonal() || state.mean.q != 0.0 || state.mean.p != 0.0) {
    throw DomainError("kernel_from_state: needs a zero-mean state with diagonal covariance");
  }
  require_physical(state.cov, "kernel_from_state");

  const double var_x = state.cov.s11 / 2.0;
  const double var_p = state.cov.s22 / 2.0;
  const double p_max = kPi * static_cast<double>(grid.points) / (2.0 * grid.half_width);
  const double tail_x = std::erfc(grid.half_width / std::sqrt(2.0 * var_x));
  const double tail_p = std::erfc(p_max / std::sqrt(2.0 * var_p));
  if (tail_x > kTailBound || tail_p > kTailBound) {
    std::ostringstream msg;
    msg << "kernel_from_state: grid too small (tail mass q " << tail_x << ", p " << tail_p << ")";
    throw GridError(msg.str());
  }

  KernelGrid k;
  k.half_width = grid.half_width;
  k.points = grid.points;
  k.rep = Representation::position;
  k.samples.resize(grid.points * grid.points);
  const double norm = 1.0 / std::sqrt(2.0 * kPi * var_x);
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = k.coordinate(i);
    for (std::size_t j = 0; j < grid.points; ++j) {
      const double xp = k.coordinate(j);
      const double u = 0.5 * (x + xp);
      const double v = x - xp;
      k.at(i, j) = norm * std::exp(-u * u / (2.0 * var_x) - var_p * v * v / 2.0);
    }
  }
  return k;
}

namespace {

KernelGrid dephase(KernelGrid kernel, double width, Representation rep, const char* what) {
  if (kernel.rep != rep) throw DomainError(std::string(what) + ": kernel in the wrong representation");
  if (!(width > 0.0)) throw DomainError(std::string(what) + ": width must be positive");
  const double inv = 1.0 / (8.0 * width * width);
  // The factor only depends on the index difference.
  std::vector<double> factor(kernel.points);
  for (std::size_t d = 0; d < kernel.points; ++d) {
    const double s = static_cast<double>(d) * kernel.spacing();
    factor[d] = std::exp(-s * s * inv);
  }
  for (std::size_t i = 0; i < kernel.points; ++i) {
    for (std::size_t j = 0; j < kernel.points; ++j) {
      kernel.at(i, j) *= factor[i > j ? i - j : j - i];
    }
  }
  return kernel;
}

}  // namespace

KernelGrid apply_q_measurement(KernelGrid kernel, double sigma_q_physical) {
  return dephase(std::move(kernel), sigma_q_physical, Representation::position, "apply_q_measurement");
}

KernelGrid apply_p_measurement(KernelGrid kernel, double sigma_p_physical) {
  return dephase(std::move(kernel), sigma_p_physical, Representation::momentum, "apply_p_measurement");
}

KernelGrid to_momentum_rep(KernelGrid kernel) {
  if (kernel.rep != Representation::position) throw DomainError("to_momentum_rep: not in position rep");
  change_basis(kernel, true);
  if (edge_mass(kernel) > kAliasBound) throw GridError("to_momentum_rep: momentum grid aliased");
  return kernel;
}

KernelGrid to_position_rep(KernelGrid kernel) {
  if (kernel.rep != Representation::momentum) throw DomainError("to_position_rep: not in momentum rep");
  change_basis(kernel, false);
  if (edge_mass(kernel) > kAliasBound) throw GridError("to_position_rep: position grid aliased");
  return kernel;
}

KernelMoments kernel_moments(const KernelGrid& kernel) {
  KernelMoments m;
  if (kernel.rep == Representation::position) {
    m.q2 = diagonal_second_moment(kernel);
    m.p2 = diagonal_second_moment(to_momentum_rep(kernel));
  } else {
    m.p2 = diagonal_second_moment(kernel);
    m.q2 = diagonal_second_moment(to_position_rep(kernel));
  }
  m.cov = CovarianceMatrix::diagonal(2.0 * m.q2, 2.0 * m.p2);
  return m;
}

ProbeCovReport oracle_probe_cov(double nbar, const MeasurementSettings& settings, std::size_t points) {
  settings.validate();
  ProbeCovReport r;
  r.nbar = nbar;
  r.settings = settings;
  const double c = 2.0 * nbar + 1.0;
  r.sigma_q_physical = settings.sigma_q / std::sqrt(c);
  r.sigma_p_physical = settings.sigma_p / std::sqrt(c);
  r.production_cov = probe_cov(nbar, settings);

  // Size the grid for the widest stage: the p-measurement only widens q by
  // 1 / (4 sigma_p^2) in variance, the q-measurement only widens p.
  const double widest_q = c + 1.0 / (2.0 * r.sigma_p_physical * r.sigma_p_physical);
  const double widest_p = c + 1.0 / (2.0 * r.sigma_q_physical * r.sigma_q_physical);
  r.grid = default_grid(CovarianceMatrix::diagonal(widest_q, c), points);
  const double p_needed = 8.0 * std::sqrt(widest_p / 2.0);
  const double p_available = kPi * static_cast<double>(points) / (2.0 * r.grid.half_width);
  if (p_available < p_needed) {
    throw GridError("oracle_probe_cov: momentum range too small for these settings");
  }

  KernelGrid k = kernel_from_state(make_thermal(nbar), r.grid);
  r.trace_initial = k.trace();
  r.q2_before = diagonal_second_moment(k);

  k = apply_q_measurement(std::move(k), r.sigma_q_physical);
  r.trace_after_q = k.trace();
  r.q2_after_q = diagonal_second_moment(k);

  k = to_momentum_rep(std::move(k));
  r.p2_after_q = diagonal_second_moment(k);

  k = apply_p_measurement(std::move(k), r.sigma_p_physical);
  r.p2_final = diagonal_second_moment(k);

  k = to_position_rep(std::move(k));
  r.trace_final = k.trace();
  const double q2_final = diagonal_second_moment(k);

  r.oracle_cov = CovarianceMatrix::diagonal(2.0 * q2_final, 2.0 * r.p2_final);
  r.difference = {r.oracle_cov.s11 - r.production_cov.s11, 0.0,
                  r.oracle_cov.s22 - r.production_cov.s22};

  std::ostringstream note;
  note.precision(9);
  if (std::abs(r.difference.s11) > 1e-6 || std::abs(r.difference.s22) > 1e-6) {
    note << "oracle and production covariances differ: d11 = " << r.difference.s11
         << ", d22 = " << r.difference.s22;
    r.notes.push_back(note.str());
  }
  if (settings.sigma_q >= 1e3 && settings.sigma_p >= 1e3) {
    r.notes.push_back(
        "no-measurement limit: the oracle returns the thermal covariance while the production "
        "formula tends to zero");
  }
  return r;
}

FockCoherence fock_coherence(const GaussianState& state, int cutoff) {
  if (cutoff < 100) throw DomainError("fock_coherence: cutoff must be >= 100");
  if (!state.cov.is_diagonal() || state.mean.q != 0.0 || state.mean.p != 0.0) {
    throw DomainError("fock_coherence: needs a zero-mean state with diagonal covariance");
  }
  require_physical(state.cov, "fock_coherence");
  const double det = state.cov.det();
  const double r = 0.25 * std::log(state.cov.s22 / state.cov.s11);
  if (det > 25.0 || std::abs(r) > 1.2) {
    throw DomainError("fock_coherence: requires det Sigma <= 25 and |r| <= 1.2");
  }
  const double nu = std::sqrt(std::max(det, 1.0));
  const double nth = 0.5 * (nu - 1.0);

  // Exponentiate the squeeze generator in a doubled space so the truncation
  // artefacts sit far above the block that is kept.
  const int kept = cutoff + 1;
  const int big = 2 * kept;
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(big, big);
  for (int n = 2; n < big; ++n) {
    const double a2 = std::sqrt(static_cast<double>(n) * (n - 1));  // <n-2| a^2 |n>
    gen(n - 2, n) += 0.5 * r * a2;
    gen(n, n - 2) -= 0.5 * r * a2;
  }
  const Eigen::MatrixXd squeeze = gen.exp();

  Eigen::VectorXd pops(big);
  double pn = 1.0 / (nth + 1.0);
  const double ratio = nth / (nth + 1.0);
  for (int n = 0; n < big; ++n) {
    pops(n) = pn;
    pn *= ratio;
  }
  const Eigen::MatrixXd full = squeeze * pops.asDiagonal() * squeeze.transpose();
  const Eigen::MatrixXd rho = full.topLeftCorner(kept, kept);

  FockCoherence out;
  out.tail_population = std::max(0.0, 1.0 - rho.trace());
  if (out.tail_population > kFockTailBound) {
    std::ostringstream msg;
    msg << "fock_coherence: tail population " << out.tail_population << " above bound at cutoff "
        << cutoff;
    throw CutoffError(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho, Eigen::EigenvaluesOnly);
  auto shannon = [](const auto& values) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (values(i) > 0.0) s -= values(i) * std::log(values(i));
    }
    return s;
  };
  out.state_entropy = shannon(solver.eigenvalues());
  const Eigen::VectorXd diag = rho.diagonal();

  double mean_n = 0.0;
  double a2 = 0.0;  // <a^2>
  for (int n = 0; n < kept; ++n) {
    mean_n += n * diag(n);
    if (n + 2 < kept) a2 += std::sqrt(static_cast<double>(n + 1) * (n + 2)) * rho(n + 2, n);
  }
  out.mean_photons = mean_n;
  out.cov = CovarianceMatrix::diagonal(2.0 * mean_n + 1.0 + 2.0 * a2, 2.0 * mean_n + 1.0 - 2.0 * a2);
  out.coherence_thermal_ref = thermal_entropy(mean_n) - out.state_entropy;
  out.coherence_dephased = shannon(diag) - out.state_entropy;
  return out;
}

}  // namespace gqmet::oracle
