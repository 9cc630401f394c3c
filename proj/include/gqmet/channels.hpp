#pragma once

#include <variant>

#include <Eigen/Dense>

#include "gqmet/gaussian.hpp"

namespace gqmet {

inline constexpr double kCpTol = 1e-12;

/// Gaussian channel d -> M d + offset, Sigma -> M Sigma M^T + N.
///
/// The (M, N) pair is the linear part; `offset` carries the affine mean shift
/// of a displacement, which the (M, N) description alone cannot express.
struct GaussianChannel {
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d N = Eigen::Matrix2d::Zero();
  QuadratureVector offset{};
};

struct AttenuatorParams {
  double phi = 0.0;   // beam-splitter angle in [0, pi/2]
  double mbar = 0.0;  // environment occupation

  double eta() const;  // transmissivity cos^2(phi)
  void validate() const;
};

struct AmplifierParams {
  double rg = 0.0;    // two-mode squeezing parameter
  double mbar = 0.0;

  double gain() const;  // cosh^2(rg)
  void validate() const;
};

struct CpReport {
  bool physical = false;
  double margin = 0.0;  // smallest eigenvalue of N + i Omega - i M Omega M^T
  bool scalar_physical = false;
  double scalar_margin = 0.0;  // det N - (det M - 1)^2
};

CpReport cp_check(const GaussianChannel& ch);

GaussianChannel attenuator(const AttenuatorParams& p);
GaussianChannel amplifier(const AmplifierParams& p);

struct Squeeze {
  double r = 0.0;
};
struct Rotate {
  double angle = 0.0;
};
struct Displace {
  QuadratureVector d;
};
using UnitaryKind = std::variant<Squeeze, Rotate, Displace>;

GaussianChannel unitary_channel(const UnitaryKind& kind);

GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& s);

}  // namespace gqmet
