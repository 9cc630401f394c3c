#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gqmet/channels.hpp"
#include "gqmet/errors.hpp"
#include "support.hpp"

using namespace gqmet;
namespace ref = gqmet::reference;
using gqmet::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

bool near(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b, double tol) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("attenuator matrices") {
  auto ch = attenuator({kPi / 2, 0.5});
  CHECK(near(ch.M, Eigen::Matrix2d::Zero(), 1e-15));
  CHECK(near(ch.N, 2 * Eigen::Matrix2d::Identity(), 1e-15));
  ch = attenuator({kPi / 4, 0.5});
  CHECK(near(ch.M, std::sqrt(0.5) * Eigen::Matrix2d::Identity(), 1e-15));
  CHECK(near(ch.N, Eigen::Matrix2d::Identity(), 1e-15));
  ch = attenuator({kPi / 3, 0.0});
  CHECK(near(ch.M, 0.5 * Eigen::Matrix2d::Identity(), 1e-15));
  CHECK(near(ch.N, 0.75 * Eigen::Matrix2d::Identity(), 1e-15));
  CHECK(AttenuatorParams{kPi / 3, 0.0}.eta() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(attenuator({-0.1, 0.5}), DomainError);
  CHECK_THROWS_AS(attenuator({2.0, 0.5}), DomainError);
  CHECK_THROWS_AS(attenuator({0.5, -1.0}), DomainError);
}

TEST_CASE("amplifier matrices") {
  auto ch = amplifier({0.0, 3.0});
  CHECK(near(ch.M, Eigen::Matrix2d::Identity(), 0.0));
  CHECK(near(ch.N, Eigen::Matrix2d::Zero(), 0.0));
  ch = amplifier({1.0, 0.5});
  CHECK(near(ch.M, std::cosh(1.0) * Eigen::Matrix2d::Identity(), 1e-15));
  CHECK(near(ch.N, ref::kAmpNoise * Eigen::Matrix2d::Identity(), 1e-14));
  CHECK(AmplifierParams{1.0, 0.5}.gain() == doctest::Approx(ref::kAmpGain).epsilon(1e-15));
  CHECK_THROWS_AS(amplifier({-1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(amplifier({1.0, -0.5}), DomainError);
  CHECK_THROWS_AS(amplifier({std::nan(""), 0.5}), DomainError);
}

TEST_CASE("complete positivity") {
  const auto id = cp_check({});
  CHECK(id.physical);
  CHECK(std::abs(id.margin) < 1e-15);
  GaussianChannel amp_noiseless;
  amp_noiseless.M = 2 * Eigen::Matrix2d::Identity();
  const auto bad = cp_check(amp_noiseless);
  CHECK_FALSE(bad.physical);
  CHECK_FALSE(bad.scalar_physical);
  CHECK(bad.scalar_margin == doctest::Approx(-9.0));
  for (double phi : {0.0, 0.3, kPi / 4, kPi / 2}) {
    for (double m : {0.0, 0.5, 2.0}) {
      CHECK(cp_check(attenuator({phi, m})).physical);
      CHECK(cp_check(amplifier({phi * 2, m})).physical);
    }
  }
}

TEST_CASE("apply channel examples") {
  auto out = apply_channel(attenuator({kPi / 2, 0.0}), make_thermal(1.0));
  CHECK(out.cov.s11 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out.cov.s22 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(out.cov.s12) < 1e-16);

  const GaussianState any{{0.3, -0.2}, {2.0, 0.4, 1.5}};
  out = apply_channel(attenuator({0.0, 7.0}), any);
  CHECK(out.cov == any.cov);
  CHECK(out.mean == any.mean);

  out = apply_channel(amplifier({1.0, 0.0}), make_vacuum());
  CHECK(out.cov.s11 == doctest::Approx(ref::kAmpVacuumVar).epsilon(1e-14));
  CHECK(out.cov.s22 == doctest::Approx(ref::kAmpVacuumVar).epsilon(1e-14));

  GaussianChannel unphysical;
  unphysical.M = 2 * Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(apply_channel(unphysical, make_vacuum()), UnphysicalState);
  CHECK_THROWS_AS(apply_channel(attenuator({0.1, 0.0}), {{}, CovarianceMatrix::diagonal(0.5, 0.5)}),
                  UnphysicalState);
}

TEST_CASE("unitary channels") {
  const double r = 0.7;
  auto out = apply_channel(unitary_channel(Squeeze{r}), make_vacuum());
  CHECK(out.cov.s11 == doctest::Approx(std::exp(-2 * r)).epsilon(1e-15));
  CHECK(out.cov.s22 == doctest::Approx(std::exp(2 * r)).epsilon(1e-15));
  CHECK(out.cov.det() == doctest::Approx(1.0).epsilon(1e-15));

  out = apply_channel(unitary_channel(Rotate{kPi / 2}), {{}, CovarianceMatrix::diagonal(3.0, 0.5)});
  CHECK(out.cov.s11 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.cov.s22 == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(out.cov.s12) < 1e-15);

  out = apply_channel(unitary_channel(Displace{{1.0, 0.0}}), make_vacuum());
  CHECK(out.mean == QuadratureVector{1.0, 0.0});
  CHECK(out.cov == CovarianceMatrix::identity());
  CHECK(unitary_channel(Squeeze{r}).N.norm() == 0.0);
}

TEST_CASE("property: channels preserve physicality and commute with the quadrature swap") {
  Gen gen(21);
  for (int i = 0; i < 300; ++i) {
    CAPTURE(i);
    const GaussianState s = gen.state();
    const AttenuatorParams ap{gen.uniform(0.0, kPi / 2), gen.uniform(0.0, 3.0)};
    const AmplifierParams gp{gen.uniform(0.0, 3.0), gen.uniform(0.0, 3.0)};
    for (const auto& ch : {attenuator(ap), amplifier(gp)}) {
      const auto out = apply_channel(ch, s);
      CHECK(validate_cov(out.cov).physical);
      const auto swapped_in = apply_channel(ch, {s.mean, s.cov.swapped()});
      CHECK(swapped_in.cov.s11 == doctest::Approx(out.cov.s22).epsilon(1e-14));
      CHECK(swapped_in.cov.s22 == doctest::Approx(out.cov.s11).epsilon(1e-14));
      CHECK(swapped_in.cov.s12 == doctest::Approx(out.cov.s12).epsilon(1e-14));
    }
  }
}

TEST_CASE("property: identity limits") {
  Gen gen(22);
  for (int i = 0; i < 100; ++i) {
    const GaussianState s = gen.state();
    for (const auto& ch : {attenuator({0.0, gen.uniform(0, 5)}), amplifier({0.0, gen.uniform(0, 5)})}) {
      const auto out = apply_channel(ch, s);
      CHECK(std::abs(out.cov.s11 - s.cov.s11) < 1e-14);
      CHECK(std::abs(out.cov.s12 - s.cov.s12) < 1e-14);
      CHECK(std::abs(out.cov.s22 - s.cov.s22) < 1e-14);
      CHECK(std::abs(out.mean.q - s.mean.q) < 1e-14);
    }
  }
}

TEST_CASE("property: matrix and scalar complete-positivity tests agree") {
  Gen gen(23);
  int disagreements = 0;
  int physical = 0;
  for (int i = 0; i < 1000; ++i) {
    GaussianChannel ch;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) ch.M(r, c) = gen.uniform(-2.0, 2.0);
    }
    const double a = gen.uniform(0.0, 4.0);
    const double b = gen.uniform(0.0, 4.0);
    const double off = gen.uniform(-1.0, 1.0) * std::sqrt(a * b) * 1.2;
    ch.N << a, off, off, b;
    const auto rep = cp_check(ch);
    physical += rep.physical;
    disagreements += rep.physical != rep.scalar_physical;
  }
  CHECK(disagreements == 0);
  CHECK(physical > 50);
  CHECK(physical < 950);
}
