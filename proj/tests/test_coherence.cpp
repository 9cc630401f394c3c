#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gqmet/channels.hpp"
#include "gqmet/coherence.hpp"
#include "gqmet/errors.hpp"
#include "support.hpp"

using namespace gqmet;
namespace ref = gqmet::reference;
using gqmet::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

GaussianState squeezed_vacuum(double r) {
  return {{}, CovarianceMatrix::diagonal(std::exp(2 * r), std::exp(-2 * r))};
}

const ProbeSpec kAsymProbe{ref::kNbar, MeasurementSettings{1.2, 0.8}};

}  // namespace

TEST_CASE("reference occupation") {
  CHECK(ref_occupation(make_thermal(0.7)) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(ref_occupation(squeezed_vacuum(1.0)) ==
        doctest::Approx(ref::kSqueezedVacuumRefOccupation).epsilon(1e-14));
  CHECK(ref_occupation({{}, CovarianceMatrix::diagonal(ref::kProbeS11, ref::kProbeS22)}) ==
        doctest::Approx(ref::kProbeRefOccupation).epsilon(1e-14));
  const GaussianState displaced{{1.0, 2.0}, CovarianceMatrix::identity()};
  CHECK(ref_occupation(displaced) == doctest::Approx(5.0 / 4.0));
}

TEST_CASE("coherence examples") {
  CHECK(std::abs(coherence(make_thermal(1.3)).coherence) < 1e-15);
  const auto sv = coherence(squeezed_vacuum(1.0));
  CHECK(sv.coherence == doctest::Approx(ref::kSqueezedVacuumCoherence).epsilon(1e-13));
  CHECK(sv.state_entropy == 0.0);
  const auto probe = coherence(prepare_physical_probe(kAsymProbe));
  CHECK(probe.coherence == doctest::Approx(ref::kProbeCoherence).epsilon(1e-12));
  CHECK(probe.ref_entropy == doctest::Approx(ref::kProbeRefEntropy).epsilon(1e-13));
  CHECK(probe.state_entropy == doctest::Approx(ref::kProbeEntropy).epsilon(1e-13));
  CHECK(probe.coherence == doctest::Approx(probe.ref_entropy - probe.state_entropy).epsilon(1e-15));
  CHECK_THROWS_AS(coherence({{}, CovarianceMatrix::diagonal(0.5, 0.5)}), UnphysicalState);
}

TEST_CASE("coherence derivative") {
  StateFamily heating;
  heating.evaluate = [](double t) { return make_thermal(t * t); };
  CHECK(std::abs(coherence_derivative(heating, 0.8)) < 1e-12);

  const ProbeSpec sym{ref::kNbar, MeasurementSettings{0.9, 0.9}};
  const auto att = attenuator_phi_family(sym, 0.5);
  for (double phi : {0.0, 0.4, 1.0, kPi / 2}) CHECK(std::abs(coherence_derivative(att, phi)) < 1e-10);

  const auto amp = amplifier_rg_family(kAsymProbe, 0.5);
  const double plateau = coherence_derivative(amp, 8.0);
  CHECK(std::abs(plateau) < 1e-3);
  CHECK(plateau == doctest::Approx(ref::kPlateauDcoherence).epsilon(1e-3));

  // Against a smooth closed-form check: squeezed vacuum in r, dC/dr = sinh(2r) ln(coth^2 r).
  StateFamily sq;
  sq.evaluate = squeezed_vacuum;
  const double r = 0.6;
  const double n = std::sinh(r) * std::sinh(r);
  const double expected = 2 * std::sinh(r) * std::cosh(r) * std::log((n + 1) / n);
  CHECK(coherence_derivative(sq, r) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("property: symmetric settings carry no coherence") {
  for (int i = 0; i <= 20; ++i) {
    const double s = 0.5 + 1.0 * i / 20;
    const ProbeSpec spec{ref::kNbar, MeasurementSettings{s, s}};
    const auto prepared = prepare_probe(spec);
    if (!prepared.check.ok) continue;
    CHECK(std::abs(coherence(prepared.state).coherence) < 1e-12);
  }
}

TEST_CASE("property: coherence is nonnegative and vanishes only for centred isotropic states") {
  Gen gen(51);
  for (int i = 0; i < 500; ++i) {
    const GaussianState s = gen.state(8.0, 1.2, 1.5);
    const double c = coherence(s).coherence;
    CHECK(c >= -1e-12);
    const bool isotropic = s.cov.s12 == 0.0 && s.cov.s11 == s.cov.s22 && s.mean == QuadratureVector{};
    if (!isotropic) CHECK(c > 1e-12);
  }
}

TEST_CASE("property: coherence decreases with environment noise") {
  const MeasurementSettings curves[] = {{1.2, 0.8}, {0.8, 1.2}, {1.4, 0.7}};
  for (const auto& m : curves) {
    const ProbeSpec probe{ref::kNbar, m};
    for (double phi : {0.2, kPi / 4, 1.2}) {
      const auto f = attenuator_mbar_family(probe, phi);
      for (double mb = 0.0; mb <= 3.0; mb += 0.25) CHECK(coherence_derivative(f, mb) <= 1e-12);
    }
    for (double rg : {0.3, 1.0, 2.0}) {
      const auto f = amplifier_mbar_family(probe, rg);
      for (double mb = 0.0; mb <= 3.0; mb += 0.25) CHECK(coherence_derivative(f, mb) <= 1e-12);
    }
  }
}
