#include "doctest.h"

#include <cmath>

#include "chainqfi/error.hpp"
#include "chainqfi/ring_spectrum.hpp"
#include "oracles.hpp"

using namespace chainqfi;

TEST_CASE("sector diagonalisation matches the dense product-basis oracle") {
  for (int n : {6, 8, 10}) {
    const oracle::DenseRing dense(n);
    const auto& spec = ring_spectrum(n);
    CHECK(spec.ground_energy == doctest::Approx(dense.energies.front()).epsilon(1e-11));
    double states = 0.0;
    for (double d : spec.degeneracy) states += d;
    CHECK(states == doctest::Approx(std::pow(2.0, n)));
    for (double t : {0.05, 0.2, 0.64, 1.0, 5.0, 50.0})
      CHECK(ring_reduced_susceptibility(spec, t) == doctest::Approx(dense.chi(t)).epsilon(1e-11));
  }
}

TEST_CASE("known ground-state energies") {
  // E0 / J for the 4-site ring is -2 (singlet of S = 1 pairs).
  CHECK(ring_spectrum(4).ground_energy == doctest::Approx(-2.0).epsilon(1e-12));
  // Bethe-ansatz limit 1/4 - ln 2 per site is approached from below.
  const double e14 = ring_spectrum(14).ground_energy / 14.0;
  CHECK(e14 < 0.25 - std::log(2.0));
  CHECK(e14 > 0.25 - std::log(2.0) - 0.005);
}

TEST_CASE("high temperature Curie limit") {
  const auto& s = ring_spectrum(12);
  // chi* -> 1/(4t) (1 - 1/(2t) + ...)
  const double t = 200.0;
  CHECK(ring_reduced_susceptibility(s, t) * 4.0 * t == doctest::Approx(1.0 - 0.5 / t).epsilon(1e-4));
}

TEST_CASE("size limits") {
  CHECK_THROWS_AS(ring_spectrum(3), Error);
  CHECK_THROWS_AS(ring_spectrum(19), Error);
}
