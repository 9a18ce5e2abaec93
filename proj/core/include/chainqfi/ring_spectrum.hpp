#pragma once

#include <vector>

namespace chainqfi {

/// Full spectrum of the spin-1/2 Heisenberg ring H = J sum_i S_i . S_{i+1}
/// (periodic, J = 1), compressed to distinct levels. Built by exact
/// diagonalisation in (S^z_total, crystal momentum) sectors.
struct RingSpectrum {
  int sites = 0;
  double ground_energy = 0.0;         ///< in units of J
  std::vector<double> excitation;     ///< E - E_0 per distinct level, ascending
  std::vector<double> degeneracy;     ///< number of states in the level
  std::vector<double> m2_weight;      ///< sum of (S^z_total)^2 over those states
};

/// Cached per ring size; first call for a given size diagonalises.
/// Thread-safe. Sizes 4..18 are accepted.
const RingSpectrum& ring_spectrum(int sites);

/// Dimensionless susceptibility per site, chi* = chi J / (N_A g^2 mu_B^2),
/// at reduced temperature t = k_B T / J.
double ring_reduced_susceptibility(const RingSpectrum& spectrum, double t);

}  // namespace chainqfi
