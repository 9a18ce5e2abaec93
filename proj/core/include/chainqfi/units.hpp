#pragma once

namespace chainqfi {

/// Fixed unit conventions: energies in meV, temperatures in K, molar
/// susceptibilities in CGS emu/mol.
struct UnitSystem {
  static constexpr double boltzmann_mev_per_kelvin = 0.08617333;
  // CGS-emu
  static constexpr double boltzmann_erg_per_kelvin = 1.380649e-16;
  static constexpr double bohr_magneton_erg_per_gauss = 9.2740100783e-21;
  static constexpr double avogadro = 6.02214076e23;

  /// N_A * mu_B^2 / k_B in emu K / mol (about 0.3751).
  static constexpr double curie_prefactor_emu_k_per_mol =
      avogadro * bohr_magneton_erg_per_gauss * bohr_magneton_erg_per_gauss /
      boltzmann_erg_per_kelvin;
};

inline constexpr double kPi = 3.14159265358979323846;

double kelvin_to_mev(double kelvin);
double mev_to_kelvin(double mev);

}  // namespace chainqfi
