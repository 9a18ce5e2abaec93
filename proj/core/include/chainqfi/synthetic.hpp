#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "chainqfi/dynamics.hpp"
#include "chainqfi/suscept.hpp"
#include "chainqfi/types.hpp"

namespace chainqfi {

/// Everything needed to regenerate a synthetic dataset bit for bit.
struct SyntheticSpec {
  std::string sample = "synthetic-chain";
  ChainParameters chain{};
  StarykhParams starykh = StarykhParams::standard(3.1);
  SusceptibilityModel model{};
  double lattice_c = 5.0;  ///< Angstrom, used when chain.lattice_c is empty

  std::vector<double> chi_temperatures;       ///< K; default 0.5..20 K in 0.1 K steps
  double chi_relative_sigma = 0.01;

  std::vector<double> spectrum_temperatures{0.04, 0.5};
  std::vector<double> q_axis;                 ///< 1/Angstrom; default 0..2 in 0.05 steps
  std::vector<double> e_axis;                 ///< meV; default -0.1..1.0 in 0.005 steps
  std::array<double, 2> q_window{0.4, 1.1};
  double resolution_fwhm = 0.0175;            ///< meV
  double exposure = 1.0e5;                    ///< counts per unit S
  double elastic_amplitude = 2.0e4;           ///< counts at E = 0
  double background = 50.0;                   ///< counts

  bool noise = true;
  std::uint64_t seed = 20240601;

  /// Fills empty axes with their defaults and validates the rest.
  /// Throws InvalidArgument / NonPositiveTemperature / CutoffDomainError.
  SyntheticSpec resolved() const;
};

/// Counter-based standard normal deviate: a pure function of (seed, stream, index).
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Model chain spectrum used for synthesis: S(E) sin^2(q c / 2), with the
/// E = 0 value taken as the limit of the Bose-weighted line shape.
double synthetic_s1d(double q, double e, double t, const StarykhParams& params, double lattice_c);

SusceptibilityCurve synthetic_susceptibility(const SyntheticSpec& spec);

/// Powder grid in counts (exposure * S_pwd + elastic + background), with
/// Gaussian noise of sigma = sqrt(max(counts, 1)) when spec.noise is set.
SpectrumGrid synthetic_spectrum(const SyntheticSpec& spec, std::size_t temperature_index);

/// exposure * trapezoid integral of the powder envelope over the Q window,
/// i.e. the factor that maps the Q-integrated cut back to the model S.
double synthetic_calibration(const SyntheticSpec& spec);

struct SyntheticOutput {
  std::filesystem::path chi_csv;
  std::vector<std::filesystem::path> spectrum_csvs;
  std::vector<std::filesystem::path> manifests;
  std::filesystem::path generation_manifest;
};

/// Writes chi.csv, T_<T>K/sqe.csv + T_<T>K/manifest.json per temperature and
/// synth_manifest.json recording every generation parameter.
SyntheticOutput generate_synthetic_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace chainqfi
