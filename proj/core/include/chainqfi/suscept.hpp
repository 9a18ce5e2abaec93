#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chainqfi/fitter.hpp"
#include "chainqfi/types.hpp"

namespace chainqfi {

/// Peak position of the uniform-chain susceptibility, k_B T_max / J, from
/// high-temperature series expansion.
inline constexpr double kTmaxOverJ = 0.640851;

/// Which representation of the Bonner-Fisher uniform-chain curve to use.
enum class BonnerFisherForm {
  /// Exact diagonalisation of a finite periodic ring (default 14 sites).
  /// Matches the infinite chain to < 1e-4 for k_B T > 0.5 J; below that
  /// the finite-size gap biases it low.
  FiniteRing,
  /// Rational approximation
  ///   (0.25 + 0.074975x + 0.075235x^2)/(1 + 0.9931x + 0.172135x^2 + 0.757825x^3),
  /// x = J/k_B T. Its maximum sits at k_B T = 0.6475 J.
  Pade,
};

struct SusceptibilityModel {
  BonnerFisherForm form = BonnerFisherForm::FiniteRing;
  int ring_sites = 14;
};

/// Dimensionless chi* = chi J / (N_A g^2 mu_B^2) at t = k_B T / J.
double reduced_susceptibility(double t_over_j, const SusceptibilityModel& model = {});

/// Uniform-chain susceptibility in emu/mol. Throws NonPositiveTemperature.
double chi_bonner_fisher(double t, const ChainParameters& params,
                         const SusceptibilityModel& model = {});

/// c0 (or c0/T) + c1 + chi_BF(T).
double chi_full(double t, const ChainParameters& params,
                const SusceptibilityModel& model = {});

struct SusceptibilityCurve {
  std::vector<double> temperatures;  ///< K, strictly increasing
  std::vector<double> chi;           ///< emu/mol
  std::vector<double> sigma;         ///< emu/mol

  std::size_t size() const noexcept { return temperatures.size(); }
  /// Throws on unequal lengths, non-positive or non-increasing temperatures.
  void validate() const;
};

/// Which of {J, g, c0, c1} stay fixed at their initial values.
struct SusceptibilityFreeze {
  bool j = false;
  bool g = false;
  bool c0 = false;
  bool c1 = true;
};

/// Weighted least squares of chi_full against the curve. Parameter names in
/// the result: "J_over_kB", "g", "c0", "c1".
FitResult fit_susceptibility(const SusceptibilityCurve& curve, const ChainParameters& initial,
                             const SusceptibilityFreeze& freeze = {},
                             const SusceptibilityModel& model = {},
                             const FitOptions& options = {});

/// Copies fitted values back into a parameter set.
ChainParameters apply_fit(const ChainParameters& base, const FitResult& fit);

struct TmaxEstimate {
  double t_max = 0.0;
  double uncertainty = 0.0;  ///< half the local grid spacing
};

/// Vertex of the parabola through the three samples around the largest
/// interior local maximum. Throws NoInteriorMaximum.
TmaxEstimate find_tmax(std::span<const double> temperatures, std::span<const double> chi);
TmaxEstimate find_tmax(const SusceptibilityCurve& curve);
/// Samples `model` on [t_lo, t_hi] with spacing `step` and applies the above.
TmaxEstimate find_tmax(const std::function<double(double)>& model, double t_lo, double t_hi,
                       double step);

/// t_max / 0.640851. Throws NonPositiveTemperature.
double j_from_tmax(double t_max);

struct WitnessSeries {
  std::vector<double> temperatures;
  std::vector<double> mw_se;
  std::optional<double> t_se;  ///< first negative -> positive crossing
};

/// 3 k_B T chi / ((g mu_B)^2 N_A S) - 1 for each sample, chi taken as the
/// isotropic average. Negative values witness entanglement.
WitnessSeries witness_mwse(const SusceptibilityCurve& curve, const ChainParameters& params);

/// The entanglement bound (g mu_B)^2 N_A S / (3 k_B T) in emu/mol.
double witness_bound(double t, double g_factor);

}  // namespace chainqfi
