#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "chainqfi/fitter.hpp"
#include "chainqfi/types.hpp"

namespace chainqfi {

/// How ln(T0/T) is treated when T >= T0 makes it non-positive.
enum class NegativeLogPolicy {
  Strict,         ///< require ln(T0/T) > 1/2
  AbsoluteValue,  ///< use |ln(T0/T)|, still requiring it > 1/2
};

std::string_view to_string(NegativeLogPolicy policy) noexcept;
/// Accepts "strict", "absolute-value" and "absolute_value".
NegativeLogPolicy parse_negative_log_policy(std::string_view text);

/// Finite-temperature line shape parameters of the chain.
struct StarykhParams {
  double a_starykh = 0.00065;       ///< non-universal amplitude
  double t0 = 0.0;                  ///< high-energy cutoff, K
  double j_over_kb = 3.1;           ///< K
  NegativeLogPolicy policy = NegativeLogPolicy::Strict;

  /// Amplitude 0.00065 and cutoff T0 = pi J / 8.
  static StarykhParams standard(double j_over_kb,
                                NegativeLogPolicy policy = NegativeLogPolicy::Strict);
  void validate() const;
};

struct ScalingDimension {
  double delta = 0.0;
  double log_ratio = 0.0;  ///< the ln(T0/T) actually used (after the policy)
};

/// Delta = (1/4)(1 - 1/(2 ln(T0/T))). Throws CutoffDomainError when the
/// active policy leaves Delta outside (0, 1/4].
ScalingDimension scaling_dimension(double t, const StarykhParams& params);

/// Bose factor 1/(1 - exp(-omega / k_B T)). Throws BoseFactorPole at 0.
double bose_factor(double omega_mev, double t);

/// Dynamical structure factor at the antiferromagnetic wavevector
/// (arbitrary units). Throws CutoffDomainError, BoseFactorPole.
double sqw_starykh(double omega_mev, double t, const StarykhParams& params);

/// chi'' = (1 - exp(-omega / k_B T)) S.
double chi_imag_from_sqw(double s_value, double omega_mev, double t);

/// chi''(omega, T) with the Bose factor cancelled analytically; odd in
/// omega and admissible at omega = 0.
double chi_imag_starykh(double omega_mev, double t, const StarykhParams& params);

/// Joint, temperature-independent fit configuration. Every cut holds chi''
/// already divided by its manifest calibration; `dataset_of_cut` assigns
/// each cut to a relative calibration factor (default: all in dataset 0).
struct StarykhFitConfig {
  bool freeze_amplitude = false;
  bool freeze_t0 = false;
  std::vector<std::size_t> dataset_of_cut;
  std::vector<double> calibration;       ///< initial factors, default 1
  bool freeze_calibration = true;
  FitOptions options{};
};

/// Parameter names: "A_starykh", "T0_K", "calibration_<d>".
FitResult fit_starykh(std::span<const EnergyCut> chi_imag_cuts, const StarykhParams& initial,
                      const StarykhFitConfig& config = {});

StarykhParams apply_fit(const StarykhParams& base, const FitResult& fit);

}  // namespace chainqfi
