#pragma once

#include <functional>
#include <span>

#include <Eigen/Core>

#include "chainqfi/dynamics.hpp"
#include "chainqfi/types.hpp"

namespace chainqfi {

struct QfiPoint {
  double temperature = 0.0;
  double f_q = 0.0;
  double quadrature_error_estimate = 0.0;
};

struct QfiDiagnostics {
  std::size_t clipped_bins = 0;      ///< negative chi'' samples set to zero
  std::size_t samples_used = 0;      ///< tabulated nodes inside [0, omega_max]
  double tail_fraction = 0.0;        ///< share of F_Q from the top 10% of the range
  bool truncation_warning = false;   ///< tail_fraction > 1%
};

struct QfiResult {
  QfiPoint point;
  QfiDiagnostics diagnostics;
};

inline constexpr std::size_t kMinQfiSamples = 8;

/// tanh(omega / 2 k_B T) * chi''.
double qfi_integrand(double omega_mev, double t, double chi_imag);

/// (4/pi) * trapezoid of the integrand over [0, omega_max] on the cut's own
/// grid (endpoints interpolated). Negative chi'' is clipped to zero and
/// counted. The error estimate is |T_h - T_2h| from dropping every other
/// node. Throws GridTooCoarse (< 8 nodes) and InvalidArgument when the cut
/// does not reach omega_max.
QfiResult compute_qfi(const EnergyCut& chi_imag_cut, double omega_max);

/// Adaptive quadrature of a chi''(omega) closure, relative tolerance 1e-8.
QfiResult compute_qfi(const std::function<double(double)>& chi_imag, double t, double omega_max,
                      double rel_tol = 1e-8);

/// Convenience: the closure is chi_imag_starykh with `params`.
QfiResult compute_qfi(const StarykhParams& params, double t, double omega_max);

/// Upper edge of the two-spinon continuum, pi J, in meV.
double default_omega_max(double j_over_kb);

struct ScalingFit {
  double delta_q_over_z = 0.0;
  double delta_q = 0.0;
  double z = 1.0;
  double amplitude = 0.0;       ///< F_Q ~ amplitude * T^slope
  double slope = 0.0;
  double intercept = 0.0;       ///< ln amplitude
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  ///< (intercept, slope)
  double r_squared = 0.0;
};

/// Ordinary least squares of ln F_Q against ln T. Needs >= 3 points with
/// F_Q > 0 and T > 0 (NonPositiveValue otherwise) and z > 0.
ScalingFit fit_scaling(std::span<const QfiPoint> points, double z);

}  // namespace chainqfi
