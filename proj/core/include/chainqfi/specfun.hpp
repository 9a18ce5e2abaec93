#pragma once

#include <complex>

namespace chainqfi {

using Complex = std::complex<double>;

/// Principal branch of log Gamma(z): analytic on the plane cut along the
/// non-positive real axis and real for z > 0. Lanczos (g = 7, 9 terms) for
/// Re z >= 1/2, reflection below. Throws PoleAtNonPositiveInteger.
Complex log_gamma_complex(Complex z);

/// Im[ Gamma^2(delta - i x) / Gamma^2(1 - delta - i x) ] for dimensionless x.
/// The ratio is formed in log space, so large |x| does not overflow.
/// Throws DomainError unless 0 < delta < 1/2.
double gamma_ratio_im_x(double delta, double x);

/// Same with x = omega / (4 pi k_B T), omega in meV and T in K.
double gamma_ratio_im(double delta, double omega_mev, double temperature_k);

}  // namespace chainqfi
