#include "chainqfi/specfun.hpp"

#include <array>
#include <cmath>

#include "chainqfi/error.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * kPi);
const double kLogPi = std::log(kPi);
const double kLog2 = std::log(2.0);

// Re z >= 1/2.
Complex lanczos_log_gamma(Complex z) {
  z -= 1.0;
  Complex sum = kLanczosCoeff[0];
  for (std::size_t i = 1; i < kLanczosCoeff.size(); ++i)
    sum += kLanczosCoeff[i] / (z + static_cast<double>(i));
  const Complex t = z + (kLanczosG + 0.5);
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// log sin(pi z) continued analytically from (0, 1) into Im z >= 0.
Complex log_sin_pi_upper(Complex z) {
  const Complex i(0.0, 1.0);
  const Complex w = std::exp(2.0 * kPi * i * z);
  return -i * kPi * z - kLog2 + i * (0.5 * kPi) + std::log(1.0 - w);
}

}  // namespace

Complex log_gamma_complex(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    raise(ErrorCode::DomainError, "log_gamma_complex: non-finite argument");
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::nearbyint(z.real()))
    raise(ErrorCode::PoleAtNonPositiveInteger,
          "Gamma has a pole at z = " + std::to_string(z.real()));

  if (z.real() >= 0.5) return lanczos_log_gamma(z);
  if (z.imag() < 0.0) return std::conj(log_gamma_complex(std::conj(z)));
  return kLogPi - log_sin_pi_upper(z) - lanczos_log_gamma(1.0 - z);
}

double gamma_ratio_im_x(double delta, double x) {
  if (!(delta > 0.0 && delta < 0.5))
    raise(ErrorCode::DomainError,
          "scaling dimension must lie in (0, 1/2), got " + std::to_string(delta));
  if (!std::isfinite(x)) raise(ErrorCode::DomainError, "non-finite frequency ratio");
  if (x == 0.0) return 0.0;
  const Complex shift(0.0, -x);
  const Complex log_ratio =
      2.0 * (log_gamma_complex(delta + shift) - log_gamma_complex(1.0 - delta + shift));
  return std::exp(log_ratio.real()) * std::sin(log_ratio.imag());
}

double gamma_ratio_im(double delta, double omega_mev, double temperature_k) {
  if (!(temperature_k > 0.0))
    raise(ErrorCode::NonPositiveTemperature, "gamma_ratio_im requires T > 0");
  const double x = omega_mev / (4.0 * kPi * kelvin_to_mev(temperature_k));
  return gamma_ratio_im_x(delta, x);
}

}  // namespace chainqfi
