#include "chainqfi/qfi.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chainqfi/error.hpp"
#include "chainqfi/quadrature.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {
namespace {

constexpr double kTailShare = 0.1;
constexpr double kTailWarning = 0.01;

void require_positive(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t))
    raise(ErrorCode::NonPositiveTemperature, std::string(what) + " must be > 0");
}

}  // namespace

double qfi_integrand(double omega_mev, double t, double chi_imag) {
  require_positive(t, "temperature");
  return std::tanh(omega_mev / (2.0 * kelvin_to_mev(t))) * chi_imag;
}

double default_omega_max(double j_over_kb) { return kPi * kelvin_to_mev(j_over_kb); }

QfiResult compute_qfi(const EnergyCut& cut, double omega_max) {
  if (!(omega_max > 0.0)) raise(ErrorCode::InvalidArgument, "omega_max must be > 0");
  const double t = cut.temperature();
  const auto& e = cut.e_axis();
  const auto& v = cut.values();
  // A few ulp of slack so a grid built as hi * i / n still reaches hi.
  if (e.back() < omega_max * (1.0 - 1e-12))
    raise(ErrorCode::InvalidArgument,
          "cut ends at " + std::to_string(e.back()) + " meV, below omega_max = " +
              std::to_string(omega_max) + " meV");

  QfiResult out;
  out.point.temperature = t;

  auto chi_at = [&](std::size_t i) {
    if (v[i] < 0.0) return 0.0;
    return v[i];
  };
  // Linear interpolation of clipped chi'' at an arbitrary energy inside the cut.
  auto interpolate = [&](double x) {
    const auto it = std::upper_bound(e.begin(), e.end(), x);
    if (it == e.begin()) return chi_at(0);
    if (it == e.end()) return chi_at(e.size() - 1);
    const auto hi = static_cast<std::size_t>(it - e.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - e[lo]) / (e[hi] - e[lo]);
    return (1.0 - w) * chi_at(lo) + w * chi_at(hi);
  };

  std::vector<double> x{0.0};
  std::vector<double> y{0.0};  // tanh(0) = 0
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] <= 0.0 || e[i] > omega_max) continue;
    if (v[i] < 0.0) ++out.diagnostics.clipped_bins;
    x.push_back(e[i]);
    y.push_back(qfi_integrand(e[i], t, chi_at(i)));
  }
  if (x.back() < omega_max) {
    x.push_back(omega_max);
    y.push_back(qfi_integrand(omega_max, t, interpolate(omega_max)));
  }
  out.diagnostics.samples_used = x.size();
  if (x.size() < kMinQfiSamples)
    raise(ErrorCode::GridTooCoarse,
          "only " + std::to_string(x.size()) + " energy nodes in [0, omega_max]; need at least " +
              std::to_string(kMinQfiSamples));

  const double fine = trapezoid(x, y);
  std::vector<double> xc, yc;
  for (std::size_t i = 0; i < x.size(); i += 2) {
    xc.push_back(x[i]);
    yc.push_back(y[i]);
  }
  if (xc.back() != x.back()) {
    xc.push_back(x.back());
    yc.push_back(y.back());
  }
  const double coarse = trapezoid(xc, yc);
  const double norm = 4.0 / kPi;
  out.point.f_q = norm * fine;
  out.point.quadrature_error_estimate = norm * std::abs(fine - coarse);

  const double tail_start = (1.0 - kTailShare) * omega_max;
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] <= tail_start) continue;
    const double lo = std::max(x[i - 1], tail_start);
    const double ylo = x[i - 1] >= tail_start
                           ? y[i - 1]
                           : y[i - 1] + (y[i] - y[i - 1]) * (lo - x[i - 1]) / (x[i] - x[i - 1]);
    tail += 0.5 * (x[i] - lo) * (y[i] + ylo);
  }
  out.diagnostics.tail_fraction = fine > 0.0 ? tail / fine : 0.0;
  out.diagnostics.truncation_warning = out.diagnostics.tail_fraction > kTailWarning;
  return out;
}

QfiResult compute_qfi(const std::function<double(double)>& chi_imag, double t, double omega_max,
                      double rel_tol) {
  require_positive(t, "temperature");
  if (!(omega_max > 0.0)) raise(ErrorCode::InvalidArgument, "omega_max must be > 0");
  const auto integrand = [&](double w) { return qfi_integrand(w, t, chi_imag(w)); };
  const auto total = integrate_adaptive(integrand, 0.0, omega_max, rel_tol);
  const auto tail = integrate_adaptive(integrand, (1.0 - kTailShare) * omega_max, omega_max, rel_tol);

  QfiResult out;
  const double norm = 4.0 / kPi;
  out.point.temperature = t;
  out.point.f_q = norm * total.value;
  out.point.quadrature_error_estimate = norm * total.error_estimate;
  out.diagnostics.tail_fraction = total.value != 0.0 ? tail.value / total.value : 0.0;
  out.diagnostics.truncation_warning = out.diagnostics.tail_fraction > kTailWarning;
  return out;
}

QfiResult compute_qfi(const StarykhParams& params, double t, double omega_max) {
  // Validate the domain once so the quadrature does not throw midway.
  (void)scaling_dimension(t, params);
  return compute_qfi([&](double w) { return chi_imag_starykh(w, t, params); }, t, omega_max);
}

ScalingFit fit_scaling(std::span<const QfiPoint> points, double z) {
  if (points.size() < 3)
    raise(ErrorCode::InvalidArgument, "scaling fit needs at least 3 points, got " +
                                          std::to_string(points.size()));
  if (!(z > 0.0)) raise(ErrorCode::InvalidArgument, "dynamic exponent z must be > 0");
  const auto n = static_cast<double>(points.size());
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.temperature > 0.0) || !(p.f_q > 0.0))
      raise(ErrorCode::NonPositiveValue,
            "scaling fit needs F_Q > 0 and T > 0 (T = " + std::to_string(p.temperature) +
                " K, F_Q = " + std::to_string(p.f_q) + ")");
    x.push_back(std::log(p.temperature));
    y.push_back(std::log(p.f_q));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) raise(ErrorCode::InvalidArgument, "scaling fit needs distinct temperatures");

  ScalingFit fit;
  fit.z = z;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.amplitude = std::exp(fit.intercept);
  fit.delta_q_over_z = -fit.slope;
  fit.delta_q = -fit.slope * z;

  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  const double s2 = ssr / (n - 2.0);
  const double var_slope = s2 / sxx;
  fit.covariance(1, 1) = var_slope;
  fit.covariance(0, 0) = s2 / n + mx * mx * var_slope;
  fit.covariance(0, 1) = fit.covariance(1, 0) = -mx * var_slope;
  return fit;
}

}  // namespace chainqfi
