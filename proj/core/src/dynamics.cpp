#include "chainqfi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chainqfi/error.hpp"
#include "chainqfi/parallel.hpp"
#include "chainqfi/specfun.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {

std::string_view to_string(NegativeLogPolicy policy) noexcept {
  return policy == NegativeLogPolicy::Strict ? "strict" : "absolute-value";
}

NegativeLogPolicy parse_negative_log_policy(std::string_view text) {
  if (text == "strict") return NegativeLogPolicy::Strict;
  if (text == "absolute-value" || text == "absolute_value") return NegativeLogPolicy::AbsoluteValue;
  raise(ErrorCode::ConfigError, "unknown negative-log policy '" + std::string(text) +
                                    "' (expected strict or absolute-value)");
}

StarykhParams StarykhParams::standard(double j_over_kb, NegativeLogPolicy policy) {
  StarykhParams p;
  p.j_over_kb = j_over_kb;
  p.t0 = kPi * j_over_kb / 8.0;
  p.policy = policy;
  return p;
}

void StarykhParams::validate() const {
  if (!(a_starykh > 0.0)) raise(ErrorCode::InvalidArgument, "A_Starykh must be > 0");
  if (!(t0 > 0.0)) raise(ErrorCode::InvalidArgument, "T0 must be > 0");
  if (!(j_over_kb > 0.0)) raise(ErrorCode::InvalidArgument, "J/k_B must be > 0");
}

ScalingDimension scaling_dimension(double t, const StarykhParams& params) {
  if (!(t > 0.0)) raise(ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  if (!(params.t0 > 0.0)) raise(ErrorCode::InvalidArgument, "T0 must be > 0");
  double log_ratio = std::log(params.t0 / t);
  if (params.policy == NegativeLogPolicy::AbsoluteValue) log_ratio = std::abs(log_ratio);
  if (!(log_ratio > 0.5)) {
    raise(ErrorCode::CutoffDomainError,
          "ln(T0/T) = " + std::to_string(std::log(params.t0 / t)) + " at T = " +
              std::to_string(t) + " K, T0 = " + std::to_string(params.t0) +
              " K leaves the scaling dimension outside (0, 1/4] under the " +
              std::string(to_string(params.policy)) +
              " policy; lower T, raise T0, or select --policy absolute-value");
  }
  return {0.25 * (1.0 - 1.0 / (2.0 * log_ratio)), log_ratio};
}

double bose_factor(double omega_mev, double t) {
  if (!(t > 0.0)) raise(ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  if (omega_mev == 0.0) raise(ErrorCode::BoseFactorPole, "Bose factor diverges at omega = 0");
  return 1.0 / -std::expm1(-omega_mev / kelvin_to_mev(t));
}

double chi_imag_from_sqw(double s_value, double omega_mev, double t) {
  if (!(t > 0.0)) raise(ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  if (omega_mev == 0.0) return 0.0;
  return -std::expm1(-omega_mev / kelvin_to_mev(t)) * s_value;
}

double chi_imag_starykh(double omega_mev, double t, const StarykhParams& params) {
  const auto dim = scaling_dimension(t, params);
  const double delta = dim.delta;
  const double kt = kelvin_to_mev(t);
  const double gamma = std::tgamma(1.0 - 2.0 * delta);
  const double prefactor = params.a_starykh / (kPi * kt) * std::pow(2.0, 2.0 * delta - 1.5) *
                           std::sin(2.0 * kPi * delta) * std::sqrt(dim.log_ratio) * gamma * gamma;
  return prefactor * gamma_ratio_im_x(delta, omega_mev / (4.0 * kPi * kt));
}

double sqw_starykh(double omega_mev, double t, const StarykhParams& params) {
  const double chi = chi_imag_starykh(omega_mev, t, params);
  return bose_factor(omega_mev, t) * chi;
}

FitResult fit_starykh(std::span<const EnergyCut> cuts, const StarykhParams& initial,
                      const StarykhFitConfig& config) {
  if (cuts.empty()) raise(ErrorCode::InvalidArgument, "fit_starykh needs at least one cut");
  initial.validate();

  std::vector<std::size_t> dataset = config.dataset_of_cut;
  if (dataset.empty()) dataset.assign(cuts.size(), 0);
  if (dataset.size() != cuts.size())
    raise(ErrorCode::InvalidArgument, "dataset_of_cut must list one index per cut");
  const std::size_t n_sets = *std::max_element(dataset.begin(), dataset.end()) + 1;
  std::vector<double> calibration = config.calibration;
  if (calibration.empty()) calibration.assign(n_sets, 1.0);
  if (calibration.size() != n_sets)
    raise(ErrorCode::InvalidArgument, "one initial calibration factor per dataset required");

  double t_max = 0.0;
  std::vector<std::size_t> offset(cuts.size() + 1, 0);
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    t_max = std::max(t_max, cuts[c].temperature());
    for (double s : cuts[c].errors())
      if (!(s > 0.0)) raise(ErrorCode::InvalidArgument, "fit_starykh requires errors > 0");
    offset[c + 1] = offset[c] + cuts[c].size();
    // Surface domain problems at the starting point with their own error code.
    (void)scaling_dimension(cuts[c].temperature(), initial);
  }

  std::vector<ParameterSpec> specs;
  specs.push_back({"A_starykh", initial.a_starykh, config.freeze_amplitude, 0.0, std::nullopt});
  ParameterSpec t0{"T0_K", initial.t0, config.freeze_t0, 0.0, std::nullopt};
  if (initial.policy == NegativeLogPolicy::Strict) t0.lower = t_max * std::exp(0.5);
  specs.push_back(t0);
  for (std::size_t d = 0; d < n_sets; ++d)
    specs.push_back({"calibration_" + std::to_string(d), calibration[d], config.freeze_calibration,
                     0.0, std::nullopt});

  const ResidualFn residuals = [&](std::span<const double> p, std::span<double> r) {
    StarykhParams sp = initial;
    sp.a_starykh = p[0];
    sp.t0 = p[1];
    parallel_for(cuts.size(), [&](std::size_t c) {
      const auto& cut = cuts[c];
      const double scale = p[2 + dataset[c]];
      for (std::size_t i = 0; i < cut.size(); ++i) {
        const double model = scale * chi_imag_starykh(cut.e_axis()[i], cut.temperature(), sp);
        r[offset[c] + i] = (cut.values()[i] - model) / cut.errors()[i];
      }
    });
  };
  return least_squares(residuals, offset.back(), specs, config.options);
}

StarykhParams apply_fit(const StarykhParams& base, const FitResult& fit) {
  StarykhParams out = base;
  out.a_starykh = fit.value("A_starykh");
  out.t0 = fit.value("T0_K");
  return out;
}

}  // namespace chainqfi
