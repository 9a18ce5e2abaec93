#include "chainqfi/suscept.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chainqfi/error.hpp"
#include "chainqfi/ring_spectrum.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {
namespace {

double pade_reduced(double t) {
  const double x = 1.0 / t;
  const double num = 0.25 + x * (0.074975 + x * 0.075235);
  const double den = 1.0 + x * (0.9931 + x * (0.172135 + x * 0.757825));
  return num / (den * t);
}

void require_positive_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    raise(ErrorCode::NonPositiveTemperature, "temperature must be positive, got " + std::to_string(t));
}

}  // namespace

double reduced_susceptibility(double t_over_j, const SusceptibilityModel& model) {
  require_positive_temperature(t_over_j);
  switch (model.form) {
    case BonnerFisherForm::Pade:
      return pade_reduced(t_over_j);
    case BonnerFisherForm::FiniteRing:
      return ring_reduced_susceptibility(ring_spectrum(model.ring_sites), t_over_j);
  }
  return 0.0;
}

double chi_bonner_fisher(double t, const ChainParameters& params, const SusceptibilityModel& model) {
  require_positive_temperature(t);
  const double j = params.j_over_kb;
  const double g2 = params.g_factor * params.g_factor;
  return UnitSystem::curie_prefactor_emu_k_per_mol * g2 / j * reduced_susceptibility(t / j, model);
}

double chi_full(double t, const ChainParameters& params, const SusceptibilityModel& model) {
  const double impurity = params.impurity == ImpurityForm::Curie ? params.c0 / t : params.c0;
  return impurity + params.c1 + chi_bonner_fisher(t, params, model);
}

void SusceptibilityCurve::validate() const {
  if (chi.size() != temperatures.size() || sigma.size() != temperatures.size())
    raise(ErrorCode::ShapeMismatch, "susceptibility arrays differ in length");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    if (!(temperatures[i] > 0.0))
      raise(ErrorCode::NonPositiveTemperature, "curve temperature must be > 0");
    if (i > 0 && !(temperatures[i] > temperatures[i - 1]))
      raise(ErrorCode::AxisNotMonotone, "curve temperatures must be strictly increasing");
    if (!std::isfinite(chi[i]) || !std::isfinite(sigma[i]) || sigma[i] < 0.0)
      raise(ErrorCode::InvalidArgument, "invalid susceptibility sample at index " + std::to_string(i));
  }
}

FitResult fit_susceptibility(const SusceptibilityCurve& curve, const ChainParameters& initial,
                             const SusceptibilityFreeze& freeze, const SusceptibilityModel& model,
                             const FitOptions& options) {
  curve.validate();
  initial.validate();
  if (curve.size() < 4) raise(ErrorCode::InvalidArgument, "need at least 4 points to fit");
  for (double s : curve.sigma)
    if (!(s > 0.0)) raise(ErrorCode::InvalidArgument, "fit requires sigma > 0 for every point");

  std::vector<ParameterSpec> specs{
      {"J_over_kB", initial.j_over_kb, freeze.j, 0.0, std::nullopt},
      {"g", initial.g_factor, freeze.g, 0.0, std::nullopt},
      {"c0", initial.c0, freeze.c0, std::nullopt, std::nullopt},
      {"c1", initial.c1, freeze.c1, std::nullopt, std::nullopt},
  };

  const ResidualFn residuals = [&](std::span<const double> p, std::span<double> r) {
    ChainParameters cp = initial;
    cp.j_over_kb = p[0];
    cp.g_factor = p[1];
    cp.c0 = p[2];
    cp.c1 = p[3];
    for (std::size_t i = 0; i < curve.size(); ++i)
      r[i] = (curve.chi[i] - chi_full(curve.temperatures[i], cp, model)) / curve.sigma[i];
  };
  return least_squares(residuals, curve.size(), specs, options);
}

ChainParameters apply_fit(const ChainParameters& base, const FitResult& fit) {
  ChainParameters out = base;
  out.j_over_kb = fit.value("J_over_kB");
  out.g_factor = fit.value("g");
  out.c0 = fit.value("c0");
  out.c1 = fit.value("c1");
  return out;
}

TmaxEstimate find_tmax(std::span<const double> t, std::span<const double> chi) {
  if (t.size() != chi.size()) raise(ErrorCode::ShapeMismatch, "find_tmax: length mismatch");
  if (!strictly_increasing(t)) raise(ErrorCode::AxisNotMonotone, "find_tmax: temperatures not increasing");
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (chi[i] >= chi[i - 1] && chi[i] > chi[i + 1] && (!best || chi[i] > chi[*best])) best = i;
  }
  if (!best) raise(ErrorCode::NoInteriorMaximum, "no sign change of dchi/dT among the samples");

  const std::size_t i = *best;
  const double x0 = t[i - 1], x1 = t[i], x2 = t[i + 1];
  const double y0 = chi[i - 1], y1 = chi[i], y2 = chi[i + 1];
  // Vertex of the interpolating parabola (divided differences).
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curvature = (d12 - d01) / (x2 - x0);
  double vertex = x1;
  if (curvature < 0.0) vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
  return {vertex, 0.25 * (x2 - x0)};
}

TmaxEstimate find_tmax(const SusceptibilityCurve& curve) {
  curve.validate();
  return find_tmax(curve.temperatures, curve.chi);
}

TmaxEstimate find_tmax(const std::function<double(double)>& model, double t_lo, double t_hi,
                       double step) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || !(step > 0.0))
    raise(ErrorCode::InvalidArgument, "find_tmax: need 0 < t_lo < t_hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((t_hi - t_lo) / step + 1e-9)) + 1;
  std::vector<double> t(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = t_lo + static_cast<double>(k) * step;
    y[k] = model(t[k]);
  }
  return find_tmax(t, y);
}

double j_from_tmax(double t_max) {
  require_positive_temperature(t_max);
  return t_max / kTmaxOverJ;
}

double witness_bound(double t, double g_factor) {
  require_positive_temperature(t);
  return UnitSystem::curie_prefactor_emu_k_per_mol * g_factor * g_factor *
         ChainParameters::spin / (3.0 * t);
}

WitnessSeries witness_mwse(const SusceptibilityCurve& curve, const ChainParameters& params) {
  curve.validate();
  if (!(params.g_factor > 0.0)) raise(ErrorCode::InvalidArgument, "g factor must be positive");
  WitnessSeries out;
  out.temperatures = curve.temperatures;
  out.mw_se.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i)
    out.mw_se.push_back(curve.chi[i] / witness_bound(curve.temperatures[i], params.g_factor) - 1.0);

  for (std::size_t i = 0; i + 1 < out.mw_se.size(); ++i) {
    const double a = out.mw_se[i], b = out.mw_se[i + 1];
    if (a < 0.0 && b >= 0.0) {
      const double ta = out.temperatures[i], tb = out.temperatures[i + 1];
      out.t_se = ta + (tb - ta) * (-a) / (b - a);
      break;
    }
  }
  return out;
}

}  // namespace chainqfi
