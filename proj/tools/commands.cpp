#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>

#include "CLI11.hpp"
#include "json.hpp"

#include "chainqfi/csv_io.hpp"
#include "chainqfi/dynamics.hpp"
#include "chainqfi/manifest.hpp"
#include "chainqfi/parallel.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/reduction.hpp"
#include "chainqfi/spinon.hpp"
#include "chainqfi/suscept.hpp"
#include "chainqfi/synthetic.hpp"
#include "chainqfi/units.hpp"
#include "svg.hpp"

namespace chainqfi::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kLiteratureNote =
    "literature quotes J/k_B = 3.05 K for T^max = 1.95 K; the computed quotient 1.95/0.640851 is "
    "3.0428 K and is reported unrounded";

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

fs::path prepare_out(const GlobalOptions& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec || !fs::is_directory(g.out))
    raise(ErrorCode::IoError, "cannot create output directory " + g.out);
  return fs::path(g.out);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_to_json(const FitResult& f) {
  json j;
  j["method"] = f.method;
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["n_residuals"] = f.n_residuals;
  j["residual_norm"] = number_or_null(f.residual_norm);
  j["reduced_chi2"] = number_or_null(f.reduced_chi2);
  j["parameters"] = json::array();
  for (std::size_t i = 0; i < f.names.size(); ++i)
    j["parameters"].push_back({{"name", f.names[i]},
                               {"value", number_or_null(f.values[i])},
                               {"standard_error", number_or_null(f.standard_error(f.names[i]))},
                               {"frozen", static_cast<bool>(f.frozen[i])}});
  j["covariance"] = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(number_or_null(f.covariance(r, c)));
    j["covariance"].push_back(row);
  }
  return j;
}

json input_entry(const fs::path& p) { return {{"path", p.string()}, {"sha256", sha256_file(p)}}; }

void write_json(const fs::path& p, const json& j) { write_text_file(p, j.dump(2) + "\n"); }

void write_svg(const fs::path& p, const SvgPlot& plot, const GlobalOptions& g) {
  write_text_file(p, plot.render(g.deterministic));
}

std::vector<double> geometric(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

std::vector<double> linear(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

json tmax_json(const std::optional<TmaxEstimate>& t) {
  if (!t) return nullptr;
  return {{"t_max_K", t->t_max}, {"uncertainty_K", t->uncertainty}, {"j_from_tmax_K", j_from_tmax(t->t_max)}};
}

StarykhParams starykh_from(const GlobalOptions& g, double j, double a, std::optional<double> t0) {
  auto p = StarykhParams::standard(j, parse_negative_log_policy(g.policy));
  p.a_starykh = a;
  if (t0) p.t0 = *t0;
  p.validate();
  return p;
}

struct Dataset {
  fs::path dir;
  DatasetManifest manifest;
  json inputs;
  EnergyCut raw_cut;  // Q-integrated counts
  std::optional<ElasticFit> elastic;
  EnergyCut chi;      // chi'' after elastic subtraction and calibration
};

Dataset load_dataset(const fs::path& dir, const std::vector<double>& q_window, bool elastic) {
  const auto mpath = dir / "manifest.json";
  auto m = read_manifest(mpath);
  verify_inputs(m, dir);
  const auto grid = read_spectrum_csv(dir / m.inputs.front().path, m);
  const double qlo = q_window.empty() ? m.q_window[0] : q_window[0];
  const double qhi = q_window.empty() ? m.q_window[1] : q_window[1];
  auto cut = integrate_q_window(grid, qlo, qhi);
  std::optional<ElasticFit> fit;
  EnergyCut clean = cut;
  if (elastic) {
    auto sub = subtract_elastic_line(cut, m.resolution_fwhm_mev);
    fit = sub.fit;
    clean = std::move(sub.cut);
  }
  json inputs = json::array();
  inputs.push_back(input_entry(mpath));
  for (const auto& in : m.inputs) inputs.push_back(input_entry(dir / in.path));
  auto chi = cut_to_chi_imag(clean, m.calibration);
  return {dir, std::move(m), std::move(inputs), std::move(cut), fit, std::move(chi)};
}

// Positive-energy part of a chi'' cut up to omega_max with usable errors.
EnergyCut fit_window(const EnergyCut& c, double omega_max) {
  std::vector<double> e, v, s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.e_axis()[i] <= 0.0 || c.e_axis()[i] > omega_max || !(c.errors()[i] > 0.0)) continue;
    e.push_back(c.e_axis()[i]);
    v.push_back(c.values()[i]);
    s.push_back(c.errors()[i]);
  }
  return make_cut(std::move(e), std::move(v), std::move(s), c.temperature());
}

void write_qfi_outputs(const fs::path& out, const GlobalOptions& g, const std::vector<QfiPoint>& points,
                       const std::optional<ScalingFit>& scaling) {
  SvgPlot plot("Quantum Fisher information scaling", "T (K)", "F_Q");
  plot.log_x();
  plot.log_y();
  Markers m;
  m.label = "F_Q";
  for (const auto& p : points) {
    m.x.push_back(p.temperature);
    m.y.push_back(p.f_q);
    m.yerr.push_back(p.quadrature_error_estimate);
  }
  plot.add(m);
  if (scaling) {
    Series fit;
    fit.label = "power-law fit";
    fit.color = "#d62728";
    const double lo = points.front().temperature, hi = points.back().temperature;
    fit.x = geometric(lo, hi, 50);
    for (double t : fit.x) fit.y.push_back(scaling->amplitude * std::pow(t, scaling->slope));
    plot.add(fit);
    char buf[96];
    std::snprintf(buf, sizeof buf, "Delta_Q/z = %.4f", scaling->delta_q_over_z);
    plot.add_note(buf);
    std::snprintf(buf, sizeof buf, "z = %.3g", scaling->z);
    plot.add_note(buf);
  }
  write_svg(out / "qfi_scaling.svg", plot, g);
}

json scaling_json(const ScalingFit& s) {
  return {{"delta_q_over_z", s.delta_q_over_z},
          {"delta_q", s.delta_q},
          {"z", s.z},
          {"amplitude", s.amplitude},
          {"slope", s.slope},
          {"slope_standard_error", std::sqrt(std::max(0.0, s.covariance(1, 1)))},
          {"intercept", s.intercept},
          {"r_squared", s.r_squared}};
}

json qfi_point_json(const QfiResult& r) {
  return {{"T_K", r.point.temperature},
          {"F_Q", r.point.f_q},
          {"err", r.point.quadrature_error_estimate},
          {"clipped_bins", r.diagnostics.clipped_bins},
          {"samples_used", r.diagnostics.samples_used},
          {"tail_fraction", r.diagnostics.tail_fraction},
          {"truncation_warning", r.diagnostics.truncation_warning}};
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (category_of(code)) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Policy: return 4;
  }
  return 3;
}

void cmd_fit_susceptibility(const GlobalOptions& g, const FitSusceptibilityOptions& o) {
  const auto curve = read_susceptibility_csv(o.chi);
  const auto out = prepare_out(g);

  ChainParameters init;
  init.j_over_kb = o.j;
  init.g_factor = o.g;
  init.c0 = o.c0;
  init.c1 = o.c1;
  if (o.impurity == "curie") init.impurity = ImpurityForm::Curie;
  SusceptibilityModel model;
  if (o.model == "pade") model.form = BonnerFisherForm::Pade;
  SusceptibilityFreeze freeze;
  freeze.c1 = !o.fit_c1;
  for (const auto& f : o.freeze) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) raise(ErrorCode::ConfigError, "--freeze expects name=value, got '" + f + "'");
    const std::string name = f.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(f.substr(eq + 1), &used);
      if (used != f.size() - eq - 1) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      raise(ErrorCode::ConfigError, "--freeze value is not a number in '" + f + "'");
    }
    if (name == "J" || name == "J_over_kB") init.j_over_kb = value, freeze.j = true;
    else if (name == "g") init.g_factor = value, freeze.g = true;
    else if (name == "c0") init.c0 = value, freeze.c0 = true;
    else if (name == "c1") init.c1 = value, freeze.c1 = true;
    else raise(ErrorCode::ConfigError, "--freeze: unknown parameter '" + name + "' (J, g, c0, c1)");
  }

  const auto fit = fit_susceptibility(curve, init, freeze, model);
  const auto fitted = apply_fit(init, fit);

  std::optional<TmaxEstimate> tmax_data;
  try {
    tmax_data = find_tmax(curve);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoInteriorMaximum) throw;
  }
  const double j = fitted.j_over_kb;
  const auto tmax_model = find_tmax([&](double t) { return chi_bonner_fisher(t, fitted, model); }, 0.3 * j,
                                    1.2 * j, 1e-3 * j);

  json report;
  report["command"] = "fit-susceptibility";
  report["inputs"] = json::array({input_entry(o.chi)});
  report["model"] = {{"form", model.form == BonnerFisherForm::Pade ? "pade" : "finite-ring"},
                     {"ring_sites", model.ring_sites},
                     {"impurity_form", o.impurity}};
  report["fit"] = fit_to_json(fit);
  report["J_over_kB"] = fitted.j_over_kb;
  report["g"] = fitted.g_factor;
  report["c0"] = fitted.c0;
  report["c1"] = fitted.c1;
  report["tmax_over_j_constant"] = kTmaxOverJ;
  report["tmax_data"] = tmax_json(tmax_data);
  report["tmax_model"] = tmax_json(tmax_model);
  report["j_from_tmax_note"] = kLiteratureNote;

  SvgPlot plot("Static susceptibility", "T (K)", "chi (emu/mol)");
  Markers data;
  data.x = curve.temperatures;
  data.y = curve.chi;
  data.yerr = curve.sigma;
  data.label = "data";
  plot.add(data);
  Series line;
  line.label = "chain model fit";
  line.color = "#d62728";
  line.x = linear(curve.temperatures.front(), curve.temperatures.back(), 400);
  json model_curve = json::array();
  for (double t : line.x) {
    line.y.push_back(chi_full(t, fitted, model));
    model_curve.push_back({t, line.y.back()});
  }
  plot.add(line);
  plot.add_vline(tmax_model.t_max, "T^max");
  char buf[96];
  std::snprintf(buf, sizeof buf, "J/k_B = %.4f K", fitted.j_over_kb);
  plot.add_note(buf);
  std::snprintf(buf, sizeof buf, "g = %.4f", fitted.g_factor);
  plot.add_note(buf);
  std::snprintf(buf, sizeof buf, "T^max = %.4f K", tmax_model.t_max);
  plot.add_note(buf);
  report["model_curve"] = model_curve;

  write_json(out / "fit_report.json", report);
  write_svg(out / "chi_fit.svg", plot, g);
}

void cmd_witness(const GlobalOptions& g, const WitnessOptions& o) {
  const auto curve = read_susceptibility_csv(o.chi);
  const auto out = prepare_out(g);
  ChainParameters p;
  p.g_factor = o.g;
  const auto w = witness_mwse(curve, p);

  std::string csv = "T_K,MW_SE\n";
  for (std::size_t i = 0; i < w.temperatures.size(); ++i)
    csv += format_double(w.temperatures[i]) + "," + format_double(w.mw_se[i]) + "\n";
  write_text_file(out / "witness.csv", csv);

  json report;
  report["command"] = "witness";
  report["inputs"] = json::array({input_entry(o.chi)});
  report["g"] = o.g;
  report["spin"] = ChainParameters::spin;
  report["t_se_K"] = w.t_se ? json(*w.t_se) : json(nullptr);
  write_json(out / "witness_report.json", report);

  SvgPlot plot("Entanglement witness", "T (K)", "MW_SE");
  Markers m;
  m.x = w.temperatures;
  m.y = w.mw_se;
  m.label = "MW_SE";
  plot.add(m);
  Series zero;
  zero.x = {w.temperatures.front(), w.temperatures.back()};
  zero.y = {0.0, 0.0};
  zero.color = "#888888";
  zero.dashed = true;
  plot.add(zero);
  if (w.t_se) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "T_SE = %.3f K", *w.t_se);
    plot.add_vline(*w.t_se, buf, "#d62728");
    plot.add_note(buf);
  } else {
    plot.add_note("no sign change");
  }
  write_svg(out / "witness.svg", plot, g);
}

void cmd_qfi(const GlobalOptions& g, const QfiOptions& o) {
  if (o.model == !o.datasets.empty())
    raise(ErrorCode::ConfigError, "qfi needs either --model or at least one --dataset (not both)");
  if (!o.q_window.empty() && (o.q_window.size() != 2 || !(o.q_window[0] < o.q_window[1])))
    raise(ErrorCode::ConfigError, "--q-window expects two values MIN MAX with MIN < MAX");
  auto params = starykh_from(g, o.j, o.a, o.t0);
  const double omega_max = g.omega_max.value_or(default_omega_max(o.j));
  if (!(omega_max > 0.0)) raise(ErrorCode::ConfigError, "--omega-max must be > 0");
  const auto out = prepare_out(g);

  json report;
  report["command"] = "qfi";
  report["mode"] = o.model ? "model" : "data";
  report["policy"] = std::string(to_string(params.policy));
  report["omega_max_meV"] = omega_max;
  report["z"] = g.z;
  report["initial"] = {{"A_starykh", params.a_starykh}, {"T0_K", params.t0}, {"J_over_kB", params.j_over_kb}};

  std::vector<Dataset> sets;
  std::vector<QfiResult> results;
  std::optional<FitResult> fit;
  std::vector<double> temps;

  if (o.model) {
    temps = o.temperatures;
    std::sort(temps.begin(), temps.end());
    for (double t : temps) (void)scaling_dimension(t, params);  // fail before any output
    results.resize(temps.size());
    parallel_for(temps.size(), [&](std::size_t i) { results[i] = compute_qfi(params, temps[i], omega_max); });
    report["inputs"] = json::array();
  } else {
    std::vector<std::optional<Dataset>> loaded(o.datasets.size());
    parallel_for(o.datasets.size(),
                 [&](std::size_t i) { loaded[i] = load_dataset(o.datasets[i], o.q_window, !o.no_elastic); });
    for (auto& d : loaded) sets.push_back(std::move(*d));
    std::sort(sets.begin(), sets.end(),
              [](const Dataset& a, const Dataset& b) { return a.chi.temperature() < b.chi.temperature(); });
    for (std::size_t i = 1; i < sets.size(); ++i)
      if (sets[i].chi.temperature() == sets[i - 1].chi.temperature())
        raise(ErrorCode::DuplicateAbscissa, "two datasets share T = " + format_double(sets[i].chi.temperature()) + " K");
    for (const auto& d : sets) temps.push_back(d.chi.temperature());
    json inputs = json::array();
    json elastic = json::array();
    for (const auto& d : sets) {
      for (const auto& in : d.inputs) inputs.push_back(in);
      json e = {{"T_K", d.chi.temperature()}, {"calibration", d.manifest.calibration}};
      if (d.elastic)
        e["elastic_fit"] = {{"amplitude", d.elastic->amplitude},
                            {"constant", d.elastic->constant},
                            {"fwhm_meV", d.elastic->fwhm},
                            {"window_points", d.elastic->window_points},
                            {"background_points", d.elastic->background_points},
                            {"model", "gaussian+constant, fwhm fixed to resolution"}};
      else
        e["elastic_fit"] = nullptr;
      elastic.push_back(e);
    }
    report["inputs"] = inputs;
    report["datasets"] = elastic;
    if (o.source == "data") {
      results.resize(sets.size());
      parallel_for(sets.size(), [&](std::size_t i) { results[i] = compute_qfi(sets[i].chi, omega_max); });
    }
  }

  auto scaling_stage = [&]() {
    std::vector<QfiPoint> points;
    json pts = json::array();
    for (const auto& r : results) {
      points.push_back(r.point);
      pts.push_back(qfi_point_json(r));
    }
    report["qfi_points"] = pts;
    write_qfi_points_csv(out / "qfi_points.csv", points);
    std::optional<ScalingFit> scaling;
    if (points.size() >= 3) {
      try {
        scaling = fit_scaling(points, g.z);
      } catch (const Error&) {
        report["scaling"] = nullptr;
        write_json(out / "fit_report.json", report);
        throw;
      }
      report["scaling"] = scaling_json(*scaling);
    } else {
      report["scaling"] = nullptr;
      report["scaling_note"] = "scaling fit needs at least 3 temperatures";
    }
    write_qfi_outputs(out, g, points, scaling);
  };

  if (!results.empty()) scaling_stage();

  StarykhParams shown = params;
  if (!o.model && !o.no_fit) {
    std::vector<EnergyCut> cuts;
    for (const auto& d : sets) cuts.push_back(fit_window(d.chi, omega_max));
    StarykhFitConfig cfg;
    cfg.freeze_t0 = !o.fit_t0;
    fit = fit_starykh(cuts, params, cfg);
    shown = apply_fit(params, *fit);
    report["starykh_fit"] = fit_to_json(*fit);
  }
  report["model_parameters"] = {{"A_starykh", shown.a_starykh}, {"T0_K", shown.t0}, {"J_over_kB", shown.j_over_kb}};

  if (results.empty()) {  // model-derived F_Q from the (fitted) line shape
    results.resize(temps.size());
    parallel_for(temps.size(), [&](std::size_t i) { results[i] = compute_qfi(shown, temps[i], omega_max); });
    scaling_stage();
  }

  // chi'' panel: data, model and the tanh-weighted area whose integral is F_Q.
  SvgPlot plot("Dynamic susceptibility", "E (meV)", "chi'' (arb. units)");
  plot.x_range(0.0, omega_max);
  std::string csv = "T_K,E_meV,chi_imag,chi_imag_err,model,integrand\n";
  for (std::size_t k = 0; k < temps.size(); ++k) {
    const double t = temps[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    const std::string tl = format_double(t) + " K";
    std::vector<double> e, v, s;
    if (o.model) {
      e = linear(0.0, omega_max, 201);
      for (double w : e) v.push_back(chi_imag_starykh(w, t, params));
      s.assign(e.size(), 0.0);
    } else {
      const auto& c = sets[k].chi;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.e_axis()[i] < 0.0 || c.e_axis()[i] > omega_max) continue;
        e.push_back(c.e_axis()[i]);
        v.push_back(c.values()[i]);
        s.push_back(c.errors()[i]);
      }
    }
    Area area;
    area.color = color;
    area.opacity = 0.2;
    Series model_line;
    model_line.color = color;
    model_line.label = "model " + tl;
    for (std::size_t i = 0; i < e.size(); ++i) {
      double m = 0.0;
      try {
        m = chi_imag_starykh(e[i], t, shown);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::CutoffDomainError) throw;
        m = std::nan("");
      }
      const double integrand = qfi_integrand(e[i], t, std::max(0.0, v[i]));
      area.x.push_back(e[i]);
      area.y.push_back(integrand);
      model_line.x.push_back(e[i]);
      model_line.y.push_back(m);
      csv += format_double(t) + "," + format_double(e[i]) + "," + format_double(v[i]) + "," + format_double(s[i]) +
             "," + (std::isfinite(m) ? format_double(m) : std::string("nan")) + "," + format_double(integrand) + "\n";
    }
    if (!o.model) {
      Markers mk;
      mk.x = e;
      mk.y = v;
      mk.yerr = s;
      mk.color = color;
      mk.label = "data " + tl;
      plot.add(mk);
    }
    plot.add(area);
    plot.add(model_line);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "A = %.5g", shown.a_starykh);
  plot.add_note(buf);
  std::snprintf(buf, sizeof buf, "T0 = %.4g K", shown.t0);
  plot.add_note(buf);
  plot.add_note("shaded: tanh(E/2k_BT) chi''");
  write_text_file(out / "chi_imag.csv", csv);
  write_svg(out / "chi_imag.svg", plot, g);
  write_json(out / "fit_report.json", report);
}

void cmd_spinon(const GlobalOptions& g, const SpinonOptions& o) {
  const fs::path dir = o.dataset;
  const auto m = read_manifest(dir / "manifest.json");
  verify_inputs(m, dir);
  const std::optional<double> c = o.lattice_c ? o.lattice_c : m.lattice_c_a;
  if (!c)
    raise(ErrorCode::ConfigError,
          "lattice constant missing: set lattice_c_A in " + (dir / "manifest.json").string() + " or pass --lattice-c");
  if (!(*c > 0.0)) raise(ErrorCode::ConfigError, "lattice constant must be > 0");
  const auto grid = read_spectrum_csv(dir / m.inputs.front().path, m);
  const auto out = prepare_out(g);

  SpectrumGrid s1d = [&] {
    try {
      return powder_to_1d(grid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GridTooCoarse) throw;
      throw Error(e.code(), std::string(e.what()) + "; remeasure or regrid with at least 3 Q columns");
    }
  }();
  const double j_mev = kelvin_to_mev(o.j);

  std::string csv = "q_invA,E_meV,s1d,error\n";
  for (std::size_t r = 0; r < s1d.ne(); ++r)
    for (std::size_t k = 0; k < s1d.nq(); ++k)
      csv += format_double(s1d.q_axis()[k]) + "," + format_double(s1d.e_axis()[r]) + "," +
             format_double(s1d.intensity()(r, k)) + "," + format_double(s1d.errors()(r, k)) + "\n";
  write_text_file(out / "s1d.csv", csv);

  const auto qs = linear(s1d.q_axis().front(), s1d.q_axis().back(), 201);
  const auto bounds = continuum_bounds(qs, j_mev, *c);
  std::string bcsv = "q_invA,E_lower_meV,E_upper_meV\n";
  for (std::size_t i = 0; i < qs.size(); ++i)
    bcsv += format_double(qs[i]) + "," + format_double(bounds.lower[i]) + "," + format_double(bounds.upper[i]) + "\n";
  write_text_file(out / "spinon_bounds.csv", bcsv);

  const auto at_pi = two_spinon_bounds(kPi / *c, j_mev, *c);
  const auto at_half = two_spinon_bounds(kPi / (2.0 * *c), j_mev, *c);
  json report;
  report["command"] = "spinon";
  report["inputs"] = json::array({input_entry(dir / "manifest.json"), input_entry(dir / m.inputs.front().path)});
  report["lattice_c_A"] = *c;
  report["J_over_kB"] = o.j;
  report["J_meV"] = j_mev;
  report["upper_at_q_pi_over_c_meV"] = at_pi.upper;
  report["lower_at_q_pi_over_2c_meV"] = at_half.lower;
  write_json(out / "spinon_report.json", report);

  SvgPlot plot("Powder-inverted chain spectrum", "q (1/A)", "E (meV)");
  std::vector<Cell> cells;
  const auto& q = s1d.q_axis();
  const auto& e = s1d.e_axis();
  auto edge = [](const std::vector<double>& a, std::size_t i, bool upper) {
    if (upper) return i + 1 < a.size() ? 0.5 * (a[i] + a[i + 1]) : a[i] + 0.5 * (a[i] - a[i - 1]);
    return i > 0 ? 0.5 * (a[i - 1] + a[i]) : a[i] - 0.5 * (a[i + 1] - a[i]);
  };
  for (std::size_t r = 0; r < e.size(); ++r)
    for (std::size_t k = 0; k < q.size(); ++k)
      cells.push_back({edge(q, k, false), edge(q, k, true), edge(e, r, false), edge(e, r, true), s1d.intensity()(r, k)});
  plot.add_cells(std::move(cells));
  plot.x_range(q.front(), q.back());
  plot.y_range(std::max(0.0, e.front()), e.back());
  Series lo, hi;
  lo.x = hi.x = qs;
  lo.y = bounds.lower;
  hi.y = bounds.upper;
  lo.color = "#d62728";
  lo.label = "E_l";
  hi.color = "#000000";
  hi.label = "E_u";
  lo.width = hi.width = 2.0;
  plot.add(lo);
  plot.add(hi);
  char buf[96];
  std::snprintf(buf, sizeof buf, "E_u = pi J = %.4f meV", at_pi.upper);
  plot.add_vline(kPi / *c, buf, "#ffffff");
  plot.add_note(buf);
  write_svg(out / "spinon_overlay.svg", plot, g);
}

void cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  SyntheticSpec spec;
  spec.chain.j_over_kb = o.j;
  spec.chain.g_factor = o.g;
  spec.chain.c0 = o.c0;
  spec.chain.c1 = o.c1;
  spec.chain.lattice_c = o.lattice_c;
  spec.starykh = starykh_from(g, o.j, o.a, o.t0);
  spec.spectrum_temperatures = o.temperatures;
  spec.chi_relative_sigma = o.chi_sigma;
  spec.exposure = o.exposure;
  spec.elastic_amplitude = o.elastic;
  spec.background = o.background;
  spec.resolution_fwhm = o.resolution;
  spec.noise = !o.no_noise;
  spec.seed = o.seed;
  const auto resolved = spec.resolved();  // validate before touching the disk
  generate_synthetic_dataset(resolved, prepare_out(g));
}

int run(int argc, char** argv) {
  CLI::App app{"Spin-chain susceptibility, entanglement witness and quantum Fisher information pipeline", "chainqfi"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  std::optional<double> omega_max;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "Omit timestamps so reruns are byte-identical");
  app.add_option("--policy", g.policy, "Handling of ln(T0/T) <= 1/2: strict or absolute-value")
      ->check(CLI::IsMember({"strict", "absolute-value", "absolute_value"}))
      ->capture_default_str();
  app.add_option("--omega-max", omega_max, "Upper QFI integration limit in meV (default pi J)")
      ->check(CLI::PositiveNumber);
  app.add_option("--z", g.z, "Dynamic exponent for Delta_Q = z * (Delta_Q/z)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  FitSusceptibilityOptions fs_opt;
  auto* fsc = app.add_subcommand("fit-susceptibility", "Fit the chain susceptibility model to chi.csv");
  fsc->add_option("--chi", fs_opt.chi, "Susceptibility CSV (T_K,chi_emu_per_mol,sigma)")->required();
  fsc->add_option("--j", fs_opt.j, "Initial J/k_B in K")->check(CLI::PositiveNumber)->capture_default_str();
  fsc->add_option("--g", fs_opt.g, "Initial g factor")->check(CLI::PositiveNumber)->capture_default_str();
  fsc->add_option("--c0", fs_opt.c0, "Initial impurity term")->capture_default_str();
  fsc->add_option("--c1", fs_opt.c1, "Initial diamagnetic constant (emu/mol)")->capture_default_str();
  fsc->add_option("--freeze", fs_opt.freeze, "Freeze a parameter: J=3.1, g=2.1, c0=..., c1=...");
  fsc->add_flag("--fit-c1", fs_opt.fit_c1, "Fit c1 as well (it is degenerate with a constant c0)");
  fsc->add_option("--impurity", fs_opt.impurity, "Impurity term form: constant or curie")
      ->check(CLI::IsMember({"constant", "curie"}))
      ->capture_default_str();
  fsc->add_option("--model", fs_opt.model, "Chain susceptibility form: ring or pade")
      ->check(CLI::IsMember({"ring", "pade"}))
      ->capture_default_str();

  WitnessOptions w_opt;
  auto* wsc = app.add_subcommand("witness", "Susceptibility entanglement witness and T_SE");
  wsc->add_option("--chi", w_opt.chi, "Susceptibility CSV")->required();
  wsc->add_option("--g", w_opt.g, "g factor")->check(CLI::PositiveNumber)->capture_default_str();

  QfiOptions q_opt;
  auto* qsc = app.add_subcommand("qfi", "Quantum Fisher information from spectra or from the line-shape model");
  qsc->add_option("--dataset", q_opt.datasets, "Directory holding manifest.json and its spectrum CSV (repeatable)");
  qsc->add_flag("--model", q_opt.model, "Evaluate the line-shape model instead of data");
  qsc->add_option("--temperatures", q_opt.temperatures, "Model temperatures in K")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  qsc->add_option("--j", q_opt.j, "J/k_B in K")->check(CLI::PositiveNumber)->capture_default_str();
  qsc->add_option("--a", q_opt.a, "Line-shape amplitude A")->check(CLI::PositiveNumber)->capture_default_str();
  qsc->add_option("--t0", q_opt.t0, "Cutoff T0 in K (default pi J / 8)")->check(CLI::PositiveNumber);
  qsc->add_flag("--no-fit", q_opt.no_fit, "Skip the joint line-shape fit");
  qsc->add_flag("--fit-t0", q_opt.fit_t0, "Let T0 float in the joint fit");
  qsc->add_option("--qfi-source", q_opt.source, "Integrate tabulated data or the fitted model")
      ->check(CLI::IsMember({"data", "model"}))
      ->capture_default_str();
  qsc->add_flag("--no-elastic", q_opt.no_elastic, "Skip elastic-line subtraction");
  qsc->add_option("--q-window", q_opt.q_window, "Q integration window MIN MAX in 1/A (default from manifest)")
      ->expected(2);

  SpinonOptions s_opt;
  auto* ssc = app.add_subcommand("spinon", "Powder-to-1D inversion with two-spinon continuum bounds");
  ssc->add_option("--dataset", s_opt.dataset, "Directory holding manifest.json and its spectrum CSV")->required();
  ssc->add_option("--lattice-c", s_opt.lattice_c, "Chain lattice constant in A (overrides the manifest)")
      ->check(CLI::PositiveNumber);
  ssc->add_option("--j", s_opt.j, "J/k_B in K")->check(CLI::PositiveNumber)->capture_default_str();

  SynthOptions y_opt;
  auto* ysc = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  ysc->add_option("--seed", y_opt.seed, "Noise seed")->capture_default_str();
  ysc->add_flag("--no-noise", y_opt.no_noise, "Write noiseless data");
  ysc->add_option("--j", y_opt.j, "J/k_B in K")->check(CLI::PositiveNumber)->capture_default_str();
  ysc->add_option("--g", y_opt.g, "g factor")->check(CLI::PositiveNumber)->capture_default_str();
  ysc->add_option("--c0", y_opt.c0, "Impurity constant")->capture_default_str();
  ysc->add_option("--c1", y_opt.c1, "Diamagnetic constant (emu/mol)")->capture_default_str();
  ysc->add_option("--a", y_opt.a, "Line-shape amplitude A")->check(CLI::PositiveNumber)->capture_default_str();
  ysc->add_option("--t0", y_opt.t0, "Cutoff T0 in K (default pi J / 8)")->check(CLI::PositiveNumber);
  ysc->add_option("--temperatures", y_opt.temperatures, "Spectrum temperatures in K")
      ->delimiter(',')
      ->capture_default_str();
  ysc->add_option("--chi-sigma", y_opt.chi_sigma, "Relative susceptibility noise")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ysc->add_option("--lattice-c", y_opt.lattice_c, "Chain lattice constant in A")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ysc->add_option("--exposure", y_opt.exposure, "Counts per unit S")->check(CLI::PositiveNumber)->capture_default_str();
  ysc->add_option("--elastic", y_opt.elastic, "Elastic peak counts")->check(CLI::NonNegativeNumber)->capture_default_str();
  ysc->add_option("--background", y_opt.background, "Flat background counts")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ysc->add_option("--resolution", y_opt.resolution, "Elastic FWHM in meV")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  for (auto* sub : {fsc, wsc, qsc, ssc, ysc})
    sub->footer(
        "Global options (accepted before or after the subcommand):\n"
        "  --out DIR              output directory [out]\n"
        "  --deterministic        omit SVG timestamps so reruns are byte-identical\n"
        "  --policy POLICY        strict | absolute-value handling of ln(T0/T) [strict]\n"
        "  --omega-max MEV        upper QFI integration limit [pi J]\n"
        "  --z FLOAT              dynamic exponent [1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    json err = {{"error", "ConfigError"}, {"category", "input"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  g.omega_max = omega_max;

  try {
    if (fsc->parsed()) cmd_fit_susceptibility(g, fs_opt);
    else if (wsc->parsed()) cmd_witness(g, w_opt);
    else if (qsc->parsed()) cmd_qfi(g, q_opt);
    else if (ssc->parsed()) cmd_spinon(g, s_opt);
    else if (ysc->parsed()) cmd_synth(g, y_opt);
  } catch (const Error& e) {
    static const char* names[] = {"input", "numerical", "policy"};
    json err = {{"error", std::string(to_string(e.code()))},
                {"category", names[static_cast<int>(category_of(e.code()))]},
                {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    json err = {{"error", "Internal"}, {"category", "numerical"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace chainqfi::cli
