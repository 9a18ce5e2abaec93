#include "chainqfi/synthetic.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

#include "chainqfi/csv_io.hpp"
#include "chainqfi/error.hpp"
#include "chainqfi/manifest.hpp"
#include "chainqfi/reduction.hpp"
#include "chainqfi/spinon.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {
namespace {

std::vector<double> linspace_step(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1), never exactly 0.
double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

double lattice_of(const SyntheticSpec& spec) { return spec.chain.lattice_c.value_or(spec.lattice_c); }

// Powder envelope (1/Q) int_0^Q sin^2(q c / 2) dq on the synthetic Q axis.
std::vector<double> powder_envelope(const SyntheticSpec& spec, double t) {
  const double c = lattice_of(spec);
  const auto g = forward_powder_average(
      [c](double q, double) {
        const double s = std::sin(0.5 * q * c);
        return s * s;
      },
      spec.q_axis, {0.0}, t);
  return {g.intensity().data(), g.intensity().data() + g.nq()};
}

std::string temperature_dir(double t) { return "T_" + format_double(t) + "K"; }

}  // namespace

SyntheticSpec SyntheticSpec::resolved() const {
  SyntheticSpec s = *this;
  if (s.chi_temperatures.empty()) s.chi_temperatures = linspace_step(0.5, 20.0, 0.1);
  if (s.q_axis.empty()) s.q_axis = linspace_step(0.0, 2.0, 0.05);
  if (s.e_axis.empty()) s.e_axis = linspace_step(-0.1, 1.0, 0.005);
  s.chain.validate();
  s.starykh.validate();
  if (!(lattice_of(s) > 0.0)) raise(ErrorCode::InvalidArgument, "lattice constant must be > 0");
  for (double t : s.chi_temperatures)
    if (!(t > 0.0))
      raise(ErrorCode::NonPositiveTemperature, "requested temperature " + format_double(t) + " K is not > 0");
  for (double t : s.spectrum_temperatures) {
    if (!(t > 0.0))
      raise(ErrorCode::NonPositiveTemperature, "requested temperature " + format_double(t) + " K is not > 0");
    (void)scaling_dimension(t, s.starykh);
  }
  if (!strictly_increasing(s.chi_temperatures) || !strictly_increasing(s.q_axis) ||
      !strictly_increasing(s.e_axis))
    raise(ErrorCode::AxisNotMonotone, "synthetic axes must be strictly increasing");
  if (s.q_axis.front() < 0.0) raise(ErrorCode::InvalidArgument, "Q axis must start at >= 0");
  if (!(s.q_window[0] < s.q_window[1])) raise(ErrorCode::InvalidArgument, "q window needs min < max");
  if (!(s.resolution_fwhm > 0.0) || !(s.exposure > 0.0) || s.chi_relative_sigma < 0.0 ||
      s.elastic_amplitude < 0.0 || s.background < 0.0)
    raise(ErrorCode::InvalidArgument, "synthetic scales must be non-negative (fwhm, exposure > 0)");
  return s;
}

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const double u1 = unit_open(splitmix64(key ^ (2 * index)));
  const double u2 = unit_open(splitmix64(key ^ (2 * index + 1)));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double synthetic_s1d(double q, double e, double t, const StarykhParams& params, double lattice_c) {
  const double s = std::sin(0.5 * q * lattice_c);
  // S(0) = k_B T * d chi''/d omega at 0; a tiny omega reproduces it to rounding.
  const double w = e == 0.0 ? 1e-9 * kelvin_to_mev(t) : e;
  return sqw_starykh(w, t, params) * s * s;
}

SusceptibilityCurve synthetic_susceptibility(const SyntheticSpec& spec_in) {
  const auto spec = spec_in.resolved();
  SusceptibilityCurve c;
  for (std::size_t i = 0; i < spec.chi_temperatures.size(); ++i) {
    const double t = spec.chi_temperatures[i];
    const double chi = chi_full(t, spec.chain, spec.model);
    const double sigma = spec.chi_relative_sigma * std::abs(chi);
    c.temperatures.push_back(t);
    c.chi.push_back(spec.noise ? chi + sigma * counter_normal(spec.seed, 0, i) : chi);
    c.sigma.push_back(sigma);
  }
  return c;
}

SpectrumGrid synthetic_spectrum(const SyntheticSpec& spec_in, std::size_t k) {
  const auto spec = spec_in.resolved();
  if (k >= spec.spectrum_temperatures.size())
    raise(ErrorCode::InvalidArgument, "spectrum temperature index out of range");
  const double t = spec.spectrum_temperatures[k];
  const auto envelope = powder_envelope(spec, t);
  const auto ne = static_cast<Eigen::Index>(spec.e_axis.size());
  const auto nq = static_cast<Eigen::Index>(spec.q_axis.size());
  Eigen::MatrixXd counts(ne, nq), err(ne, nq);
  for (Eigen::Index r = 0; r < ne; ++r) {
    const double e = spec.e_axis[static_cast<std::size_t>(r)];
    const double w = e == 0.0 ? 1e-9 * kelvin_to_mev(t) : e;
    const double s = sqw_starykh(w, t, spec.starykh);
    const double elastic = spec.elastic_amplitude * elastic_gaussian(e, spec.resolution_fwhm);
    for (Eigen::Index c = 0; c < nq; ++c) {
      const double mean = spec.exposure * s * envelope[static_cast<std::size_t>(c)] + elastic + spec.background;
      const double sigma = std::sqrt(std::max(mean, 1.0));
      const auto cell = static_cast<std::uint64_t>(r * nq + c);
      counts(r, c) = spec.noise ? mean + sigma * counter_normal(spec.seed, k + 1, cell) : mean;
      err(r, c) = sigma;
    }
  }
  return make_grid(spec.q_axis, spec.e_axis, std::move(counts), std::move(err), t);
}

double synthetic_calibration(const SyntheticSpec& spec_in) {
  const auto spec = spec_in.resolved();
  const double t = spec.spectrum_temperatures.empty() ? 1.0 : spec.spectrum_temperatures.front();
  const auto envelope = powder_envelope(spec, t);
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(envelope.size()));
  for (std::size_t i = 0; i < envelope.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = envelope[i];
  const auto grid = make_grid(spec.q_axis, {0.0}, row, Eigen::MatrixXd::Zero(1, row.cols()), t);
  return spec.exposure * integrate_q_window(grid, spec.q_window[0], spec.q_window[1]).values()[0];
}

SyntheticOutput generate_synthetic_dataset(const SyntheticSpec& spec_in, const std::filesystem::path& out_dir) {
  const auto spec = spec_in.resolved();
  SyntheticOutput out;
  out.chi_csv = out_dir / "chi.csv";
  write_susceptibility_csv(out.chi_csv, synthetic_susceptibility(spec));
  const double calibration = synthetic_calibration(spec);

  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  files.push_back({{"path", "chi.csv"}, {"sha256", sha256_file(out.chi_csv)}});
  for (std::size_t k = 0; k < spec.spectrum_temperatures.size(); ++k) {
    const double t = spec.spectrum_temperatures[k];
    const auto dir = out_dir / temperature_dir(t);
    const auto csv = dir / "sqe.csv";
    write_spectrum_csv(csv, synthetic_spectrum(spec, k));
    DatasetManifest m;
    m.sample = spec.sample;
    m.temperature_k = t;
    m.resolution_fwhm_mev = spec.resolution_fwhm;
    m.q_window = spec.q_window;
    m.lattice_c_a = lattice_of(spec);
    m.calibration = calibration;
    m.policies = default_policies(to_string(spec.starykh.policy));
    m.inputs.push_back({"sqe.csv", sha256_file(csv)});
    write_manifest(dir / "manifest.json", m);
    out.spectrum_csvs.push_back(csv);
    out.manifests.push_back(dir / "manifest.json");
    const std::string rel = temperature_dir(t) + "/";
    files.push_back({{"path", rel + "sqe.csv"}, {"sha256", m.inputs.front().sha256}});
    files.push_back({{"path", rel + "manifest.json"}, {"sha256", sha256_file(dir / "manifest.json")}});
  }

  nlohmann::ordered_json g;
  g["sample"] = spec.sample;
  g["seed"] = spec.seed;
  g["noise"] = spec.noise;
  g["chain"] = {{"J_over_kB", spec.chain.j_over_kb},
                {"g", spec.chain.g_factor},
                {"c0", spec.chain.c0},
                {"c1", spec.chain.c1},
                {"impurity_form", spec.chain.impurity == ImpurityForm::Curie ? "curie" : "constant"},
                {"lattice_c_A", lattice_of(spec)}};
  g["susceptibility_model"] = {
      {"form", spec.model.form == BonnerFisherForm::FiniteRing ? "finite-ring" : "pade"},
      {"ring_sites", spec.model.ring_sites}};
  g["starykh"] = {{"A_starykh", spec.starykh.a_starykh},
                  {"T0_K", spec.starykh.t0},
                  {"J_over_kB", spec.starykh.j_over_kb},
                  {"negative_log_policy", std::string(to_string(spec.starykh.policy))}};
  g["chi_temperatures_K"] = spec.chi_temperatures;
  g["chi_relative_sigma"] = spec.chi_relative_sigma;
  g["spectrum_temperatures_K"] = spec.spectrum_temperatures;
  g["q_axis_invA"] = spec.q_axis;
  g["e_axis_meV"] = spec.e_axis;
  g["q_window"] = {spec.q_window[0], spec.q_window[1]};
  g["resolution_fwhm_meV"] = spec.resolution_fwhm;
  g["exposure"] = spec.exposure;
  g["elastic_amplitude"] = spec.elastic_amplitude;
  g["background"] = spec.background;
  g["calibration"] = calibration;
  g["s1d_form"] = "S(E) * sin^2(q c / 2)";
  g["noise_model"] = "gaussian, sigma = sqrt(max(counts, 1)); chi sigma = relative * chi";
  g["outputs"] = files;
  out.generation_manifest = out_dir / "synth_manifest.json";
  write_text_file(out.generation_manifest, g.dump(2) + "\n");
  return out;
}

}  // namespace chainqfi
