// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chainqfi/csv_io.hpp"
#include "chainqfi/dynamics.hpp"
#include "chainqfi/error.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/specfun.hpp"
#include "chainqfi/spinon.hpp"
#include "chainqfi/suscept.hpp"
#include "chainqfi/synthetic.hpp"
#include "chainqfi/units.hpp"
#include "oracles.hpp"

using namespace chainqfi;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs `body`; an escaping exception counts as a failure of criterion `id`.
void criterion(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

void c1_johnston() {
  const auto t0 = std::chrono::steady_clock::now();
  ChainParameters p;
  p.j_over_kb = 1.0;
  const auto est = find_tmax([&](double t) { return chi_bonner_fisher(t, p); }, 0.3, 1.2, 1e-3);
  const double dt = seconds_since(t0);
  report(1, "Johnston relation", std::abs(est.t_max - 0.6408) <= 0.001 && dt < 1.0,
         fmt("T_max/J = %.5f (target 0.6408 +- 0.001), %.3f s", est.t_max, dt));
}

void c2_j_from_tmax() {
  const double j = j_from_tmax(1.95);
  report(2, "J from T_max", std::abs(j - 3.043) <= 0.001,
         fmt("j_from_tmax(1.95 K) = %.4f K; literature rounds this to 3.05 K (difference %.4f K)", j, 3.05 - j));
}

void c3_fit_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int within = 0, total = 0;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SyntheticSpec spec;
    spec.seed = 1000 + trial;
    spec.chi_relative_sigma = 0.01;
    const auto curve = synthetic_susceptibility(spec);
    ChainParameters init;
    init.j_over_kb = 3.0;
    init.g_factor = 2.0;
    const auto fit = fit_susceptibility(curve, init);
    const double z = std::abs(fit.value("J_over_kB") - 3.1) / fit.standard_error("J_over_kB");
    worst = std::max(worst, z);
    within += z <= 3.0;
    ++total;
  }
  const double dt = seconds_since(t0);
  report(3, "susceptibility fit recovery", within >= 93 && dt < 30.0,
         fmt("%.0f/%.0f trials within 3 sigma (need 93), max |dJ|/sigma = %.2f, %.1f s", within, total, worst, dt));
}

void c4_witness() {
  ChainParameters p;
  SusceptibilityCurve curve;
  for (int i = 0; i <= 1950; ++i) {
    const double t = 0.5 + 0.01 * i;
    curve.temperatures.push_back(t);
    curve.chi.push_back(chi_bonner_fisher(t, p));
    curve.sigma.push_back(0.0);
  }
  const auto w = witness_mwse(curve, p);
  const double root =
      oracle::bisect([&](double t) { return chi_bonner_fisher(t, p) / witness_bound(t, p.g_factor) - 1.0; }, 2.0, 10.0);
  const bool ok = w.t_se && std::abs(*w.t_se - root) <= 0.02 && std::abs(root - 4.43) <= 0.02;
  report(4, "witness T_SE", ok,
         fmt("T_SE = %.4f K, bisection oracle %.4f K (target 4.43 +- 0.02)", w.t_se.value_or(std::nan("")), root));
}

void c5_specfun() {
  oracle::rng(5);
  double worst_reflection = 0.0, worst_recurrence = 0.0;
  for (int i = 0; i < 100; ++i) {
    Complex z(oracle::uniform(-4.5, 4.5), oracle::uniform(-4.0, 4.0));
    if (std::abs(z.imag()) < 0.05) z.imag(0.05);  // keep clear of the poles
    const Complex refl = std::exp(log_gamma_complex(z) + log_gamma_complex(1.0 - z));
    const Complex expect = kPi / std::sin(kPi * z);
    worst_reflection = std::max(worst_reflection, std::abs(refl - expect) / std::abs(expect));
    const Complex ratio = std::exp(log_gamma_complex(z + 1.0) - log_gamma_complex(z));
    worst_recurrence = std::max(worst_recurrence, std::abs(ratio - z) / std::abs(z));
  }
  const double gi = std::exp(log_gamma_complex(Complex(0.0, 1.0)).real());
  const double gi_exact = std::sqrt(kPi / std::sinh(kPi));
  const double gi_err = std::abs(gi - gi_exact) / gi_exact;
  report(5, "special functions", worst_reflection < 1e-10 && worst_recurrence < 1e-10 && gi_err < 1e-10,
         fmt("max rel err: reflection %.1e, recurrence %.1e, |Gamma(i)| %.1e", worst_reflection, worst_recurrence,
             gi_err));
}

void c6_detailed_balance() {
  oracle::rng(6);
  const auto p = StarykhParams::standard(3.1);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double t = oracle::uniform(0.02, 0.7);
    const double w = oracle::uniform(0.01, 15.0) * kelvin_to_mev(t);
    const double ratio = sqw_starykh(-w, t, p) / sqw_starykh(w, t, p);
    const double expect = std::exp(-w / kelvin_to_mev(t));
    worst = std::max(worst, std::abs(ratio - expect) / expect);
  }
  report(6, "detailed balance", worst < 1e-10, fmt("max rel err %.1e over 50 (omega, T) points", worst));
}

EnergyCut tabulate(const std::function<double(double)>& f, double t, double hi, int n) {
  std::vector<double> e(n + 1), v(n + 1), s(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    e[i] = i == n ? hi : hi * i / n;
    v[i] = f(e[i]);
  }
  return make_cut(e, v, s, t);
}

double log_cosh(double x) { return std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::log(2.0); }

void c7_qfi() {
  const double wmax = default_omega_max(3.1);
  double worst = 0.0;
  for (double t : {0.04, 0.5, 3.0}) {
    const double a = 0.2, b = 0.6, k2 = 2.0 * kelvin_to_mev(t);
    const double exact = 4.0 / kPi * k2 * (log_cosh(b / k2) - log_cosh(a / k2));
    const auto box = [&](double w) { return w >= a && w <= b ? 1.0 : 0.0; };
    worst = std::max(worst, std::abs(compute_qfi(box, t, wmax).point.f_q / exact - 1.0));
    const double full = 4.0 / kPi * k2 * log_cosh(wmax / k2);
    const auto one = [](double) { return 1.0; };
    worst = std::max(worst, std::abs(compute_qfi(tabulate(one, t, wmax, 4000), wmax).point.f_q / full - 1.0));
  }
  const double w0 = 0.3, sigma = 0.005, weight = 2.5, t = 1.0;
  const auto peak = [&](double w) {
    return weight / (sigma * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * (w - w0) * (w - w0) / (sigma * sigma));
  };
  const double limit = 4.0 / kPi * weight * std::tanh(w0 / (2.0 * kelvin_to_mev(t)));
  worst = std::max(worst, std::abs(compute_qfi(peak, t, wmax).point.f_q / limit - 1.0));
  worst = std::max(worst, std::abs(compute_qfi(tabulate(peak, t, wmax, 4000), wmax).point.f_q / limit - 1.0));

  // Linearity over random pairs of positive spectra and T-monotonicity for a fixed spectrum.
  oracle::rng(7);
  double worst_lin = 0.0;
  bool monotone = true;
  for (int k = 0; k < 40; ++k) {
    const double c1 = oracle::uniform(0.1, 3.0), c2 = oracle::uniform(0.1, 3.0);
    const double al = oracle::uniform(0.0, 2.0), be = oracle::uniform(0.0, 2.0), tt = oracle::uniform(0.02, 5.0);
    const auto f = [&](double w) { return w * std::exp(-c1 * w); };
    const auto g = [&](double w) { return std::sin(c2 * w) * std::sin(c2 * w); };
    const double lhs = compute_qfi([&](double w) { return al * f(w) + be * g(w); }, tt, wmax).point.f_q;
    const double rhs = al * compute_qfi(f, tt, wmax).point.f_q + be * compute_qfi(g, tt, wmax).point.f_q;
    worst_lin = std::max(worst_lin, std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs)));
    const double t2 = tt * oracle::uniform(1.01, 3.0);
    monotone = monotone && compute_qfi(f, t2, wmax).point.f_q <= compute_qfi(f, tt, wmax).point.f_q;
  }
  report(7, "QFI quadrature", worst < 1e-3 && worst_lin < 1e-7 && monotone,
         fmt("closed forms max rel err %.1e, linearity %.1e, monotone in T: ", worst, worst_lin) +
             (monotone ? "yes" : "no"));
}

void c8_scaling() {
  const double wmax = default_omega_max(3.1);
  const auto abs_p = StarykhParams::standard(3.1, NegativeLogPolicy::AbsoluteValue);
  std::vector<QfiPoint> pts;
  for (double t : {0.04, 0.5, 3.0, 6.7}) pts.push_back(compute_qfi(abs_p, t, wmax).point);
  const auto fit = fit_scaling(pts, 1.0);

  const auto strict = StarykhParams::standard(3.1);
  const auto a = compute_qfi(strict, 0.04, wmax).point, b = compute_qfi(strict, 0.5, wmax).point;
  const double strict_dq = -std::log(b.f_q / a.f_q) / std::log(b.temperature / a.temperature);
  bool strict_refuses = false;
  try {
    (void)compute_qfi(strict, 3.0, wmax);
  } catch (const Error& e) {
    strict_refuses = e.code() == ErrorCode::CutoffDomainError;
  }
  const bool ok = fit.delta_q_over_z >= 0.40 && fit.delta_q_over_z <= 0.70 && strict_dq > 0.0 && strict_refuses;
  report(8, "QFI scaling exponent", ok,
         fmt("absolute-value: Delta_Q/z = %.4f in [0.40, 0.70] (target 0.55); strict two-point Delta_Q/z = %.4f > 0",
             fit.delta_q_over_z, strict_dq));
}

void c9_powder() {
  const auto t0 = std::chrono::steady_clock::now();
  const double c = 5.0;
  const auto s1d = [&](double q, double e) {
    const double s = std::sin(0.5 * q * c);
    return (0.3 + s * s) * std::exp(-e);
  };
  auto rms = [&](int nq) {
    std::vector<double> q(nq), e{0.1, 0.4, 0.7, 1.0};
    for (int i = 0; i < nq; ++i) q[i] = 2.0 * i / (nq - 1);
    const auto back = powder_to_1d(forward_powder_average(s1d, q, e, 1.0));
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < e.size(); ++r)
      for (int k = 0; k < nq; ++k) {
        const double truth = s1d(q[k], e[r]);
        num += std::pow(back.intensity()(static_cast<Eigen::Index>(r), k) - truth, 2);
        den += truth * truth;
      }
    return std::sqrt(num / den);
  };
  const double e64 = rms(64), e128 = rms(128), e256 = rms(256);
  const double o1 = std::log(e64 / e128) / std::log(127.0 / 63.0), o2 = std::log(e128 / e256) / std::log(255.0 / 127.0);
  const double dt = seconds_since(t0);
  report(9, "powder round trip", e128 < 0.02 && std::min(o1, o2) >= 1.9 && dt < 10.0,
         fmt("RMS at 128 Q points %.2e, orders %.3f / %.3f, %.2f s", e128, o1, o2, dt));
}

void c10_bounds() {
  const double c = 5.0, j = kelvin_to_mev(3.1);
  const double el = two_spinon_bounds(kPi / (2.0 * c), j, c).lower;
  const double eu = two_spinon_bounds(kPi / c, j, c).upper;
  const double d1 = std::abs(el - kPi * j / 2.0), d2 = std::abs(eu - kPi * j);
  report(10, "two-spinon bounds", d1 <= 4e-16 * el && d2 <= 4e-16 * eu,
         fmt("E_l(pi/2c) = %.12f meV (pi J/2 = %.12f), E_u(pi/c) = %.12f meV (pi J = %.12f)", el, kPi * j / 2.0, eu,
             kPi * j));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CHAINQFI_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_text_file(entry.path());
  return files;
}

void c11_determinism() {
  const auto root = fs::temp_directory_path() / ("chainqfi_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = "\"" + root.string() + "\"";
  const std::string data = "\"" + (root / "synth").string() + "\"";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "synth --deterministic --out " + data},
      {"fit-susceptibility", "fit-susceptibility --deterministic --chi " + data + "/chi.csv --out " + r + "/fit"},
      {"witness", "witness --deterministic --chi " + data + "/chi.csv --out " + r + "/witness"},
      {"qfi --model", "qfi --deterministic --model --policy absolute-value --out " + r + "/qfi_model"},
      {"qfi --dataset", "qfi --deterministic --dataset " + data + "/T_0.04K --dataset " + data + "/T_0.5K --out " + r +
                            "/qfi_data"},
      {"spinon", "spinon --deterministic --dataset " + data + "/T_0.5K --out " + r + "/spinon"},
  };
  std::vector<std::string> bad;
  std::size_t compared = 0;
  for (const auto& [name, args] : commands) {
    const int c1 = run_cli(args);
    const auto first = snapshot(root);
    const int c2 = run_cli(args);
    const auto second = snapshot(root);
    if (c1 != 0 || c2 != 0 || first != second) bad.push_back(name);
    compared += second.size();
  }
  fs::remove_all(root);
  std::string detail = std::to_string(commands.size()) + " commands rerun, " + std::to_string(compared) +
                       " file snapshots byte-compared";
  if (!bad.empty()) {
    detail += "; differing or failing:";
    for (const auto& b : bad) detail += " " + b;
  }
  report(11, "CLI determinism", bad.empty(), detail);
}

}  // namespace

int main() {
  criterion(1, "Johnston relation", c1_johnston);
  criterion(2, "J from T_max", c2_j_from_tmax);
  criterion(3, "susceptibility fit recovery", c3_fit_recovery);
  criterion(4, "witness T_SE", c4_witness);
  criterion(5, "special functions", c5_specfun);
  criterion(6, "detailed balance", c6_detailed_balance);
  criterion(7, "QFI quadrature", c7_qfi);
  criterion(8, "QFI scaling exponent", c8_scaling);
  criterion(9, "powder round trip", c9_powder);
  criterion(10, "two-spinon bounds", c10_bounds);
  criterion(11, "CLI determinism", c11_determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
