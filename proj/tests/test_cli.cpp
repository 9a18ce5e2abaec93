#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chainqfi/csv_io.hpp"
#include "chainqfi/dynamics.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/manifest.hpp"
#include "chainqfi/suscept.hpp"
#include "chainqfi/synthetic.hpp"
#include "chainqfi/units.hpp"
#include "commands.hpp"
#include "json.hpp"

using namespace chainqfi;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("chainqfi_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "chainqfi");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

// Runs the installed binary and returns (exit code, stderr).
std::pair<int, std::string> run_binary(const std::string& args, const fs::path& dir) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + CHAINQFI_CLI_PATH + "\" " + args + " > /dev/null 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

// Zero-noise synthetic set shared by several cases.
const fs::path& clean_synth() {
  static const fs::path dir = [] {
    const auto d = scratch("synth_clean");
    REQUIRE(run_cli({"synth", "--no-noise", "--elastic", "0", "--background", "0", "--out", d.string()}) == 0);
    return d;
  }();
  return dir;
}

void write_dataset(const fs::path& dir, double t, const Eigen::MatrixXd& inten, const std::vector<double>& q,
                   const std::vector<double>& e, std::optional<double> lattice_c) {
  fs::create_directories(dir);
  const auto grid = make_grid(q, e, inten, Eigen::MatrixXd::Zero(inten.rows(), inten.cols()), t);
  write_spectrum_csv(dir / "sqe.csv", grid);
  DatasetManifest m;
  m.sample = "handmade";
  m.temperature_k = t;
  m.lattice_c_a = lattice_c;
  m.policies = default_policies("strict");
  m.inputs.push_back({"sqe.csv", sha256_file(dir / "sqe.csv")});
  write_manifest(dir / "manifest.json", m);
}

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("synth writes the documented file layout") {
  const auto& d = clean_synth();
  CHECK(fs::exists(d / "chi.csv"));
  CHECK(fs::exists(d / "synth_manifest.json"));
  for (const char* t : {"T_0.04K", "T_0.5K"}) {
    CHECK(fs::exists(d / t / "sqe.csv"));
    const auto m = read_manifest(d / t / "manifest.json");
    CHECK_NOTHROW(verify_inputs(m, d / t));
  }
  CHECK(read_text_file(d / "chi.csv").rfind("T_K,chi_emu_per_mol,sigma\n", 0) == 0);
  CHECK(read_text_file(d / "T_0.5K" / "sqe.csv").rfind("Q_invA,E_meV,intensity,error\n", 0) == 0);
}

TEST_CASE("fit-susceptibility recovers J from zero-noise synthetic data") {
  const auto out = scratch("fit");
  REQUIRE(run_cli({"fit-susceptibility", "--chi", (clean_synth() / "chi.csv").string(), "--j", "2.5", "--g", "2.0",
               "--out", out.string()}) == 0);
  const auto r = read_json(out / "fit_report.json");
  CHECK(r["J_over_kB"].get<double>() >= 3.09);
  CHECK(r["J_over_kB"].get<double>() <= 3.11);
  CHECK(r["g"].get<double>() == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(r["tmax_model"]["t_max_K"].get<double>() == doctest::Approx(0.6408 * 3.1).epsilon(2e-3));
  CHECK(r["j_from_tmax_note"].get<std::string>().find("3.05") != std::string::npos);
  CHECK(fs::exists(out / "chi_fit.svg"));

  const auto frozen = scratch("fit_frozen");
  REQUIRE(run_cli({"fit-susceptibility", "--chi", (clean_synth() / "chi.csv").string(), "--freeze", "g=2.1", "--out",
               frozen.string()}) == 0);
  const auto rf = read_json(frozen / "fit_report.json");
  CHECK(rf["g"].get<double>() == 2.1);
  const auto& fit = rf["fit"];
  std::size_t gi = 0;
  for (; gi < fit["parameters"].size(); ++gi)
    if (fit["parameters"][gi]["name"] == "g") break;
  REQUIRE(gi < fit["parameters"].size());
  CHECK(fit["parameters"][gi]["frozen"].get<bool>());
  CHECK(fit["parameters"][gi]["standard_error"].get<double>() == 0.0);
  for (const auto& v : fit["covariance"][gi]) CHECK(v.get<double>() == 0.0);
  for (const auto& row : fit["covariance"]) CHECK(row[gi].get<double>() == 0.0);

  CHECK(run_cli({"fit-susceptibility", "--chi", (clean_synth() / "chi.csv").string(), "--freeze", "h=1", "--out",
             frozen.string()}) == 2);
}

TEST_CASE("witness on model, zero and Curie inputs") {
  const auto out = scratch("witness");
  REQUIRE(run_cli({"witness", "--chi", (clean_synth() / "chi.csv").string(), "--out", out.string()}) == 0);
  const auto r = read_json(out / "witness_report.json");
  REQUIRE(r["t_se_K"].is_number());
  CHECK(std::abs(r["t_se_K"].get<double>() - 4.43) <= 0.1);
  CHECK(read_text_file(out / "witness.csv").rfind("T_K,MW_SE\n", 0) == 0);

  SusceptibilityCurve zero, curie;
  const double c = 0.5 * witness_bound(1.0, 2.1);
  for (int i = 1; i <= 20; ++i) {
    const double t = 0.5 * i;
    zero.temperatures.push_back(t);
    zero.chi.push_back(0.0);
    zero.sigma.push_back(1e-4);
    curie.temperatures.push_back(t);
    curie.chi.push_back(c / t);
    curie.sigma.push_back(1e-4);
  }
  write_susceptibility_csv(out / "zero.csv", zero);
  write_susceptibility_csv(out / "curie.csv", curie);
  REQUIRE(run_cli({"witness", "--chi", (out / "zero.csv").string(), "--out", (out / "z").string()}) == 0);
  CHECK(read_json(out / "z" / "witness_report.json")["t_se_K"].is_null());
  std::istringstream zs(read_text_file(out / "z" / "witness.csv"));
  std::string line;
  std::getline(zs, line);
  while (std::getline(zs, line)) CHECK(line.substr(line.find(',') + 1) == "-1");

  REQUIRE(run_cli({"witness", "--chi", (out / "curie.csv").string(), "--g", "2.1", "--out", (out / "c").string()}) == 0);
  CHECK(read_json(out / "c" / "witness_report.json")["t_se_K"].is_null());
  std::istringstream cs(read_text_file(out / "c" / "witness.csv"));
  std::getline(cs, line);
  while (std::getline(cs, line)) CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("qfi model mode reproduces the scaling band") {
  const auto out = scratch("qfi_model");
  REQUIRE(run_cli({"qfi", "--model", "--policy", "absolute-value", "--deterministic", "--out", out.string()}) == 0);
  const auto r = read_json(out / "fit_report.json");
  const double d = r["scaling"]["delta_q_over_z"].get<double>();
  CHECK(d >= 0.40);
  CHECK(d <= 0.70);
  CHECK(read_text_file(out / "qfi_points.csv").rfind("T_K,F_Q,err\n", 0) == 0);
  for (const char* f : {"chi_imag.svg", "qfi_scaling.svg", "chi_imag.csv"}) CHECK(fs::exists(out / f));

  // The strict policy refuses T >= T0 with an exit code of 4 and names the flag.
  const auto [code, err] = run_binary("qfi --model --out \"" + (out / "strict").string() + "\"", out);
  CHECK(code == 4);
  const auto j = json::parse(err);
  CHECK(j["error"] == "CutoffDomainError");
  CHECK(j["category"] == "policy");
  CHECK(j["message"].get<std::string>().find("--policy absolute-value") != std::string::npos);

  // Strict on the two admissible temperatures: too few points for a fit, but it succeeds.
  REQUIRE(run_cli({"qfi", "--model", "--temperatures", "0.04,0.5", "--out", (out / "two").string()}) == 0);
  CHECK(read_json(out / "two" / "fit_report.json")["scaling"].is_null());
}

TEST_CASE("qfi on data: exact power law and zero signal") {
  const auto base = scratch("qfi_data");
  const auto q = axis(0.0, 2.0, 21);
  const auto e = axis(-0.1, 1.0, 221);

  // chi''(E) = T^-0.55 * (box on (0, omega_max]) so F_Q ~ T^-0.55 * tanh integral; the tanh factor
  // is removed by feeding chi'' / tanh(E/2kT), making F_Q exactly proportional to T^-0.55.
  std::vector<std::string> args{"qfi", "--no-elastic", "--no-fit", "--out", (base / "out").string()};
  for (double t : {0.1, 0.3, 1.0, 3.0}) {
    Eigen::MatrixXd inten(e.size(), q.size());
    for (std::size_t r = 0; r < e.size(); ++r) {
      double s = 0.0;
      if (e[r] > 0.0) {
        const double x = e[r] / kelvin_to_mev(t);
        const double chi = std::pow(t, -0.55) / std::tanh(0.5 * x);
        s = chi / -std::expm1(-x);
      }
      for (std::size_t k = 0; k < q.size(); ++k) inten(r, k) = s;
    }
    const auto dir = base / ("T" + format_double(t));
    write_dataset(dir, t, inten, q, e, 5.0);
    args.push_back("--dataset");
    args.push_back(dir.string());
  }
  REQUIRE(run_cli(args) == 0);
  const auto r = read_json(base / "out" / "fit_report.json");
  CHECK(r["scaling"]["delta_q_over_z"].get<double>() == doctest::Approx(0.55).epsilon(1e-9));

  std::vector<std::string> zargs{"qfi", "--out", (base / "zero_out").string()};
  for (double t : {0.1, 0.3, 1.0}) {
    const auto dir = base / ("Z" + format_double(t));
    write_dataset(dir, t, Eigen::MatrixXd::Zero(e.size(), q.size()), q, e, 5.0);
    zargs.push_back("--dataset");
    zargs.push_back(dir.string());
  }
  CHECK(run_cli(zargs) == 3);
  std::istringstream pts(read_text_file(base / "zero_out" / "qfi_points.csv"));
  std::string line;
  std::getline(pts, line);
  int rows = 0;
  while (std::getline(pts, line)) {
    ++rows;
    const auto a = line.find(','), b = line.find(',', a + 1);
    CHECK(line.substr(a + 1, b - a - 1) == "0");
  }
  CHECK(rows == 3);
  CHECK(read_json(base / "zero_out" / "fit_report.json")["scaling"].is_null());
}

TEST_CASE("qfi recovers the line shape from zero-noise synthetic spectra") {
  const auto out = scratch("qfi_synth");
  const auto& d = clean_synth();
  REQUIRE(run_cli({"qfi", "--dataset", (d / "T_0.04K").string(), "--dataset", (d / "T_0.5K").string(), "--no-elastic",
               "--out", out.string()}) == 0);
  const auto r = read_json(out / "fit_report.json");
  CHECK(r["model_parameters"]["A_starykh"].get<double>() == doctest::Approx(0.00065).epsilon(1e-3));
  const auto model = compute_qfi(StarykhParams::standard(3.1), 0.5, default_omega_max(3.1));
  CHECK(r["qfi_points"][1]["F_Q"].get<double>() == doctest::Approx(model.point.f_q).epsilon(0.02));
}

TEST_CASE("spinon inversion of a synthetic powder map") {
  const auto out = scratch("spinon");
  const auto& d = clean_synth();
  REQUIRE(run_cli({"spinon", "--dataset", (d / "T_0.5K").string(), "--out", out.string()}) == 0);
  const auto r = read_json(out / "spinon_report.json");
  CHECK(r["upper_at_q_pi_over_c_meV"].get<double>() == doctest::Approx(kPi * kelvin_to_mev(3.1)).epsilon(1e-14));
  CHECK(r["lower_at_q_pi_over_2c_meV"].get<double>() == doctest::Approx(0.5 * kPi * kelvin_to_mev(3.1)).epsilon(1e-14));

  // Compare s1d.csv with the generating chain spectrum on E > 0.
  SyntheticSpec spec;
  std::istringstream s(read_text_file(out / "s1d.csv"));
  std::string line;
  std::getline(s, line);
  CHECK(line == "q_invA,E_meV,s1d,error");
  double num = 0.0, den = 0.0;
  while (std::getline(s, line)) {
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    const double q = std::stod(a), e = std::stod(b);
    if (e <= 0.0) continue;
    const double truth = spec.exposure * synthetic_s1d(q, e, 0.5, spec.starykh, 5.0);
    num += std::pow(std::stod(c) - truth, 2);
    den += truth * truth;
  }
  CHECK(std::sqrt(num / den) < 0.02);

  // Same data, manifest without a lattice constant.
  const auto nod = scratch("spinon_nolattice");
  fs::copy_file(d / "T_0.5K" / "sqe.csv", nod / "sqe.csv");
  auto m = read_manifest(d / "T_0.5K" / "manifest.json");
  m.lattice_c_a.reset();
  write_manifest(nod / "manifest.json", m);
  const auto [code, err] = run_binary("spinon --dataset \"" + nod.string() + "\" --out \"" + (out / "x").string() + "\"", out);
  CHECK(code == 2);
  CHECK(json::parse(err)["error"] == "ConfigError");
  CHECK(run_cli({"spinon", "--dataset", nod.string(), "--lattice-c", "5", "--out", (out / "y").string()}) == 0);

  const auto coarse = scratch("spinon_coarse");
  write_dataset(coarse, 1.0, Eigen::MatrixXd::Ones(3, 2), {0.5, 1.0}, {0.0, 0.1, 0.2}, 5.0);
  const auto [ccode, cerr] = run_binary("spinon --dataset \"" + coarse.string() + "\" --out \"" + (out / "z").string() + "\"", out);
  CHECK(ccode == 3);
  CHECK(json::parse(cerr)["message"].get<std::string>().find("at least 3 Q columns") != std::string::npos);
}

TEST_CASE("exit codes and argument handling") {
  const auto out = scratch("exit");
  auto [c1, e1] = run_binary("fit-susceptibility --chi \"" + (out / "missing.csv").string() + "\" --out \"" + out.string() + "\"", out);
  CHECK(c1 == 2);
  CHECK(json::parse(e1)["category"] == "input");

  auto [c2, e2] = run_binary("witness --chi x.csv --bogus", out);
  CHECK(c2 == 2);
  CHECK(e2.find("bogus") != std::string::npos);

  CHECK(run_binary("--help", out).first == 0);
  for (const char* sub : {"fit-susceptibility", "witness", "qfi", "spinon", "synth"}) {
    const auto dir = out / sub;
    fs::create_directories(dir);
    const std::string cmd = std::string("\"") + CHAINQFI_CLI_PATH + "\" " + sub + " --help > \"" + (dir / "help.txt").string() + "\"";
    CHECK(std::system(cmd.c_str()) == 0);
    const auto help = read_text_file(dir / "help.txt");
    for (const char* flag : {"--out", "--deterministic", "--policy", "--omega-max", "--z"})
      CHECK(help.find(flag) != std::string::npos);
  }

  CHECK(run_cli({"synth", "--temperatures", "-1", "--out", (out / "neg").string()}) == 2);
  CHECK(run_cli({"qfi", "--out", out.string()}) == 2);
  CHECK(run_cli({"qfi", "--model", "--policy", "sideways", "--out", out.string()}) == 2);
  CHECK(run_cli(std::vector<std::string>{}) == 2);

  // A fit that cannot start is numerical.
  SusceptibilityCurve two{{1.0, 2.0}, {0.01, 0.02}, {1e-4, 1e-4}};
  write_susceptibility_csv(out / "two.csv", two);
  const int code = run_cli({"fit-susceptibility", "--chi", (out / "two.csv").string(), "--out", out.string()});
  CHECK((code == 2 || code == 3));

  CHECK(cli::exit_code_for(ErrorCode::ParseError) == 2);
  CHECK(cli::exit_code_for(ErrorCode::FitDiverged) == 3);
  CHECK(cli::exit_code_for(ErrorCode::NonPositiveValue) == 3);
  CHECK(cli::exit_code_for(ErrorCode::CutoffDomainError) == 4);
}
