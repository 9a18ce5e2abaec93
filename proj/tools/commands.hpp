#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chainqfi/error.hpp"

namespace chainqfi::cli {

struct GlobalOptions {
  std::string out = "out";
  bool deterministic = false;
  std::string policy = "strict";
  std::optional<double> omega_max;
  double z = 1.0;
};

struct FitSusceptibilityOptions {
  std::string chi;
  double j = 3.1;
  double g = 2.1;
  double c0 = 0.0;
  double c1 = 0.0;
  std::vector<std::string> freeze;  // name=value
  bool fit_c1 = false;
  std::string impurity = "constant";
  std::string model = "ring";
};

struct WitnessOptions {
  std::string chi;
  double g = 2.1;
};

struct QfiOptions {
  std::vector<std::string> datasets;
  bool model = false;
  std::vector<double> temperatures{0.04, 0.5, 3.0, 6.7};
  double j = 3.1;
  double a = 0.00065;
  std::optional<double> t0;
  bool no_fit = false;
  bool fit_t0 = false;
  std::string source = "data";
  bool no_elastic = false;
  std::vector<double> q_window;
};

struct SpinonOptions {
  std::string dataset;
  std::optional<double> lattice_c;
  double j = 3.1;
};

struct SynthOptions {
  std::uint64_t seed = 20240601;
  bool no_noise = false;
  double j = 3.1;
  double g = 2.1;
  double c0 = 0.0;
  double c1 = 0.0;
  double a = 0.00065;
  std::optional<double> t0;
  std::vector<double> temperatures{0.04, 0.5};
  double chi_sigma = 0.01;
  double lattice_c = 5.0;
  double exposure = 1.0e5;
  double elastic = 2.0e4;
  double background = 50.0;
  double resolution = 0.0175;
};

void cmd_fit_susceptibility(const GlobalOptions& g, const FitSusceptibilityOptions& o);
void cmd_witness(const GlobalOptions& g, const WitnessOptions& o);
void cmd_qfi(const GlobalOptions& g, const QfiOptions& o);
void cmd_spinon(const GlobalOptions& g, const SpinonOptions& o);
void cmd_synth(const GlobalOptions& g, const SynthOptions& o);

/// 0 success, 2 input/config, 3 numerical, 4 domain policy.
int exit_code_for(ErrorCode code) noexcept;

/// Parses argv, dispatches, maps failures to exit codes and prints a JSON
/// error object on stderr.
int run(int argc, char** argv);

}  // namespace chainqfi::cli
