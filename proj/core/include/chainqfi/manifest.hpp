#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chainqfi {

struct FileHash {
  std::string path;    ///< relative to the manifest's directory
  std::string sha256;  ///< lowercase hex
};

/// Per-dataset metadata stored as manifest.json next to each sqe.csv.
/// JSON keys: sample, temperature_K, resolution_fwhm_meV, q_window,
/// lattice_c_A, calibration, policies, inputs.
struct DatasetManifest {
  std::string sample;
  double temperature_k = 0.0;
  double resolution_fwhm_mev = 0.0175;
  std::array<double, 2> q_window{0.4, 1.1};
  std::optional<double> lattice_c_a;
  double calibration = 1.0;
  std::map<std::string, std::string> policies;
  std::vector<FileHash> inputs;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
std::string manifest_to_json(const DatasetManifest& manifest);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Recomputes the hash of every listed input (resolved against base_dir)
/// and throws ConfigError on a mismatch or a missing file.
void verify_inputs(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

/// Default policy flags recorded in every manifest written by this library.
std::map<std::string, std::string> default_policies(std::string_view negative_log_policy);

}  // namespace chainqfi
