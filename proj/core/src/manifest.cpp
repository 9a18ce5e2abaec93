#include "chainqfi/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "json.hpp"
#include <openssl/evp.h>

#include "chainqfi/csv_io.hpp"
#include "chainqfi/error.hpp"

namespace chainqfi {
namespace {

using ojson = nlohmann::ordered_json;

const std::vector<std::string>& manifest_keys() {
  static const std::vector<std::string> keys{"sample",      "temperature_K", "resolution_fwhm_meV",
                                             "q_window",    "lattice_c_A",   "calibration",
                                             "policies",    "inputs"};
  return keys;
}

bool is_hex64(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

double number_at(const ojson& j, const char* key, const std::string& src) {
  if (!j.contains(key) || !j.at(key).is_number())
    raise(ErrorCode::ConfigError, src + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

void DatasetManifest::validate() const {
  if (!(temperature_k > 0.0) || !std::isfinite(temperature_k))
    raise(ErrorCode::ConfigError, "manifest temperature_K must be > 0");
  if (!(resolution_fwhm_mev > 0.0) || !std::isfinite(resolution_fwhm_mev))
    raise(ErrorCode::ConfigError, "manifest resolution_fwhm_meV must be > 0");
  if (!(q_window[0] < q_window[1]) || !std::isfinite(q_window[0]) || !std::isfinite(q_window[1]))
    raise(ErrorCode::ConfigError, "manifest q_window must satisfy min < max");
  if (lattice_c_a && !(*lattice_c_a > 0.0))
    raise(ErrorCode::ConfigError, "manifest lattice_c_A must be > 0 when given");
  if (!(calibration > 0.0) || !std::isfinite(calibration))
    raise(ErrorCode::ConfigError, "manifest calibration must be > 0");
  if (inputs.empty()) raise(ErrorCode::ConfigError, "manifest lists no inputs");
  for (const auto& in : inputs) {
    if (in.path.empty()) raise(ErrorCode::ConfigError, "manifest input with empty path");
    if (!is_hex64(in.sha256))
      raise(ErrorCode::ConfigError, "manifest input '" + in.path + "' lacks a valid sha256");
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  ojson j;
  j["sample"] = m.sample;
  j["temperature_K"] = m.temperature_k;
  j["resolution_fwhm_meV"] = m.resolution_fwhm_mev;
  j["q_window"] = {m.q_window[0], m.q_window[1]};
  j["lattice_c_A"] = m.lattice_c_a ? ojson(*m.lattice_c_a) : ojson(nullptr);
  j["calibration"] = m.calibration;
  j["policies"] = ojson::object();
  for (const auto& [k, v] : m.policies) j["policies"][k] = v;
  j["inputs"] = ojson::array();
  for (const auto& in : m.inputs) j["inputs"].push_back({{"path", in.path}, {"sha256", in.sha256}});
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  manifest.validate();
  write_text_file(path, manifest_to_json(manifest));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::string src = path.string();
  ojson j;
  try {
    j = ojson::parse(read_text_file(path));
  } catch (const ojson::parse_error& e) {
    raise(ErrorCode::ConfigError, src + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) raise(ErrorCode::ConfigError, src + ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(manifest_keys().begin(), manifest_keys().end(), key) == manifest_keys().end())
      raise(ErrorCode::ConfigError, src + ": unknown key '" + key + "'");
  }

  DatasetManifest m;
  if (!j.contains("sample") || !j["sample"].is_string())
    raise(ErrorCode::ConfigError, src + ": 'sample' must be a string");
  m.sample = j["sample"].get<std::string>();
  m.temperature_k = number_at(j, "temperature_K", src);
  m.resolution_fwhm_mev = number_at(j, "resolution_fwhm_meV", src);
  m.calibration = number_at(j, "calibration", src);
  const auto& qw = j.value("q_window", ojson());
  if (!qw.is_array() || qw.size() != 2 || !qw[0].is_number() || !qw[1].is_number())
    raise(ErrorCode::ConfigError, src + ": 'q_window' must be [min, max]");
  m.q_window = {qw[0].get<double>(), qw[1].get<double>()};
  if (j.contains("lattice_c_A") && !j["lattice_c_A"].is_null()) {
    if (!j["lattice_c_A"].is_number())
      raise(ErrorCode::ConfigError, src + ": 'lattice_c_A' must be a number or null");
    m.lattice_c_a = j["lattice_c_A"].get<double>();
  }
  if (j.contains("policies")) {
    if (!j["policies"].is_object()) raise(ErrorCode::ConfigError, src + ": 'policies' must be an object");
    for (const auto& [k, v] : j["policies"].items()) {
      if (!v.is_string()) raise(ErrorCode::ConfigError, src + ": policy '" + k + "' must be a string");
      m.policies[k] = v.get<std::string>();
    }
  }
  if (!j.contains("inputs") || !j["inputs"].is_array())
    raise(ErrorCode::ConfigError, src + ": 'inputs' must be an array");
  for (const auto& in : j["inputs"]) {
    if (!in.is_object() || !in.contains("path") || !in.contains("sha256") || !in["path"].is_string() ||
        !in["sha256"].is_string())
      raise(ErrorCode::ConfigError, src + ": each input needs string 'path' and 'sha256'");
    m.inputs.push_back({in["path"].get<std::string>(), in["sha256"].get<std::string>()});
  }
  m.validate();
  return m;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    raise(ErrorCode::IoError, "sha256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

void verify_inputs(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  for (const auto& in : manifest.inputs) {
    const auto p = base_dir / in.path;
    if (!std::filesystem::exists(p))
      raise(ErrorCode::ConfigError, "manifest input missing: " + p.string());
    const auto actual = sha256_file(p);
    if (actual != in.sha256)
      raise(ErrorCode::ConfigError,
            "hash mismatch for " + p.string() + ": manifest " + in.sha256 + ", file " + actual);
  }
}

std::map<std::string, std::string> default_policies(std::string_view negative_log_policy) {
  return {{"negative_log", std::string(negative_log_policy)},
          {"negative_chi_imag", "clip"},
          {"elastic_model", "gaussian+constant, fwhm fixed to resolution"}};
}

}  // namespace chainqfi
