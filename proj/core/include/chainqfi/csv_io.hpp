#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "chainqfi/manifest.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/suscept.hpp"
#include "chainqfi/types.hpp"

namespace chainqfi {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// `T_K,chi_emu_per_mol,sigma`. Rows are returned sorted by temperature.
/// Throws IoError, EmptyFile, ParseError (with line number),
/// DuplicateAbscissa.
SusceptibilityCurve read_susceptibility_csv(const std::filesystem::path& path);
void write_susceptibility_csv(const std::filesystem::path& path, const SusceptibilityCurve& curve);

/// Long format `Q_invA,E_meV,intensity,error`; every (Q, E) cell of the
/// rectangular grid must be present. Identical repeated rows are tolerated,
/// conflicting ones are a ParseError. Throws IncompleteGrid.
SpectrumGrid read_spectrum_csv(const std::filesystem::path& path, double temperature);
SpectrumGrid read_spectrum_csv(const std::filesystem::path& path, const DatasetManifest& manifest);
/// Rows ordered by energy, then Q.
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumGrid& grid);

/// `T_K,F_Q,err`.
void write_qfi_points_csv(const std::filesystem::path& path, std::span<const QfiPoint> points);

/// Writes text atomically enough for our purposes (truncate + write).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace chainqfi
