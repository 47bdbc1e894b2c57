#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace neuroskin {

/// 17 significant digits, same text as printf("%.17g").
std::string format_double(double value);

/// One value per line, 17 significant digits, LF endings.
void write_series(const std::filesystem::path& path, std::span<const double> values);

/// Reads whitespace-separated decimal floats. Throws IoError when the file
/// cannot be opened or a token does not parse.
std::vector<double> read_series(const std::filesystem::path& path);

/// "element_index,w_o" header followed by one row per element.
void write_params_csv(const std::filesystem::path& path, std::span<const double> w_o);

/// Reads params.csv back into a per-element vector (row order must be 0..P-1).
std::vector<double> read_params_csv(const std::filesystem::path& path);

}  // namespace neuroskin
