#pragma once

#include <filesystem>

#include "qlrmr/linalg.hpp"

namespace qlrmr {

/// Reads a rectangular comma-separated numeric table. A first line with any
/// non-numeric cell is treated as a header and skipped. Ragged rows and bad
/// cells raise ErrorKind::parse with the offending line number.
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Writes one matrix row per line using shortest round-trip formatting.
void write_csv_matrix(const Matrix& m, const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace qlrmr
