#pragma once

#include "qforge/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qforge::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

// Lines without their terminators; a trailing newline does not produce an
// empty final line.
std::vector<std::string> read_lines(const fs::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string file_checksum(const fs::path& path);

// Shortest round-trippable decimal rendering, locale independent.
std::string format_double(double value);
// Fixed number of decimals (reports).
std::string format_fixed(double value, int decimals);

std::string csv_field(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

// Little-endian float32 matrix payloads.
void write_f32(const fs::path& path, const RowMatrixf& matrix);
RowMatrixf read_f32(const fs::path& path, std::size_t rows, std::size_t cols);

}  // namespace qforge::io
