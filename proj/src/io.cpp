#include "qforge/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qforge {

std::string to_string(Metric metric) {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(const std::string& name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw ConfigError("unknown metric '" + name + "' (expected cosine or euclidean)");
}

}  // namespace qforge

namespace qforge::io {

static_assert(std::endian::native == std::endian::little,
              "float32 sidecars are read and written as native little-endian");

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write to " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_checksum(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, end);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_field(fields[i]);
  }
  row += '\n';
  return row;
}

void write_f32(const fs::path& path, const RowMatrixf& matrix) {
  const auto bytes = static_cast<std::size_t>(matrix.size()) * sizeof(float);
  write_file(path, std::string_view(reinterpret_cast<const char*>(matrix.data()), bytes));
}

RowMatrixf read_f32(const fs::path& path, std::size_t rows, std::size_t cols) {
  const std::string payload = read_file(path);
  const std::size_t expected = rows * cols * sizeof(float);
  if (payload.size() < expected)
    throw DataError(path.string() + ": truncated payload (" + std::to_string(payload.size()) +
                    " bytes, expected " + std::to_string(expected) + ")");
  if (payload.size() > expected)
    throw DataError(path.string() + ": trailing bytes (" + std::to_string(payload.size()) +
                    " bytes, expected " + std::to_string(expected) + ")");
  RowMatrixf matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (expected) std::memcpy(matrix.data(), payload.data(), expected);
  return matrix;
}

}  // namespace qforge::io
