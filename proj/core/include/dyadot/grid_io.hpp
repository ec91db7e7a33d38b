#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dyadot {

/// Node grid with `components` interleaved float64 values per node, stored
/// row-major (y outer, x inner) in a raw little-endian binary file next to a
/// JSON header.
struct GridHeader {
  double R = 0.0;
  double h = 0.0;
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  int components = 1;
  std::string field;  // e.g. "zeta" or "flux"
};

/// Writes `<stem>.bin` and `<stem>.json`.
void write_grid(const std::filesystem::path& stem, const GridHeader& header,
                std::span<const double> data);

struct GridFile {
  GridHeader header;
  std::vector<double> data;
};

GridFile read_grid(const std::filesystem::path& stem);

}  // namespace dyadot
