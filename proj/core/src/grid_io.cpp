#include "dyadot/grid_io.hpp"

#include <bit>
#include <stdexcept>
#include <fstream>

#include "dyadot/errors.hpp"
#include "json.hpp"

namespace dyadot {

static_assert(std::endian::native == std::endian::little, "grid files are little-endian");

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

}  // namespace

void write_grid(const std::filesystem::path& stem, const GridHeader& header,
                std::span<const double> data) {
  const auto expected = static_cast<std::size_t>(header.nx * header.ny * header.components);
  if (data.size() != expected) throw std::invalid_argument("write_grid: size mismatch");
  const auto bin = with_suffix(stem, ".bin");
  const auto meta = with_suffix(stem, ".json");
  nlohmann::json j;
  j["field"] = header.field;
  j["R"] = header.R;
  j["h"] = header.h;
  j["dims"] = {header.ny, header.nx};
  j["components"] = header.components;
  j["dtype"] = "float64";
  j["order"] = "row-major, y outer";
  j["binary"] = bin.filename().string();
  std::ofstream m(meta);
  if (!m) throw IoError("cannot open " + meta.string() + " for writing");
  m << j.dump(2) << '\n';
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw IoError("cannot open " + bin.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out || !m) throw IoError("write failed: " + stem.string());
}

GridFile read_grid(const std::filesystem::path& stem) {
  const auto meta = with_suffix(stem, ".json");
  std::ifstream m(meta);
  if (!m) throw IoError("cannot open " + meta.string());
  GridFile g;
  try {
    const auto j = nlohmann::json::parse(m);
    g.header.field = j.at("field");
    g.header.R = j.at("R");
    g.header.h = j.at("h");
    g.header.ny = j.at("dims").at(0);
    g.header.nx = j.at("dims").at(1);
    g.header.components = j.at("components");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(meta.string() + ": " + e.what());
  }
  const auto bin = with_suffix(stem, ".bin");
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw IoError("cannot open " + bin.string());
  g.data.resize(static_cast<std::size_t>(g.header.nx * g.header.ny * g.header.components));
  in.read(reinterpret_cast<char*>(g.data.data()),
          static_cast<std::streamsize>(g.data.size() * sizeof(double)));
  if (!in) throw IoError(bin.string() + ": truncated");
  return g;
}

}  // namespace dyadot
