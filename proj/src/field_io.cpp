#include "nodal/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

static_assert(std::endian::native == std::endian::little, "field dumps assume a little-endian host");

constexpr char kMagic[4] = {'N', 'S', 'L', 'F'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put(unsigned char* dst, T v) {
  std::memcpy(dst, &v, sizeof v);
}

template <class T>
T get(const unsigned char* src) {
  T v;
  std::memcpy(&v, src, sizeof v);
  return v;
}

}  // namespace

void write_field(const FieldSample& sample, const std::filesystem::path& path) {
  unsigned char header[32] = {};
  std::memcpy(header, kMagic, 4);
  header[4] = kVersion;
  header[5] = static_cast<std::uint8_t>(sample.grid.d);
  put<std::uint32_t>(header + 8, static_cast<std::uint32_t>(sample.grid.n));
  put<float>(header + 12, static_cast<float>(sample.grid.h));
  put<double>(header + 16, sample.grid.R);
  put<std::uint64_t>(header + 24, sample.seed);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(sample.values.data()),
            static_cast<std::streamsize>(sample.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

FieldSample read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  unsigned char header[32];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || std::memcmp(header, kMagic, 4) != 0) throw ConfigError(path.string() + " is not a field dump");
  if (header[4] != kVersion) throw ConfigError("unsupported field dump version " + std::to_string(header[4]));
  FieldSample s;
  s.grid = make_grid_points(header[5], get<double>(header + 16), static_cast<int>(get<std::uint32_t>(header + 8)));
  s.seed = get<std::uint64_t>(header + 24);
  s.values.resize(s.grid.size());
  in.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  if (!in) throw ConfigError(path.string() + " is truncated");
  return s;
}

}  // namespace nodal
