#include "nodal/heatmap.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "nodal/errors.hpp"

namespace nodal {

namespace {

// Anchors of a perceptually ordered blue-green-yellow ramp.
constexpr std::array<std::array<double, 3>, 5> kAnchors{{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

std::array<unsigned char, 3> colormap(double t) {
  t = std::clamp(t, 0.0, 1.0) * (kAnchors.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(t), kAnchors.size() - 2);
  const double u = t - i;
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<unsigned char>(std::lround((1 - u) * kAnchors[i][c] + u * kAnchors[i + 1][c]));
  }
  return rgb;
}

std::vector<double> lattice_rows_top_down(const Lattice& lattice) {
  if (lattice.d != 2) throw ConfigError("heatmaps need a 2-d lattice");
  const int s = lattice.side();
  std::vector<double> out;
  out.reserve(lattice.values.size());
  for (int j = s - 1; j >= 0; --j) {
    for (int i = 0; i < s; ++i) out.push_back(lattice.at(i, j));
  }
  return out;
}

HeatmapInfo render_heatmap(std::span<const double> values, int rows, int cols, const std::filesystem::path& path,
                           int pixel_scale) {
  if (rows < 1 || cols < 1 || values.size() != static_cast<std::size_t>(rows) * cols) {
    throw ConfigError("heatmap shape does not match the data");
  }
  if (pixel_scale < 1) throw ConfigError("pixel scale must be positive");
  HeatmapInfo info;
  info.min = *std::min_element(values.begin(), values.end());
  info.max = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(info.min) || !std::isfinite(info.max)) throw NumericalError("heatmap data is not finite");
  info.width = cols * pixel_scale;
  info.height = rows * pixel_scale;
  const double range = info.max - info.min;

  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop pinfo = png ? png_create_info_struct(png) : nullptr;
  if (!png || !pinfo) {
    png_destroy_write_struct(&png, &pinfo);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &pinfo);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, pinfo, info.width, info.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, pinfo);
  std::vector<png_byte> line(static_cast<std::size_t>(info.width) * 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = values[static_cast<std::size_t>(r) * cols + c];
      const auto rgb = colormap(range > 0.0 ? (v - info.min) / range : 0.5);
      for (int k = 0; k < pixel_scale; ++k) {
        std::copy(rgb.begin(), rgb.end(), line.begin() + 3 * (static_cast<std::size_t>(c) * pixel_scale + k));
      }
    }
    for (int k = 0; k < pixel_scale; ++k) png_write_row(png, line.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &pinfo);
  file.reset();

  nlohmann::json side{{"min", info.min}, {"max", info.max}, {"width", info.width}, {"height", info.height},
                      {"rows", rows},    {"cols", cols},    {"colormap", "linear blue-green-yellow"}};
  std::ofstream out(path.string() + ".json");
  if (!out) throw std::runtime_error("cannot write " + path.string() + ".json");
  out << side.dump(2) << '\n';
  return info;
}

}  // namespace nodal
