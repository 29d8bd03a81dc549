#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "nodal/lattice.hpp"

namespace nodal {

struct HeatmapInfo {
  double min = 0.0;
  double max = 0.0;
  int width = 0;
  int height = 0;
};

// Writes an RGB PNG of a rows x cols array given row-major with row 0 at the
// top, each value drawn as a pixel_scale x pixel_scale block. Colors map
// linearly from min to max; a sidecar <path>.json records the range.
HeatmapInfo render_heatmap(std::span<const double> values, int rows, int cols, const std::filesystem::path& path,
                           int pixel_scale = 1);

// Rows of a 2-d lattice ordered top-down (largest second coordinate first).
std::vector<double> lattice_rows_top_down(const Lattice& lattice);

// RGB color for a value in [0, 1].
std::array<unsigned char, 3> colormap(double t);

}  // namespace nodal
