#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nodal {

// Regular grid over [0,R]^d with n points per side, spacing h = R/(n-1).
// Values are stored row-major with the first coordinate fastest:
// index(ix, iy) = iy * n + ix.
struct GridSpec {
  int d = 2;
  double R = 0.0;
  double h = 0.0;
  int n = 0;

  std::size_t size() const noexcept {
    return d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  }
  double coord(int i) const noexcept { return i * h; }
};

// n = round(R/h) + 1; h is then reset to R/(n-1) so that R = (n-1) h holds.
GridSpec make_grid(int d, double R, double h);
GridSpec make_grid_points(int d, double R, int n);

struct FieldSample {
  GridSpec grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model;

  double at(int ix) const { return values[static_cast<std::size_t>(ix)]; }
  double at(int ix, int iy) const {
    return values[static_cast<std::size_t>(iy) * grid.n + ix];
  }
};

}  // namespace nodal
