#pragma once

#include <cstddef>
#include <vector>

namespace nodal {

// Values on the (m+1)^d lattice {0, 1/m, ..., 1}^d, first coordinate
// fastest: index(i, j) = j * (m+1) + i.
struct Lattice {
  int d = 2;
  int m = 0;
  std::vector<double> values;

  int side() const noexcept { return m + 1; }
  double at(int i) const { return values[static_cast<std::size_t>(i)]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * (m + 1) + i]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * (m + 1) + i]; }
};

}  // namespace nodal
