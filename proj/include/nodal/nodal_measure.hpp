#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodal/grid.hpp"
#include "nodal/lattice.hpp"

namespace nodal {

// Nodal measure of each half-open partition cell prod [i_j/m, (i_j+1)/m) R.
// Cell (i, j) lives at index j * m + i.
struct IncrementGrid {
  int d = 2;
  int m = 0;
  std::vector<double> cells;
  double R = 0.0;
  std::string model;
  std::uint64_t seed = 0;
  std::size_t degenerate_nodes = 0;  // grid nodes with |f| < 1e-9

  double cell_volume() const noexcept;  // (R/m)^d in field units
  double total() const;                 // compensated sum of all cells
};

struct ZeroCount {
  std::size_t count = 0;
  std::size_t degenerate_nodes = 0;
};

// Zeros of the piecewise-linear interpolant of a 1-d sample located in the
// half-open interval [lo, hi). A node with f == 0 is a zero at that node;
// otherwise each strict sign change between neighbours is one zero.
ZeroCount zero_count_1d(const FieldSample& sample, double lo, double hi);
ZeroCount zero_count_1d(const FieldSample& sample);

IncrementGrid zero_count_cells(const FieldSample& sample, int m);

// Marching squares: per fine cell, edge crossings by linear interpolation,
// joined into segments; saddles resolved by the sign of the corner average.
// Each segment's length goes to the partition cell containing its fine cell.
IncrementGrid nodal_length_cells(const FieldSample& sample, int m);
IncrementGrid nodal_length_cells_serial(const FieldSample& sample, int m);

// Dispatches on dimension: zero counts for d = 1, nodal length for d = 2.
IncrementGrid nodal_cells(const FieldSample& sample, int m);

// Merges blocks of cells into a coarser partition; coarse_m must divide m.
IncrementGrid coarsen(const IncrementGrid& inc, int coarse_m);

// Partition function t -> nu([0, t]) on the (m+1)^d lattice.
Lattice cumulative(const IncrementGrid& inc);
Lattice cumulative_cells(int d, int m, std::span<const double> cells);

// Lattice-aligned rectangle prod [lo_j, hi_j] given by lattice indices.
struct LatticeRect {
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{0, 0};
};

// Rectangle given in [0,1]^d coordinates; corners must lie on the lattice.
struct Rect {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
};

// Inclusion-exclusion of the 2^d corner values.
double rectangle_increment(const Lattice& lattice, const LatticeRect& rect);
double rectangle_increment(const Lattice& lattice, const Rect& rect);
LatticeRect to_lattice(const Rect& rect, int d, int m);

struct XiField {
  Lattice xi;
  double gamma2 = 0.0;
  double rho1 = 0.0;
  double R = 0.0;

  int m() const noexcept { return xi.m; }
  int d() const noexcept { return xi.d; }
};

// (nu(cell) - rho1 Vol(cell)) / (sqrt(gamma2) R^{d/2}) for every cell.
std::vector<double> centered_cells(const IncrementGrid& inc, double rho1, double gamma2);

XiField center_and_rescale(const IncrementGrid& inc, double rho1, double gamma2);

// Riemann pairing sum_cells phi(center) * centered cell; phi has one entry per
// cell, in cell order.
double pair_with_test_function(const IncrementGrid& inc, std::span<const double> phi, double rho1, double gamma2);

// phi sampled at the m^d cell centers of [0,1]^d.
template <class Fn>
std::vector<double> sample_at_cell_centers(int d, int m, Fn&& phi) {
  std::vector<double> out;
  const int rows = d == 1 ? 1 : m;
  out.reserve(static_cast<std::size_t>(rows) * m);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < m; ++i) {
      const double x = (i + 0.5) / m;
      const double y = (j + 0.5) / m;
      out.push_back(d == 1 ? phi(x, 0.0) : phi(x, y));
    }
  }
  return out;
}

}  // namespace nodal
