#include "nodal/nodal_measure.hpp"

#include <cmath>
#include <string>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr double kDegenerateNode = 1e-9;

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

int fine_per_cell(const GridSpec& grid, int m) {
  if (m < 1) throw ConfigError("partition resolution must be positive");
  if ((grid.n - 1) % m != 0) {
    throw ConfigError("partition resolution m = " + std::to_string(m) + " does not divide n - 1 = " +
                      std::to_string(grid.n - 1));
  }
  return (grid.n - 1) / m;
}

IncrementGrid empty_increments(const FieldSample& sample, int m) {
  IncrementGrid inc;
  inc.d = sample.grid.d;
  inc.m = m;
  inc.R = sample.grid.R;
  inc.model = sample.model;
  inc.seed = sample.seed;
  inc.cells.assign(sample.grid.d == 1 ? m : static_cast<std::size_t>(m) * m, 0.0);
  return inc;
}

std::size_t count_degenerate(std::span<const double> values) {
  std::size_t c = 0;
  for (double v : values) c += std::abs(v) < kDegenerateNode ? 1 : 0;
  return c;
}

struct Point {
  double x;
  double y;
};

// Crossing of the zero level on the edge from a (value fa) to b (value fb),
// in cell-local units.
Point edge_crossing(Point a, double fa, Point b, double fb) {
  const double t = fa / (fa - fb);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

double distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

// Nodal length inside one fine cell of unit side; the caller scales by h.
// Corners: v00 (0,0), v10 (1,0), v11 (1,1), v01 (0,1). Nonnegative values
// count as positive.
double cell_length(double v00, double v10, double v11, double v01) {
  const bool p00 = v00 >= 0.0, p10 = v10 >= 0.0, p11 = v11 >= 0.0, p01 = v01 >= 0.0;
  constexpr Point c00{0, 0}, c10{1, 0}, c11{1, 1}, c01{0, 1};

  Point pts[4];
  int k = 0;
  if (p00 != p10) { pts[k] = edge_crossing(c00, v00, c10, v10); ++k; }
  if (p10 != p11) { pts[k] = edge_crossing(c10, v10, c11, v11); ++k; }
  if (p01 != p11) { pts[k] = edge_crossing(c01, v01, c11, v11); ++k; }
  if (p00 != p01) { pts[k] = edge_crossing(c00, v00, c01, v01); ++k; }

  if (k == 0) return 0.0;
  if (k == 2) return distance(pts[0], pts[1]);

  // Saddle: all four edges crossed, pts ordered bottom, right, top, left.
  const bool center_positive = 0.25 * (v00 + v10 + v11 + v01) >= 0.0;
  if (center_positive == p00) {
    // v00 and v11 connected through the center: cut off corners 10 and 01.
    return distance(pts[0], pts[1]) + distance(pts[2], pts[3]);
  }
  return distance(pts[0], pts[3]) + distance(pts[1], pts[2]);
}

template <bool Parallel>
IncrementGrid length_cells_impl(const FieldSample& sample, int m) {
  if (sample.grid.d != 2) throw ConfigError("nodal length extraction needs a 2-d sample");
  const int q = fine_per_cell(sample.grid, m);
  IncrementGrid inc = empty_increments(sample, m);
  const int n = sample.grid.n;
  const double h = sample.grid.h;
  const double* f = sample.values.data();

  if constexpr (Parallel) {
    // Each thread owns whole partition rows, so every cell is accumulated by
    // one thread in the same order as the serial loop.
#pragma omp parallel for schedule(dynamic, 1)
    for (int py = 0; py < m; ++py) {
      double* row = inc.cells.data() + static_cast<std::size_t>(py) * m;
      for (int iy = py * q; iy < (py + 1) * q; ++iy) {
        const double* lo = f + static_cast<std::size_t>(iy) * n;
        const double* hi = lo + n;
        for (int ix = 0; ix < n - 1; ++ix) {
          const double len = cell_length(lo[ix], lo[ix + 1], hi[ix + 1], hi[ix]);
          if (len != 0.0) row[ix / q] += h * len;
        }
      }
    }
  } else {
    for (int iy = 0; iy < n - 1; ++iy) {
      const double* lo = f + static_cast<std::size_t>(iy) * n;
      const double* hi = lo + n;
      double* row = inc.cells.data() + static_cast<std::size_t>(iy / q) * m;
      for (int ix = 0; ix < n - 1; ++ix) {
        const double len = cell_length(lo[ix], lo[ix + 1], hi[ix + 1], hi[ix]);
        if (len != 0.0) row[ix / q] += h * len;
      }
    }
  }
  inc.degenerate_nodes = count_degenerate(sample.values);
  return inc;
}

}  // namespace

double IncrementGrid::cell_volume() const noexcept { return std::pow(R / m, d); }

double IncrementGrid::total() const {
  CompensatedSum s;
  for (double v : cells) s.add(v);
  return s.value();
}

ZeroCount zero_count_1d(const FieldSample& sample, double lo, double hi) {
  if (sample.grid.d != 1) throw ConfigError("zero counting needs a 1-d sample");
  ZeroCount out;
  const auto& v = sample.values;
  const int n = sample.grid.n;
  const double h = sample.grid.h;
  for (int i = 0; i < n; ++i) {
    const double x = sample.grid.coord(i);
    if (x >= lo && x < hi && std::abs(v[i]) < kDegenerateNode) ++out.degenerate_nodes;
    if (v[i] == 0.0) {
      if (x >= lo && x < hi) ++out.count;
      continue;
    }
    if (i + 1 < n && v[i + 1] != 0.0 && (v[i] > 0.0) != (v[i + 1] > 0.0)) {
      const double root = x + h * v[i] / (v[i] - v[i + 1]);
      if (root >= lo && root < hi) ++out.count;
    }
  }
  return out;
}

ZeroCount zero_count_1d(const FieldSample& sample) { return zero_count_1d(sample, 0.0, sample.grid.R); }

IncrementGrid zero_count_cells(const FieldSample& sample, int m) {
  if (sample.grid.d != 1) throw ConfigError("zero counting needs a 1-d sample");
  const int q = fine_per_cell(sample.grid, m);
  IncrementGrid inc = empty_increments(sample, m);
  const auto& v = sample.values;
  const int n = sample.grid.n;
  // Zeros at a node or strictly inside fine cell i belong to partition cell
  // i / q; the right end x = R is excluded.
  for (int i = 0; i + 1 < n; ++i) {
    if (v[i] == 0.0) {
      inc.cells[i / q] += 1.0;
    } else if (v[i + 1] != 0.0 && (v[i] > 0.0) != (v[i + 1] > 0.0)) {
      inc.cells[i / q] += 1.0;
    }
  }
  inc.degenerate_nodes = count_degenerate(v);
  return inc;
}

IncrementGrid nodal_length_cells(const FieldSample& sample, int m) { return length_cells_impl<true>(sample, m); }

IncrementGrid nodal_length_cells_serial(const FieldSample& sample, int m) {
  return length_cells_impl<false>(sample, m);
}

IncrementGrid nodal_cells(const FieldSample& sample, int m) {
  return sample.grid.d == 1 ? zero_count_cells(sample, m) : nodal_length_cells(sample, m);
}

IncrementGrid coarsen(const IncrementGrid& inc, int coarse_m) {
  if (coarse_m < 1 || inc.m % coarse_m != 0) {
    throw ConfigError("coarse resolution " + std::to_string(coarse_m) + " does not divide " + std::to_string(inc.m));
  }
  if (coarse_m == inc.m) return inc;
  const int q = inc.m / coarse_m;
  IncrementGrid out = inc;
  out.m = coarse_m;
  if (inc.d == 1) {
    out.cells.assign(coarse_m, 0.0);
    for (int i = 0; i < inc.m; ++i) out.cells[i / q] += inc.cells[i];
    return out;
  }
  out.cells.assign(static_cast<std::size_t>(coarse_m) * coarse_m, 0.0);
  for (int j = 0; j < inc.m; ++j) {
    for (int i = 0; i < inc.m; ++i) {
      out.cells[static_cast<std::size_t>(j / q) * coarse_m + i / q] += inc.cells[static_cast<std::size_t>(j) * inc.m + i];
    }
  }
  return out;
}

Lattice cumulative_cells(int d, int m, std::span<const double> cells) {
  Lattice lat;
  lat.d = d;
  lat.m = m;
  const int s = m + 1;
  if (d == 1) {
    lat.values.assign(s, 0.0);
    CompensatedSum acc;
    for (int i = 0; i < m; ++i) {
      acc.add(cells[i]);
      lat.values[i + 1] = acc.value();
    }
    return lat;
  }
  lat.values.assign(static_cast<std::size_t>(s) * s, 0.0);
  // Row prefix sums, then compensated accumulation down each column.
  std::vector<double> row_prefix(static_cast<std::size_t>(m) * s, 0.0);
  for (int j = 0; j < m; ++j) {
    CompensatedSum acc;
    for (int i = 0; i < m; ++i) {
      acc.add(cells[static_cast<std::size_t>(j) * m + i]);
      row_prefix[static_cast<std::size_t>(j) * s + i + 1] = acc.value();
    }
  }
  for (int i = 1; i <= m; ++i) {
    CompensatedSum acc;
    for (int j = 0; j < m; ++j) {
      acc.add(row_prefix[static_cast<std::size_t>(j) * s + i]);
      lat.at(i, j + 1) = acc.value();
    }
  }
  return lat;
}

Lattice cumulative(const IncrementGrid& inc) { return cumulative_cells(inc.d, inc.m, inc.cells); }

double rectangle_increment(const Lattice& lattice, const LatticeRect& rect) {
  for (int k = 0; k < lattice.d; ++k) {
    if (rect.lo[k] < 0 || rect.hi[k] > lattice.m || rect.lo[k] > rect.hi[k]) {
      throw ConfigError("rectangle outside the lattice");
    }
  }
  if (lattice.d == 1) return lattice.at(rect.hi[0]) - lattice.at(rect.lo[0]);
  return lattice.at(rect.hi[0], rect.hi[1]) - lattice.at(rect.lo[0], rect.hi[1]) -
         lattice.at(rect.hi[0], rect.lo[1]) + lattice.at(rect.lo[0], rect.lo[1]);
}

LatticeRect to_lattice(const Rect& rect, int d, int m) {
  auto index = [m](double t) {
    const double scaled = t * m;
    const double rounded = std::round(scaled);
    if (std::abs(rounded - scaled) > 1e-9 || std::abs(rounded / m - t) > 1e-12) {
      throw ConfigError("rectangle corner " + std::to_string(t) + " is not on the 1/" + std::to_string(m) +
                        " lattice");
    }
    return static_cast<int>(rounded);
  };
  LatticeRect out;
  for (int k = 0; k < d; ++k) {
    out.lo[k] = index(rect.lo[k]);
    out.hi[k] = index(rect.hi[k]);
  }
  return out;
}

double rectangle_increment(const Lattice& lattice, const Rect& rect) {
  return rectangle_increment(lattice, to_lattice(rect, lattice.d, lattice.m));
}

std::vector<double> centered_cells(const IncrementGrid& inc, double rho1, double gamma2) {
  if (!(gamma2 > 0.0)) throw ConfigError("gamma2 must be positive, got " + std::to_string(gamma2));
  const double expected = rho1 * inc.cell_volume();
  const double scale = 1.0 / (std::sqrt(gamma2) * std::pow(inc.R, 0.5 * inc.d));
  std::vector<double> out(inc.cells.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (inc.cells[i] - expected) * scale;
  return out;
}

XiField center_and_rescale(const IncrementGrid& inc, double rho1, double gamma2) {
  const std::vector<double> centered = centered_cells(inc, rho1, gamma2);
  XiField out;
  out.xi = cumulative_cells(inc.d, inc.m, centered);
  out.gamma2 = gamma2;
  out.rho1 = rho1;
  out.R = inc.R;
  return out;
}

double pair_with_test_function(const IncrementGrid& inc, std::span<const double> phi, double rho1, double gamma2) {
  if (phi.size() != inc.cells.size()) {
    throw ConfigError("test function has " + std::to_string(phi.size()) + " samples, expected " +
                      std::to_string(inc.cells.size()));
  }
  const std::vector<double> centered = centered_cells(inc, rho1, gamma2);
  CompensatedSum s;
  for (std::size_t i = 0; i < centered.size(); ++i) s.add(phi[i] * centered[i]);
  return s.value();
}

}  // namespace nodal
