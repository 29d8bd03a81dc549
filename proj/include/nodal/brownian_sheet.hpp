#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodal/lattice.hpp"

namespace nodal {

// A curve parameter in (1, +inf]. Infinity is a flag, not a large number,
// because the curve constants follow separate formulas there.
struct CurveParam {
  bool infinite = false;
  double value = 0.0;

  static CurveParam inf() { return {true, 0.0}; }
  static CurveParam of(double v) { return {false, v}; }
  // 1/a, with 1/inf = 0.
  double reciprocal() const noexcept { return infinite ? 0.0 : 1.0 / value; }
  std::string str() const;
};

// Accepts "inf", "infinity", "+inf" or a number.
CurveParam parse_curve_param(const std::string& text);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Polygonal curve from (0,1) along y = 1 - x/a to the break (k, 1 - k/a),
// then along y = b - b x down to (1,0).
struct CurveSpec {
  CurveParam a;
  CurveParam b;
  double k = 1.0;
  double c = 1.0;
  std::array<Point2, 3> vertices{};
};

// (k, c) for a, b in (1, inf].
std::array<double, 2> yeh_constants(CurveParam a, CurveParam b);
CurveSpec make_curve(CurveParam a, CurveParam b);

// P[sup_{L(a,b)} W <= lambda] for the standard Brownian sheet on [0,1]^2.
double yeh_H(CurveParam a, CurveParam b, double lambda);
double yeh_H(const CurveSpec& curve, double lambda);
// 1 - 3 Phi(-lambda) + e^{4 lambda^2} Phi(-3 lambda): the boundary of the square.
double yeh_H_boundary(double lambda);

// Brownian sheet on the lattice {0, 1/n, ..., 1}^d (d = 1 or 2).
struct SheetSample {
  Lattice field;
  std::uint64_t seed = 0;
  int n() const noexcept { return field.m; }
  int d() const noexcept { return field.d; }
};

// Cell increments are i.i.d. N(0, n^{-d}), one RNG stream per lattice row,
// so the parallel and serial versions agree bit for bit.
SheetSample sample_sheet(int n, int d, std::uint64_t seed);
SheetSample sample_sheet_serial(int n, int d, std::uint64_t seed);

// Values of a 2-d sheet on the top edge W(i/n, 1) and right edge W(1, j/n),
// drawn exactly in O(n) from column and row sums of the cell increments.
struct SheetEdges {
  std::vector<double> top;    // i = 0..n
  std::vector<double> right;  // j = 0..n
  std::uint64_t seed = 0;
};
SheetEdges sample_sheet_edges(int n, std::uint64_t seed);
// Edges of the sheet obtained by merging cells in pairs.
SheetEdges halve(const SheetEdges& edges);
double boundary_sup(const SheetEdges& edges);

// Sup of the bilinear interpolant of a 2-d lattice field along the curve.
// Candidate points: the three vertices, samples_per_segment uniform points per
// segment, every crossing with a lattice line, and the interior maximum of the
// interpolant on each cell piece.
double sup_on_curve(const Lattice& field, const CurveSpec& curve, int samples_per_segment = 64);

// Sup of a 1-d lattice path over [0,1].
double sup_on_interval(const Lattice& field);

// Unbiased Monte Carlo estimate of P[sup_{L(a,b)} W <= lambda] for each lambda.
// Along the curve W(x, y) = y B(x/y) for a standard Brownian motion B, and each
// segment maps to a linear barrier for B (or for its time reversal), so the
// exact Brownian-bridge non-crossing probability between skeleton points gives
// a conditional probability with no discretization bias.
struct CurveCdfEstimate {
  std::vector<double> lambda;
  std::vector<double> cdf;
  std::vector<double> se;
};
CurveCdfEstimate curve_sup_cdf(const CurveSpec& curve, std::span<const double> lambdas, int paths, int steps,
                               std::uint64_t seed);

}  // namespace nodal
