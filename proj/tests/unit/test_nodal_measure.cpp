#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "nodal/errors.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/nodal_measure.hpp"
#include "nodal/rng.hpp"

using namespace nodal;

namespace {

constexpr double kPi = 3.14159265358979323846;

FieldSample synthetic(int d, double R, double h, FieldFunction f) {
  return evaluate_field(std::move(f), make_grid(d, R, h));
}

FieldSample circle(double rho, double h, double cx, double cy) {
  return synthetic(2, 3.0 * rho, h, [=](std::span<const double> x) {
    const double dx = x[0] - cx, dy = x[1] - cy;
    return dx * dx + dy * dy - rho * rho;
  });
}

IncrementGrid random_increments(int d, int m, std::uint64_t seed) {
  Engine e = make_engine(seed);
  std::exponential_distribution<double> ex(1.0);
  IncrementGrid inc;
  inc.d = d;
  inc.m = m;
  inc.R = 10.0;
  inc.cells.resize(d == 1 ? m : m * m);
  for (double& c : inc.cells) c = ex(e);
  return inc;
}

}  // namespace

TEST(ZeroCount, SineHasTwoZerosOnHalfOpenInterval) {
  const auto f = synthetic(1, 1.0, 0.001, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  EXPECT_EQ(zero_count_1d(f).count, 2u);
  EXPECT_EQ(zero_count_cells(f, 10).total(), 2.0);
}

TEST(ZeroCount, ConstantSignHasNone) {
  const auto f = synthetic(1, 5.0, 0.01, [](std::span<const double> x) { return 2.0 + std::cos(x[0]); });
  EXPECT_EQ(zero_count_1d(f).count, 0u);
}

TEST(ZeroCount, CellsAgreeWithIntervalCounts) {
  const auto model = make_model("bargmann-fock", 1);
  const auto f = sample_field(plan_embedding(model, make_grid(1, 50.0, 0.05)), 17);
  const auto inc = zero_count_cells(f, 10);
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ(inc.cells[c], static_cast<double>(zero_count_1d(f, 5.0 * c, 5.0 * (c + 1)).count)) << c;
  }
  EXPECT_EQ(inc.total(), static_cast<double>(zero_count_1d(f).count));
}

TEST(ZeroCount, DegenerateNodesAreCounted) {
  const auto f = synthetic(1, 1.0, 0.25, [](std::span<const double> x) { return x[0] - 0.5; });
  EXPECT_EQ(zero_count_1d(f).degenerate_nodes, 1u);
  EXPECT_EQ(zero_count_1d(f).count, 1u);
}

TEST(NodalLength, StraightLineIsExact) {
  const double R = 7.0;
  for (int m : {1, 7, 35}) {
    const auto f = synthetic(2, R, 0.1, [R](std::span<const double> x) { return x[0] - 0.5 * R + 0.013; });
    EXPECT_NEAR(nodal_length_cells(f, m).total(), R, 1e-9);
  }
  // Oblique line y = 0.3 x + 1 across a 10 x 10 box.
  const auto f = synthetic(2, 10.0, 0.05, [](std::span<const double> x) { return x[1] - 0.3 * x[0] - 1.0; });
  EXPECT_NEAR(nodal_length_cells(f, 4).total(), 10.0 * std::hypot(1.0, 0.3), 1e-9);
}

TEST(NodalLength, CircleWithinOnePercent) {
  const double rho = 2.0;
  const auto f = circle(rho, 0.01 * rho, 3.0 * rho / 2 + 0.0123, 3.0 * rho / 2 - 0.0311);
  const double L = nodal_length_cells(f, 1).total();
  EXPECT_NEAR(L, 2 * kPi * rho, 0.01 * 2 * kPi * rho);
}

TEST(NodalLength, SerialAndParallelAgreeExactly) {
  const auto model = make_model("bargmann-fock", 2);
  const auto f = sample_field(plan_embedding(model, make_grid(2, 10.0, 0.05)), 4);
  const auto a = nodal_length_cells(f, 20), b = nodal_length_cells_serial(f, 20);
  EXPECT_EQ(a.cells, b.cells);
}

TEST(NodalLength, PartitionIsExactForRandomSyntheticFields) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng), w1 = 2 + u(rng), w2 = 2 + u(rng);
    const auto f = synthetic(2, 4.0, 0.05, [=](std::span<const double> x) {
      return std::sin(w1 * x[0] + a) * std::cos(w2 * x[1] + b) + 0.3 * c;
    });
    const auto fine = nodal_length_cells(f, 80);
    const auto coarse = nodal_length_cells(f, 4);
    EXPECT_NEAR(fine.total(), coarse.total(), 1e-12 * (1 + coarse.total()));
    for (double v : fine.cells) EXPECT_GE(v, 0.0);
  }
}

TEST(NodalLength, SaddleUsesCenterAverage) {
  // Corners (+1, -1, +2, -1): average positive, so 00 and 11 connect and the
  // two corner segments cut off 10 and 01.
  const auto f = synthetic(2, 1.0, 1.0, [](std::span<const double> x) {
    const int i = static_cast<int>(x[0] + 0.5), j = static_cast<int>(x[1] + 0.5);
    if (i == 0 && j == 0) return 1.0;
    if (i == 1 && j == 1) return 2.0;
    return -1.0;
  });
  const double L = nodal_length_cells(f, 1).total();
  // Crossings: bottom (0.5, 0), right (1, 1/3), top (1/3, 1), left (0, 0.5).
  const double expected = std::hypot(0.5, 1.0 / 3.0) + std::hypot(1.0 / 3.0, 0.5);
  EXPECT_NEAR(L, expected, 1e-14);
}

TEST(NodalLength, MisalignedPartitionIsRejected) {
  const auto f = synthetic(2, 1.0, 0.1, [](std::span<const double> x) { return x[0] - 0.5; });
  EXPECT_THROW(nodal_length_cells(f, 3), ConfigError);
  const auto g = synthetic(1, 1.0, 0.1, [](std::span<const double> x) { return x[0] - 0.5; });
  EXPECT_THROW(nodal_length_cells(g, 1), ConfigError);
}

TEST(Cumulative, ZeroIncrementsGiveZeroLattice) {
  IncrementGrid inc;
  inc.d = 2;
  inc.m = 4;
  inc.cells.assign(16, 0.0);
  const Lattice L = cumulative(inc);
  for (double v : L.values) EXPECT_EQ(v, 0.0);
}

TEST(Cumulative, SingleCornerCell) {
  IncrementGrid inc;
  inc.d = 2;
  inc.m = 5;
  inc.cells.assign(25, 0.0);
  inc.cells[0] = 1.0;
  const Lattice L = cumulative(inc);
  for (int j = 0; j <= 5; ++j) {
    for (int i = 0; i <= 5; ++i) EXPECT_EQ(L.at(i, j), (i >= 1 && j >= 1) ? 1.0 : 0.0);
  }
}

TEST(Cumulative, ConservesTotalAndIsMonotone) {
  for (int d : {1, 2}) {
    const auto inc = random_increments(d, 40, 5 + d);
    const Lattice L = cumulative(inc);
    const double corner = d == 1 ? L.at(40) : L.at(40, 40);
    EXPECT_NEAR(corner, inc.total(), 1e-9 * inc.total());
    if (d == 2) {
      for (int j = 0; j <= 40; ++j) {
        for (int i = 1; i <= 40; ++i) {
          EXPECT_GE(L.at(i, j), L.at(i - 1, j));
          EXPECT_GE(L.at(j, i), L.at(j, i - 1));
        }
      }
    }
  }
}

TEST(RectangleIncrement, MatchesDirectSums) {
  const int m = 16;
  const auto inc = random_increments(2, m, 3);
  const Lattice L = cumulative(inc);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, m);
  for (int t = 0; t < 200; ++t) {
    int x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    double direct = 0.0;
    for (int j = y0; j < y1; ++j) {
      for (int i = x0; i < x1; ++i) direct += inc.cells[j * m + i];
    }
    const double r = rectangle_increment(L, LatticeRect{{x0, y0}, {x1, y1}});
    EXPECT_NEAR(r, direct, 1e-9 * (1.0 + direct));
  }
  EXPECT_NEAR(rectangle_increment(L, Rect{{0, 0}, {1, 1}}), inc.total(), 1e-9 * inc.total());
  EXPECT_EQ(rectangle_increment(L, Rect{{0.25, 0.5}, {0.25, 1.0}}), 0.0);
  EXPECT_THROW(rectangle_increment(L, Rect{{0.1, 0.0}, {1.0, 1.0}}), ConfigError);
}

TEST(RectangleIncrement, AdjacentRectanglesAdd) {
  const auto inc = random_increments(2, 32, 8);
  const Lattice L = cumulative(inc);
  const LatticeRect A{{4, 6}, {12, 20}}, B{{12, 6}, {30, 20}}, U{{4, 6}, {30, 20}};
  const double u = rectangle_increment(L, U);
  EXPECT_NEAR(u, rectangle_increment(L, A) + rectangle_increment(L, B), 1e-9 * u);
}

TEST(CenterAndRescale, PerfectCenteringGivesZero) {
  IncrementGrid inc;
  inc.d = 2;
  inc.m = 10;
  inc.R = 20.0;
  const double rho1 = 0.7;
  inc.cells.assign(100, rho1 * inc.cell_volume());
  const XiField xi = center_and_rescale(inc, rho1, 0.33);
  for (double v : xi.xi.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(CenterAndRescale, EmptyBoxesVanishAndScalingIsRight) {
  const auto inc = random_increments(2, 8, 12);
  const double rho1 = 0.5, g2 = 0.4;
  const XiField xi = center_and_rescale(inc, rho1, g2);
  for (int k = 0; k <= 8; ++k) {
    EXPECT_EQ(xi.xi.at(0, k), 0.0);
    EXPECT_EQ(xi.xi.at(k, 0), 0.0);
  }
  const double expected = (inc.total() - rho1 * inc.R * inc.R) / (std::sqrt(g2) * inc.R);
  EXPECT_NEAR(xi.xi.at(8, 8), expected, 1e-12 * std::abs(expected) + 1e-12);
  EXPECT_THROW(center_and_rescale(inc, rho1, 0.0), ConfigError);
}

TEST(CenterAndRescale, IncrementsMatchRestrictedCentering) {
  const auto inc = random_increments(2, 16, 2);
  const double rho1 = 0.6, g2 = 0.3;
  const XiField xi = center_and_rescale(inc, rho1, g2);
  const auto centered = centered_cells(inc, rho1, g2);
  const LatticeRect A{{2, 3}, {9, 11}};
  double direct = 0.0;
  for (int j = 3; j < 11; ++j) {
    for (int i = 2; i < 9; ++i) direct += centered[j * 16 + i];
  }
  EXPECT_NEAR(rectangle_increment(xi.xi, A), direct, 1e-9 * (1 + std::abs(direct)));
}

TEST(Pairing, ConstantFunctionsAndShapes) {
  const auto inc = random_increments(2, 10, 4);
  const double rho1 = 0.5, g2 = 0.2;
  const XiField xi = center_and_rescale(inc, rho1, g2);
  const auto one = sample_at_cell_centers(2, 10, [](double, double) { return 1.0; });
  const auto zero = sample_at_cell_centers(2, 10, [](double, double) { return 0.0; });
  EXPECT_NEAR(pair_with_test_function(inc, one, rho1, g2), xi.xi.at(10, 10), 1e-10);
  EXPECT_EQ(pair_with_test_function(inc, zero, rho1, g2), 0.0);
  const std::vector<double> wrong(7, 1.0);
  EXPECT_THROW(pair_with_test_function(inc, wrong, rho1, g2), ConfigError);
}

TEST(Coarsen, PreservesTotalsAndBlocks) {
  const auto inc = random_increments(2, 12, 6);
  const auto c = coarsen(inc, 3);
  EXPECT_NEAR(c.total(), inc.total(), 1e-12 * inc.total());
  double block = 0.0;
  for (int j = 4; j < 8; ++j) {
    for (int i = 0; i < 4; ++i) block += inc.cells[j * 12 + i];
  }
  EXPECT_NEAR(c.cells[1 * 3 + 0], block, 1e-12 * block);
  EXPECT_THROW(coarsen(inc, 5), ConfigError);
}
