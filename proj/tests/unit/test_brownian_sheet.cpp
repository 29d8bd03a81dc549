#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "nodal/brownian_sheet.hpp"
#include "nodal/errors.hpp"
#include "nodal/normal.hpp"
#include "nodal/rng.hpp"
#include "nodal/stats.hpp"

using namespace nodal;

namespace {

constexpr double kPi = 3.14159265358979323846;

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Condition on the sheet value w at the break point (xk, yk). Along each
// segment W is a rescaled Brownian bridge under a straight barrier that
// meets lambda at both ends of the curve, so each segment contributes
// 1 - exp(-2 lambda (lambda - w) / length) with length xk or yk.
double curve_cdf_oracle(CurveParam a, CurveParam b, double lambda) {
  const auto [k, c] = yeh_constants(a, b);
  (void)c;
  const double xk = k, yk = 1.0 - k * a.reciprocal();
  const double sd = std::sqrt(xk * yk);
  if (lambda <= 0.0) return 0.0;
  auto integrand = [&](double w) {
    const double gap = lambda - w;
    const double p = (1.0 - std::exp(-2.0 * lambda * gap / xk)) * (1.0 - std::exp(-2.0 * lambda * gap / yk));
    return p * std::exp(-0.5 * w * w / (sd * sd)) / (sd * std::sqrt(2.0 * kPi));
  };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(integrand, -12.0 * sd, lambda, 15, 1e-14);
}

std::vector<std::pair<CurveParam, CurveParam>> some_curves() {
  std::vector<std::pair<CurveParam, CurveParam>> out{{CurveParam::inf(), CurveParam::inf()},
                                                     {CurveParam::of(2.0), CurveParam::of(3.0)},
                                                     {CurveParam::inf(), CurveParam::of(1.5)},
                                                     {CurveParam::of(4.0), CurveParam::inf()}};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 16; ++i) {
    // Map to (1, inf): 1 + 1/u - 1 concentrates near 1 and far away.
    out.push_back({CurveParam::of(1.0 + u(rng) / (1.0 - u(rng) + 1e-3) + 1e-3),
                   CurveParam::of(1.0 + 20.0 * u(rng) + 1e-3)});
  }
  return out;
}

}  // namespace

TEST(Normal, CdfValues) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-15);
  EXPECT_NEAR(normal_cdf(-10.0) / 7.619853024160527e-24, 1.0, 1e-12);
  for (double z : {0.1, 0.7, 2.3, 5.0}) EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
  EXPECT_NEAR(normal_pdf(1.0), std::exp(-0.5) / std::sqrt(2.0 * kPi), 1e-16);
}

TEST(Normal, ScaledTailAndExpTimesCdf) {
  for (double x : {-3.0, 0.0, 1.0, 4.0, 8.0}) {
    EXPECT_NEAR(normal_tail_scaled(x), std::exp(0.5 * x * x) * phi(-x), 1e-12 * std::exp(0.5 * x * x));
  }
  // Mills ratio limit.
  EXPECT_NEAR(normal_tail_scaled(1e4) * 1e4 * std::sqrt(2.0 * kPi), 1.0, 1e-6);
  for (double lam : {0.0, 0.5, 1.5, 3.0}) {
    EXPECT_NEAR(exp_times_cdf(4.0, -3.0, lam), std::exp(4.0 * lam * lam) * phi(-3.0 * lam), 1e-12);
    EXPECT_NEAR(exp_times_cdf(-1.0, 0.5, lam), std::exp(-lam * lam) * phi(0.5 * lam), 1e-14);
  }
  // e^{1600} Phi(-60) overflows and underflows when split.
  const double far = exp_times_cdf(4.0, -3.0, 20.0);
  EXPECT_NEAR(far / (std::exp(-200.0) * normal_tail_scaled(60.0)), 1.0, 1e-12);
}

TEST(Yeh, Constants) {
  auto [k1, c1] = yeh_constants(CurveParam::inf(), CurveParam::inf());
  EXPECT_EQ(k1, 1.0);
  EXPECT_EQ(c1, 1.0);
  auto [k2, c2] = yeh_constants(CurveParam::inf(), CurveParam::of(4.0));
  EXPECT_DOUBLE_EQ(k2, 0.75);
  EXPECT_DOUBLE_EQ(c2, 0.75);
  auto [k3, c3] = yeh_constants(CurveParam::of(2.0), CurveParam::of(3.0));
  EXPECT_DOUBLE_EQ(k3, 0.8);
  EXPECT_DOUBLE_EQ(c3, 4.0 / 3.0);
  auto [k4, c4] = yeh_constants(CurveParam::of(3.0), CurveParam::inf());
  EXPECT_DOUBLE_EQ(k4, 1.0);
  EXPECT_DOUBLE_EQ(c4, 1.5);
  // The break point sits on both lines.
  for (const auto& [a, b] : some_curves()) {
    const CurveSpec cs = make_curve(a, b);
    const Point2 v = cs.vertices[1];
    EXPECT_NEAR(v.x + v.y * b.reciprocal(), 1.0, 1e-12);
    EXPECT_NEAR(v.y + v.x * a.reciprocal(), 1.0, 1e-12);
  }
}

TEST(Yeh, MatchesConditionalOracle) {
  for (const auto& [a, b] : some_curves()) {
    for (double lam : {0.1, 0.5, 1.0, 1.7, 2.5, 4.0}) {
      EXPECT_NEAR(yeh_H(a, b, lam), curve_cdf_oracle(a, b, lam), 1e-10) << a.str() << " " << b.str() << " " << lam;
    }
  }
  EXPECT_NEAR(yeh_H(CurveParam::of(2.0), CurveParam::of(3.0), 1.0), 0.7325142918792884, 1e-12);
}

TEST(Yeh, LargeParametersMatchBoundaryFormula) {
  const CurveParam big = CurveParam::of(1e6);
  for (double lam = 0.0; lam <= 6.0; lam += 0.05) {
    EXPECT_NEAR(yeh_H(big, big, lam), yeh_H_boundary(lam), 1e-6) << lam;
    EXPECT_NEAR(yeh_H(CurveParam::inf(), CurveParam::inf(), lam), yeh_H_boundary(lam), 1e-13) << lam;
  }
  EXPECT_NEAR(yeh_H_boundary(1.0), 0.59773617346601482, 1e-13);
}

TEST(Yeh, IsAValidCdf) {
  for (const auto& [a, b] : some_curves()) {
    EXPECT_NEAR(yeh_H(a, b, 0.0), 0.0, 1e-14);
    EXPECT_NEAR(yeh_H(a, b, 12.0), 1.0, 1e-14);
    double prev = -1.0;
    for (double lam = 0.0; lam <= 8.0; lam += 0.01) {
      const double h = yeh_H(a, b, lam);
      EXPECT_GE(h, prev - 1e-15) << a.str() << " " << b.str() << " " << lam;
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, 1.0);
      prev = h;
    }
  }
}

TEST(Yeh, TailProductIsBounded) {
  for (const auto& [a, b] : some_curves()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double lam = 3.0; lam <= 6.0; lam += 0.05) {
      const double t = lam * std::exp(0.5 * lam * lam) * (1.0 - yeh_H(a, b, lam));
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    // Curves whose variance peaks below 1 have lighter tails, so only the
    // upper bound is universal.
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 10.0) << a.str() << " " << b.str();
  }
}

TEST(Yeh, CurveParameterParsing) {
  EXPECT_TRUE(parse_curve_param("inf").infinite);
  EXPECT_TRUE(parse_curve_param("+inf").infinite);
  EXPECT_TRUE(parse_curve_param("infinity").infinite);
  EXPECT_DOUBLE_EQ(parse_curve_param("2.5").value, 2.5);
  EXPECT_THROW(make_curve(parse_curve_param("1"), CurveParam::inf()), ConfigError);
  EXPECT_THROW(make_curve(CurveParam::inf(), parse_curve_param("0.5")), ConfigError);
  EXPECT_THROW(parse_curve_param("abc"), ConfigError);
  EXPECT_THROW(yeh_H(CurveParam::inf(), CurveParam::inf(), -0.1), ConfigError);
}

TEST(Yeh, BridgeEstimatorMatchesFormula) {
  const std::vector<double> lams{0.5, 1.0, 1.5, 2.0};
  for (const auto& [a, b] : {std::pair{CurveParam::of(2.0), CurveParam::of(3.0)},
                             std::pair{CurveParam::inf(), CurveParam::inf()}}) {
    const CurveSpec cs = make_curve(a, b);
    const CurveCdfEstimate e = curve_sup_cdf(cs, lams, 20000, 16, 77);
    for (std::size_t i = 0; i < lams.size(); ++i) {
      EXPECT_NEAR(e.cdf[i], yeh_H(cs, lams[i]), 4.0 * e.se[i] + 1e-12) << lams[i];
    }
  }
}

TEST(Sheet, ParallelMatchesSerial) {
  for (int d : {1, 2}) {
    const auto a = sample_sheet(300, d, 17), b = sample_sheet_serial(300, d, 17);
    EXPECT_EQ(a.field.values, b.field.values);
    EXPECT_EQ(a.n(), 300);
    EXPECT_EQ(a.d(), d);
  }
  EXPECT_EQ(sample_sheet(3000, 1, 3).field.values, sample_sheet_serial(3000, 1, 3).field.values);
}

TEST(Sheet, VanishesOnTheAxes) {
  const auto s = sample_sheet(16, 2, 1);
  for (int i = 0; i <= 16; ++i) {
    EXPECT_EQ(s.field.at(i, 0), 0.0);
    EXPECT_EQ(s.field.at(0, i), 0.0);
  }
}

TEST(Sheet, CovarianceIsProductOfMinima) {
  const int n = 8;
  std::vector<double> a, b, c;
  for (int s = 0; s < 20000; ++s) {
    const auto w = sample_sheet(n, 2, derive_seed(9, s));
    a.push_back(w.field.at(4, 6));  // (1/2, 3/4)
    b.push_back(w.field.at(8, 2));  // (1, 1/4)
    c.push_back(w.field.at(8, 8));
  }
  const MeanEstimate va = variance_estimate(a), vc = variance_estimate(c), cab = covariance_estimate(a, b);
  EXPECT_NEAR(va.mean, 0.375, 4.0 * va.se);
  EXPECT_NEAR(vc.mean, 1.0, 4.0 * vc.se);
  EXPECT_NEAR(cab.mean, 0.125, 4.0 * cab.se);
}

TEST(Sheet, EdgesHaveSheetCovariance) {
  const int n = 8;
  std::vector<double> top, right, corner;
  for (int s = 0; s < 20000; ++s) {
    const auto e = sample_sheet_edges(n, derive_seed(10, s));
    ASSERT_EQ(e.top[0], 0.0);
    ASSERT_EQ(e.right[0], 0.0);
    ASSERT_EQ(e.top[n], e.right[n]);
    top.push_back(e.top[4]);      // W(1/2, 1)
    right.push_back(e.right[2]);  // W(1, 1/4)
    corner.push_back(e.top[n]);
  }
  const MeanEstimate vt = variance_estimate(top), vr = variance_estimate(right);
  const MeanEstimate ctr = covariance_estimate(top, right), cc = covariance_estimate(corner, right);
  EXPECT_NEAR(vt.mean, 0.5, 4.0 * vt.se);
  EXPECT_NEAR(vr.mean, 0.25, 4.0 * vr.se);
  EXPECT_NEAR(ctr.mean, 0.125, 4.0 * ctr.se);
  EXPECT_NEAR(cc.mean, 0.25, 4.0 * cc.se);
}

TEST(Sheet, HalvingKeepsEvenNodes) {
  const auto e = sample_sheet_edges(64, 4);
  const auto h = halve(e);
  ASSERT_EQ(h.top.size(), 33u);
  for (int i = 0; i <= 32; ++i) {
    EXPECT_EQ(h.top[i], e.top[2 * i]);
    EXPECT_EQ(h.right[i], e.right[2 * i]);
  }
  EXPECT_LE(boundary_sup(h), boundary_sup(e));
  EXPECT_THROW(halve(sample_sheet_edges(5, 1)), ConfigError);
}

TEST(Sheet, EdgeSupMatchesFullSheetInLaw) {
  // Same discretization, two samplers: two-sample KS.
  const int n = 64;
  std::vector<double> full, edge;
  for (int s = 0; s < 3000; ++s) {
    const auto w = sample_sheet(n, 2, derive_seed(20, s));
    double m = -1e300;
    for (int i = 0; i <= n; ++i) m = std::max({m, w.field.at(i, n), w.field.at(n, i)});
    full.push_back(m);
    edge.push_back(boundary_sup(sample_sheet_edges(n, derive_seed(21, s))));
  }
  EXPECT_GT(ks_two_sample(full, edge).p_value, 0.01);
}

TEST(Sheet, OneDimensionalSupIsReflectedNormal) {
  std::vector<double> sups;
  for (int s = 0; s < 2000; ++s) sups.push_back(sup_on_interval(sample_sheet(4096, 1, derive_seed(6, s)).field));
  const KsResult ks = ks_statistic(sups, [](double x) { return x <= 0.0 ? 0.0 : 2.0 * phi(x) - 1.0; });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(SupOnCurve, ConstantAndLinearFields) {
  Lattice f;
  f.d = 2;
  f.m = 16;
  f.values.assign(17 * 17, 0.37);
  EXPECT_DOUBLE_EQ(sup_on_curve(f, make_curve(CurveParam::of(2.0), CurveParam::of(3.0))), 0.37);
  // Bilinear interpolation reproduces x + y; its max on L(2,3) is at the break.
  for (int j = 0; j <= 16; ++j) {
    for (int i = 0; i <= 16; ++i) f.at(i, j) = (i + j) / 16.0;
  }
  EXPECT_NEAR(sup_on_curve(f, make_curve(CurveParam::of(2.0), CurveParam::of(3.0))), 1.4, 1e-12);
  EXPECT_NEAR(sup_on_curve(f, make_curve(CurveParam::inf(), CurveParam::inf())), 2.0, 1e-12);
}

TEST(SupOnCurve, MaximumInsideACell) {
  Lattice f;
  f.d = 2;
  f.m = 2;
  f.values.assign(9, 0.0);
  f.at(1, 2) = 1.0;  // (1/2, 1) on the top edge
  EXPECT_NEAR(sup_on_curve(f, make_curve(CurveParam::inf(), CurveParam::inf())), 1.0, 1e-12);
  // One cell with W(1,0) = -2, W(1,1) = 1. Along y = 1 - x/2 the interpolant
  // is x - 3x^2/2, peaking at x = 1/3 between the five uniform samples.
  Lattice g;
  g.d = 2;
  g.m = 1;
  g.values = {0.0, -2.0, 0.0, 1.0};
  const CurveSpec curve = make_curve(CurveParam::of(2.0), CurveParam::of(2.0));
  EXPECT_NEAR(sup_on_curve(g, curve, 5), 1.0 / 6.0, 1e-12);
}

TEST(SupOnCurve, Errors) {
  Lattice f;
  f.d = 1;
  f.m = 4;
  f.values.assign(5, 0.0);
  EXPECT_THROW(sup_on_curve(f, make_curve(CurveParam::inf(), CurveParam::inf())), ConfigError);
  Lattice g;
  g.d = 2;
  g.m = 4;
  g.values.assign(25, 0.0);
  EXPECT_THROW(sup_on_interval(g), ConfigError);
  EXPECT_THROW(sample_sheet(0, 2, 1), ConfigError);
  EXPECT_THROW(sample_sheet(4, 3, 1), ConfigError);
}
