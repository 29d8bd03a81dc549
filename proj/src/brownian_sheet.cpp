#include "nodal/brownian_sheet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nodal/errors.hpp"
#include "nodal/normal.hpp"
#include "nodal/rng.hpp"

namespace nodal {

namespace {

void check_param(CurveParam p, const char* name) {
  if (p.infinite) return;
  if (!(p.value > 1.0) || !std::isfinite(p.value)) {
    throw ConfigError(std::string("curve parameter ") + name + " must lie in (1, inf], got " + p.str());
  }
}

constexpr int kChunk1d = 1024;

template <bool Parallel>
SheetSample sheet_impl(int n, int d, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sheet resolution must be at least 1");
  if (d != 1 && d != 2) throw ConfigError("sheet dimension must be 1 or 2");
  SheetSample out;
  out.seed = seed;
  out.field.d = d;
  out.field.m = n;
  const int s = n + 1;

  if (d == 1) {
    std::vector<double> inc(n);
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    const int chunks = (n + kChunk1d - 1) / kChunk1d;
#pragma omp parallel for schedule(static) if (Parallel)
    for (int c = 0; c < chunks; ++c) {
      Engine engine = make_engine(derive_seed(seed, c));
      std::normal_distribution<double> normal(0.0, sd);
      for (int i = c * kChunk1d; i < std::min(n, (c + 1) * kChunk1d); ++i) inc[i] = normal(engine);
    }
    out.field.values.assign(s, 0.0);
    for (int i = 0; i < n; ++i) out.field.values[i + 1] = out.field.values[i] + inc[i];
    return out;
  }

  auto& w = out.field.values;
  w.assign(static_cast<std::size_t>(s) * s, 0.0);
  const double sd = 1.0 / n;
  // Row j of cells fills lattice row j + 1 with its prefix sums.
#pragma omp parallel for schedule(static) if (Parallel)
  for (int j = 0; j < n; ++j) {
    Engine engine = make_engine(derive_seed(seed, j));
    std::normal_distribution<double> normal(0.0, sd);
    double* row = w.data() + static_cast<std::size_t>(j + 1) * s;
    for (int i = 0; i < n; ++i) row[i + 1] = row[i] + normal(engine);
  }
  // Accumulate rows upwards; each entry sees the same additions in the same
  // order whatever the thread split.
#pragma omp parallel if (Parallel)
  for (int j = 1; j < s; ++j) {
    const double* below = w.data() + static_cast<std::size_t>(j - 1) * s;
    double* row = w.data() + static_cast<std::size_t>(j) * s;
#pragma omp for schedule(static)
    for (int i = 0; i < s; ++i) row[i] += below[i];
  }
  return out;
}

double bilinear(const Lattice& f, double x, double y) {
  const int m = f.m;
  x = std::clamp(x, 0.0, 1.0) * m;
  y = std::clamp(y, 0.0, 1.0) * m;
  const int i = std::min(static_cast<int>(x), m - 1);
  const int j = std::min(static_cast<int>(y), m - 1);
  const double u = x - i, v = y - j;
  return (1 - u) * (1 - v) * f.at(i, j) + u * (1 - v) * f.at(i + 1, j) + u * v * f.at(i + 1, j + 1) +
         (1 - u) * v * f.at(i, j + 1);
}

double segment_sup(const Lattice& f, Point2 a, Point2 b, int samples) {
  const int m = f.m;
  std::vector<double> ts{0.0, 1.0};
  for (int s = 1; s < samples; ++s) ts.push_back(static_cast<double>(s) / samples);
  auto add_crossings = [&](double from, double to) {
    if (from == to) return;
    const double lo = std::min(from, to), hi = std::max(from, to);
    for (int i = static_cast<int>(std::ceil(lo * m)); i <= static_cast<int>(std::floor(hi * m)); ++i) {
      const double t = (static_cast<double>(i) / m - from) / (to - from);
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  };
  add_crossings(a.x, b.x);
  add_crossings(a.y, b.y);
  std::sort(ts.begin(), ts.end());

  auto at = [&](double t) { return bilinear(f, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)); };
  double best = -std::numeric_limits<double>::infinity();
  double prev = at(ts[0]);
  best = std::max(best, prev);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double t0 = ts[i - 1], t1 = ts[i];
    const double next = at(t1);
    best = std::max(best, next);
    if (t1 - t0 > 1e-15) {
      // The interpolant is quadratic along the piece; check its vertex.
      const double tm = 0.5 * (t0 + t1);
      const double mid = at(tm);
      const double curvature = prev - 2.0 * mid + next;
      if (curvature < 0.0) {
        const double s = 0.5 * (prev - next) / curvature;  // offset in half-widths
        if (std::abs(s) < 1.0) best = std::max(best, at(tm + s * 0.5 * (t1 - t0)));
      }
    }
    prev = next;
  }
  return best;
}

}  // namespace

std::string CurveParam::str() const {
  if (infinite) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

CurveParam parse_curve_param(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity" || text == "Inf") return CurveParam::inf();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse curve parameter '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("cannot parse curve parameter '" + text + "'");
  if (std::isinf(v) && v > 0) return CurveParam::inf();
  return CurveParam::of(v);
}

std::array<double, 2> yeh_constants(CurveParam a, CurveParam b) {
  check_param(a, "a");
  check_param(b, "b");
  if (a.infinite && b.infinite) return {1.0, 1.0};
  if (a.infinite) {
    const double v = (b.value - 1.0) / b.value;
    return {v, v};
  }
  if (b.infinite) return {1.0, a.value / (a.value - 1.0)};
  const double av = a.value, bv = b.value;
  return {av * (bv - 1.0) / (av * bv - 1.0), av * (bv - 1.0) / (bv * (av - 1.0))};
}

CurveSpec make_curve(CurveParam a, CurveParam b) {
  const auto [k, c] = yeh_constants(a, b);
  CurveSpec curve;
  curve.a = a;
  curve.b = b;
  curve.k = k;
  curve.c = c;
  curve.vertices = {Point2{0.0, 1.0}, Point2{k, 1.0 - k * a.reciprocal()}, Point2{1.0, 0.0}};
  return curve;
}

double yeh_H(const CurveSpec& curve, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and nonnegative, got " + std::to_string(lambda));
  }
  const double ia = curve.a.reciprocal(), ib = curve.b.reciprocal();
  const double c = curve.c, sc = std::sqrt(c);
  // Four terms, each written with 1/a and 1/b so infinite parameters are exact.
  const double t1 = normal_cdf(lambda * (1.0 + c * ia) / sc);
  const double t2 = exp_times_cdf(-2.0 * ia, (c * ia - 1.0) / sc, lambda);
  const double t3 = exp_times_cdf(-2.0 * ib, (ib - c) / sc, lambda);
  const double t4 = exp_times_cdf(-2.0 * (ia + ib - 2.0), (ib - c - 2.0) / sc, lambda);
  return std::clamp(t1 - t2 - t3 + t4, 0.0, 1.0);
}

double yeh_H(CurveParam a, CurveParam b, double lambda) { return yeh_H(make_curve(a, b), lambda); }

double yeh_H_boundary(double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  return std::clamp(1.0 - 3.0 * normal_cdf(-lambda) + exp_times_cdf(4.0, -3.0, lambda), 0.0, 1.0);
}

SheetSample sample_sheet(int n, int d, std::uint64_t seed) { return sheet_impl<true>(n, d, seed); }
SheetSample sample_sheet_serial(int n, int d, std::uint64_t seed) { return sheet_impl<false>(n, d, seed); }

SheetEdges sample_sheet_edges(int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sheet resolution must be at least 1");
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  std::normal_distribution<double> normal(0.0, sd);
  // Column sums are i.i.d. N(0, 1/n). Row sums are i.i.d. N(0, 1/n) with
  // their mean replaced by that of the column sums, which reproduces
  // Cov(column_i, row_j) = n^{-2} and the shared total.
  std::vector<double> cols(n), rows(n);
  Engine ec = make_engine(derive_seed(seed, 0));
  for (double& v : cols) v = normal(ec);
  Engine er = make_engine(derive_seed(seed, 1));
  for (double& v : rows) v = normal(er);
  double col_mean = 0.0, row_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    col_mean += cols[i];
    row_mean += rows[i];
  }
  col_mean /= n;
  row_mean /= n;
  SheetEdges out;
  out.seed = seed;
  out.top.assign(n + 1, 0.0);
  out.right.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    out.top[i + 1] = out.top[i] + cols[i];
    out.right[i + 1] = out.right[i] + (rows[i] - row_mean + col_mean);
  }
  out.right[n] = out.top[n];
  return out;
}

SheetEdges halve(const SheetEdges& edges) {
  const int n = static_cast<int>(edges.top.size()) - 1;
  if (n % 2 != 0) throw ConfigError("cannot halve an odd sheet resolution");
  SheetEdges out;
  out.seed = edges.seed;
  for (int i = 0; i <= n; i += 2) {
    out.top.push_back(edges.top[i]);
    out.right.push_back(edges.right[i]);
  }
  return out;
}

double boundary_sup(const SheetEdges& edges) {
  return std::max(*std::max_element(edges.top.begin(), edges.top.end()),
                  *std::max_element(edges.right.begin(), edges.right.end()));
}

double sup_on_curve(const Lattice& field, const CurveSpec& curve, int samples_per_segment) {
  if (field.d != 2 || field.m < 1) throw ConfigError("sup_on_curve needs a 2-d lattice field");
  const int samples = std::max(1, samples_per_segment);
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2; ++s) {
    const Point2 a = curve.vertices[s], b = curve.vertices[s + 1];
    if (a.x == b.x && a.y == b.y) continue;
    best = std::max(best, segment_sup(field, a, b, samples));
  }
  return best;
}

double sup_on_interval(const Lattice& field) {
  if (field.d != 1) throw ConfigError("sup_on_interval needs a 1-d lattice field");
  return *std::max_element(field.values.begin(), field.values.end());
}

CurveCdfEstimate curve_sup_cdf(const CurveSpec& curve, std::span<const double> lambdas, int paths, int steps,
                               std::uint64_t seed) {
  if (paths < 2 || steps < 1) throw ConfigError("curve_sup_cdf needs paths >= 2 and steps >= 1");
  const std::size_t nl = lambdas.size();
  const double ia = curve.a.reciprocal(), ib = curve.b.reciprocal();
  const double xk = curve.vertices[1].x, yk = curve.vertices[1].y;
  // Segment 1 in u = x/y on [0, xk/yk], barrier lambda (1 + u/a);
  // segment 2 in v = y/x on [0, yk/xk], barrier lambda (1 + v/b).
  const double span[2] = {xk / yk, yk / xk};
  const double slope[2] = {ia, ib};
  const double scale[2] = {yk, xk};

  constexpr int kBlock = 256;
  const int blocks = (paths + kBlock - 1) / kBlock;
  std::vector<double> sum(static_cast<std::size_t>(blocks) * nl, 0.0), sum2(sum.size(), 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (int blk = 0; blk < blocks; ++blk) {
    std::vector<double> prob(nl), path[2];
    std::normal_distribution<double> normal;
    for (int p = blk * kBlock; p < std::min(paths, (blk + 1) * kBlock); ++p) {
      Engine engine = make_engine(derive_seed(seed, p));
      const double wk = std::sqrt(xk * yk) * normal(engine);
      for (int s = 0; s < 2; ++s) {
        // Bridge skeleton from 0 to wk / scale over [0, span].
        const double T = span[s], target = wk / scale[s], dt = T / steps;
        path[s].assign(steps + 1, 0.0);
        for (int i = 0; i < steps; ++i) {
          const double left = T - i * dt;
          if (i + 1 == steps) {
            path[s][i + 1] = target;
            break;
          }
          const double mean = path[s][i] + (target - path[s][i]) * dt / left;
          const double var = dt * (left - dt) / left;
          path[s][i + 1] = mean + std::sqrt(var) * normal(engine);
        }
      }
      for (std::size_t l = 0; l < nl; ++l) {
        const double lam = lambdas[l];
        double pr = 1.0;
        for (int s = 0; s < 2 && pr > 0.0; ++s) {
          const double dt = span[s] / steps;
          for (int i = 0; i < steps; ++i) {
            const double g0 = lam * (1.0 + slope[s] * i * dt) - path[s][i];
            const double g1 = lam * (1.0 + slope[s] * (i + 1) * dt) - path[s][i + 1];
            if (g0 <= 0.0 || g1 <= 0.0) {
              pr = 0.0;
              break;
            }
            pr *= -std::expm1(-2.0 * g0 * g1 / dt);
          }
        }
        prob[l] = pr;
      }
      for (std::size_t l = 0; l < nl; ++l) {
        sum[blk * nl + l] += prob[l];
        sum2[blk * nl + l] += prob[l] * prob[l];
      }
    }
  }

  CurveCdfEstimate out;
  out.lambda.assign(lambdas.begin(), lambdas.end());
  out.cdf.assign(nl, 0.0);
  out.se.assign(nl, 0.0);
  for (std::size_t l = 0; l < nl; ++l) {
    double s = 0.0, s2 = 0.0;
    for (int blk = 0; blk < blocks; ++blk) {
      s += sum[blk * nl + l];
      s2 += sum2[blk * nl + l];
    }
    const double mean = s / paths;
    const double var = std::max(0.0, (s2 - paths * mean * mean) / (paths - 1));
    out.cdf[l] = mean;
    out.se[l] = std::sqrt(var / paths);
  }
  return out;
}

}  // namespace nodal
