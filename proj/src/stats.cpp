#include "nodal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr std::size_t kMinKsSamples = 20;

double stephens_scale(double n) { return std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n); }

}  // namespace

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.3) {
    // Small-x form: 1 - sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    constexpr double pi2 = 9.8696044010893586188;
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) s += std::exp(-(2 * k - 1) * (2 * k - 1) * pi2 / (8.0 * x * x));
    return 1.0 - 2.5066282746310002 / x * s;
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < kMinKsSamples) {
    throw ConfigError("KS test needs at least 20 samples, got " + std::to_string(samples.size()));
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_survival(stephens_scale(n) * d), x.size()};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < kMinKsSamples || b.size() < kMinKsSamples) throw ConfigError("KS test needs at least 20 samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double ne = nx * ny / (nx + ny);
  return {d, kolmogorov_survival(stephens_scale(ne) * d), static_cast<std::size_t>(ne)};
}

MeanEstimate mean_estimate(std::span<const double> x) {
  MeanEstimate out;
  out.n = x.size();
  if (x.empty()) return out;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double delta = x[k] - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x[k] - mean);
  }
  out.mean = mean;
  if (x.size() > 1) out.se = std::sqrt(m2 / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return out;
}

MeanEstimate covariance_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("covariance needs paired samples");
  if (x.size() < 2) throw ConfigError("covariance needs at least two samples");
  const double mx = mean_estimate(x).mean, my = mean_estimate(y).mean;
  std::vector<double> prod(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) prod[k] = (x[k] - mx) * (y[k] - my);
  MeanEstimate p = mean_estimate(prod);
  const double n = static_cast<double>(x.size());
  p.mean *= n / (n - 1.0);
  return p;
}

MeanEstimate variance_estimate(std::span<const double> x) { return covariance_estimate(x, x); }

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) throw ConfigError("regression inputs differ in length");
  if (x.size() < 2) throw ConfigError("regression needs at least two points");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("regression abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // With weights = 1/variance, Var(slope) = 1/sxx.
  fit.slope_se = std::sqrt(1.0 / sxx);
  return fit;
}

std::vector<double> empirical_cdf(std::span<const double> samples, std::span<const double> grid) {
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto it = std::upper_bound(x.begin(), x.end(), grid[i]);
    out[i] = x.empty() ? 0.0 : static_cast<double>(it - x.begin()) / static_cast<double>(x.size());
  }
  return out;
}

}  // namespace nodal
