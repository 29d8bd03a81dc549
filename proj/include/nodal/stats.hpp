#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nodal {

struct KsResult {
  double D = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov distance against a continuous CDF, with the
// asymptotic Kolmogorov p-value (Stephens' small-sample correction).
KsResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
// Two-sample version; the effective size n m / (n + m) enters the p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
// P[K > x] for the Kolmogorov distribution.
double kolmogorov_survival(double x);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanEstimate mean_estimate(std::span<const double> x);

// Sample variance with the standard error of (x - mean)^2 as its SE.
MeanEstimate variance_estimate(std::span<const double> x);
// Sample covariance with the SE of the centered products.
MeanEstimate covariance_estimate(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // from the weighted least-squares normal equations
};
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w);

// Empirical CDF of `samples` evaluated at each point of `grid`.
std::vector<double> empirical_cdf(std::span<const double> samples, std::span<const double> grid);

}  // namespace nodal
