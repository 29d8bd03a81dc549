#include "nodal/normal.hpp"

#include <cmath>
#include <numbers>

namespace nodal {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

// Continued fraction for the Mills ratio Phi(-x)/phi(x), evaluated backwards.
// At x >= 5 a hundred levels are far more than double precision needs.
double mills_ratio(double x) {
  double tail = x;
  for (int k = 100; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_tail_scaled(double x) {
  if (x < 5.0) return std::exp(0.5 * x * x) * normal_cdf(-x);
  return kInvSqrt2Pi * mills_ratio(x);
}

double exp_times_cdf(double theta, double slope, double lambda) {
  const double arg = slope * lambda;
  if (arg >= 0.0) return std::exp(theta * lambda * lambda) * normal_cdf(arg);
  const double x = -arg;
  return std::exp(theta * lambda * lambda - 0.5 * x * x) * normal_tail_scaled(x);
}

}  // namespace nodal
