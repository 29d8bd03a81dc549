#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodal/covariance.hpp"

namespace nodal {

// How E[|G1| |G2|] is computed for the conditional gradient law.
//   laplace       - deterministic: sqrt(a) = (2 sqrt(pi))^{-1} \int (1 - e^{-sa}) s^{-3/2} ds
//                   turns the expectation into a smooth 2-d integral of Gaussian
//                   Laplace transforms, done by the trapezoid rule in log s.
//   monte_carlo   - fixed-seed sampling of the conditional Gaussian.
//   gauss_hermite - tensor Gauss-Hermite rule (conditional dimension <= 4).
enum class ConditionalMethod { laplace, monte_carlo, gauss_hermite };

std::string to_string(ConditionalMethod method);

struct KacOptions {
  ConditionalMethod method = ConditionalMethod::laplace;
  std::size_t mc_draws = 200000;
  std::uint64_t mc_seed = 0x5eed5eedULL;
  int gh_order = 24;
  // Reject separations where 1 - r(x)^2 falls below this.
  double degeneracy_threshold = 1e-12;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // standard error (MC) or quadrature error estimate
};

// Law of (grad f(0), grad f(x)) given f(0) = f(x) = 0, plus the density of
// (f(0), f(x)) at the origin.
struct ConditionalGradientLaw {
  Eigen::MatrixXd covariance;  // 2d x 2d, blocks ordered (grad f(0), grad f(x))
  double zero_density = 0.0;   // 1 / (2 pi sqrt(1 - r(x)^2))
};

ConditionalGradientLaw conditional_gradient_law(const CovarianceModel& model, std::span<const double> separation,
                                                double degeneracy_threshold = 1e-12);

// E[|G1| |G2|] for a centered Gaussian (G1, G2) with block size `block`.
Estimate expected_norm_product(const Eigen::MatrixXd& covariance, int block, const KacOptions& options = {});

// E|G| for G ~ N(0, cov).
double expected_norm(const Eigen::MatrixXd& covariance);

// One-point Kac density E[|grad f|] / sqrt(2 pi).
double rho1(const CovarianceModel& model);

// Two-point Kac density at separation r along `direction` (unit vector,
// default e_1).
Estimate rho2(const CovarianceModel& model, double r, const KacOptions& options = {},
              std::span<const double> direction = {});

// F2 = rho2 - rho1^2.
Estimate F2(const CovarianceModel& model, double r, const KacOptions& options = {},
            std::span<const double> direction = {});

// Separation below which the joint law of (f(0), f(r e_1)) is rejected.
double degeneracy_radius(const CovarianceModel& model, double threshold = 1e-12);

// Near-diagonal exponent of F2: 0 if d = 1, d - 2 if k = d > 1, k if k < d.
int near_diagonal_exponent(int d, int k);
// Supremum of admissible moment-bound exponents alpha (strict upper bound).
double moment_exponent_bound(int d, int k);

struct KacDensityEntry {
  double r = 0.0;
  double rho2 = 0.0;
  double F2 = 0.0;
  double error = 0.0;
};

struct KacDensityProfile {
  std::string model;
  int d = 0;
  double rho1 = 0.0;
  int beta = 0;
  ConditionalMethod method = ConditionalMethod::laplace;
  std::vector<KacDensityEntry> entries;
};

// rho2 and F2 on `points` log-spaced radii in [r_min, r_max].
KacDensityProfile kac_profile(const CovarianceModel& model, double r_min, double r_max, int points,
                              const KacOptions& options = {});

struct Gamma2Result {
  double gamma2 = 0.0;
  double integral_of_F2 = 0.0;
  std::optional<double> rho1_term;  // present iff k = d
  double error = 0.0;
  double r_max = 0.0;
};

struct Gamma2Options {
  double tail_tolerance = 1e-8;  // |F2| below this at r_max
  double rel_tolerance = 1e-9;  // per-piece Kronrod target
  double r_max_cap = 1000.0;
  // Fixed r_max; 0 picks it from tail_tolerance.
  double r_max = 0.0;
};

// gamma2 = \int_{R^d} F2(|x|) dx + rho1 1{k = d}, as a radial integral.
Gamma2Result gamma2(const CovarianceModel& model, const Gamma2Options& options = {});

// Smallest r on a 1/4 grid with |F2| < tol at r, r + 1/4 and r + 1/2.
double tail_radius(const CovarianceModel& model, double tol, double cap);

// Kac-Rice prediction of Var(nu([0,R]^d)) for the full box:
// \int\int F2(x - y) dx dy (+ rho1 R^d when k = d).
double box_variance(const CovarianceModel& model, double R, const Gamma2Options& options = {});

}  // namespace nodal
