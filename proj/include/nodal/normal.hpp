#pragma once

namespace nodal {

// Standard normal CDF, via erfc so that both tails keep full relative accuracy.
double normal_cdf(double z);

// e^{x^2/2} Phi(-x): the Gaussian tail with its leading exponential removed.
// Finite and smooth for every x; for large x it behaves like 1/(x sqrt(2 pi)).
double normal_tail_scaled(double x);

// e^{theta lambda^2} Phi(slope lambda) evaluated without overflow or underflow
// in the intermediate factors.
double exp_times_cdf(double theta, double slope, double lambda);

double normal_pdf(double z);

}  // namespace nodal
