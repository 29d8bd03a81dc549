#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "nodal/rng.hpp"

namespace nodal {

// Isotropic covariance profile r(x) = g(|x|) with the derivatives needed by
// the Kac-Rice machinery. `slope_over_radius` is g'(rho)/rho, which stays
// finite at rho = 0 (it tends to g''(0)).
struct RadialProfile {
  std::function<double(double)> value;
  std::function<double(double)> slope;
  std::function<double(double)> slope_over_radius;
  std::function<double(double)> curvature;
  // 1 - g(rho), accurate near rho = 0; optional.
  std::function<double(double)> complement;
};

using FieldFunction = std::function<double(std::span<const double>)>;
using SpectralDensity = std::function<double(std::span<const double>)>;
// Draws one frequency vector from the normalized spectral measure.
using FrequencySampler = std::function<void(Engine&, std::span<double>)>;

// Caller-provided pieces of a "synthetic-test" model. Only `profile` is
// required; the rest default to "unavailable".
struct SyntheticSpec {
  RadialProfile profile;
  SpectralDensity spectral_density;
  FrequencySampler frequency_sampler;
  FieldFunction field;  // deterministic realization, for geometry oracles
  double decay_radius = std::numeric_limits<double>::infinity();
  std::string note = "synthetic profile supplied by the caller";
};

// Stationary, isotropic, unit-variance Gaussian law on R^d with scalar
// values (codimension 1). Immutable after construction.
//
// Frequencies follow the convention r(x) = \int exp(i <x, xi>) S(xi) dxi.
class CovarianceModel {
 public:
  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  int codim() const noexcept { return 1; }

  double covariance(std::span<const double> lag) const;
  double radial(double rho) const { return profile_.value(rho); }
  double radial_complement(double rho) const;
  const RadialProfile& profile() const noexcept { return profile_; }

  // First and second derivatives of r at `lag`.
  Eigen::VectorXd covariance_gradient(std::span<const double> lag) const;
  Eigen::MatrixXd covariance_hessian(std::span<const double> lag) const;

  // Throws ConfigError if the model carries no spectral density.
  double spectral_density(std::span<const double> freq) const;
  bool has_spectral_density() const noexcept { return static_cast<bool>(spectral_density_); }
  bool has_frequency_sampler() const noexcept { return static_cast<bool>(frequency_sampler_); }
  void sample_frequency(Engine& engine, std::span<double> out) const;

  // Lambda = -Hess r(0).
  const Eigen::MatrixXd& spectral_moment_matrix() const noexcept { return lambda_; }

  // Smallest radius beyond which |r| < tol; +inf if the model has no
  // closed-form bound (slow algebraic decay).
  double decay_radius(double tol) const;
  const std::string& decay_note() const noexcept { return decay_note_; }

  bool has_deterministic_field() const noexcept { return static_cast<bool>(field_); }
  const FieldFunction& deterministic_field() const noexcept { return field_; }

  static CovarianceModel bargmann_fock(int d);
  static CovarianceModel large_band(int d);
  static CovarianceModel synthetic(int d, SyntheticSpec spec);
  // Gaussian profile exp(-|x|^2/2) (Lambda = I) realized by the
  // deterministic field sin(pi x_1); the default behind "synthetic-test".
  static CovarianceModel synthetic_default(int d);

 private:
  CovarianceModel() = default;

  std::string name_;
  int dim_ = 0;
  RadialProfile profile_;
  SpectralDensity spectral_density_;
  FrequencySampler frequency_sampler_;
  FieldFunction field_;
  Eigen::MatrixXd lambda_;
  std::function<double(double)> decay_;
  std::string decay_note_;
};

// Model selection by name: "bargmann-fock", "large-band", "synthetic-test".
CovarianceModel make_model(std::string_view name, int d);
CovarianceModel make_model(std::string_view name, int d, SyntheticSpec synthetic);

// -Hess r(0), as a d x d matrix.
Eigen::MatrixXd spectral_moments(const CovarianceModel& model);

}  // namespace nodal
