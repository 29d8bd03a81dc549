#include "nodal/covariance.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int d) {
  if (d != 1 && d != 2) throw ConfigError("unsupported dimension " + std::to_string(d) + " (expected 1 or 2)");
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

RadialProfile gaussian_profile(double scale) {
  // g(rho) = exp(-scale rho^2)
  RadialProfile p;
  p.value = [scale](double r) { return std::exp(-scale * r * r); };
  p.slope = [scale](double r) { return -2.0 * scale * r * std::exp(-scale * r * r); };
  p.slope_over_radius = [scale](double r) { return -2.0 * scale * std::exp(-scale * r * r); };
  p.curvature = [scale](double r) { return (4.0 * scale * scale * r * r - 2.0 * scale) * std::exp(-scale * r * r); };
  p.complement = [scale](double r) { return -std::expm1(-scale * r * r); };
  return p;
}

// 2 J1(rho) / rho and derivatives. Below the switch radius the Bessel
// ratios cancel badly, so a short Taylor series is used instead.
constexpr double kBesselSeriesRadius = 0.05;

RadialProfile unit_disk_profile() {
  RadialProfile p;
  p.value = [](double r) {
    if (r < kBesselSeriesRadius) {
      const double r2 = r * r;
      return 1.0 - r2 / 8.0 + r2 * r2 / 192.0 - r2 * r2 * r2 / 9216.0;
    }
    return 2.0 * std::cyl_bessel_j(1.0, r) / r;
  };
  p.slope = [](double r) {
    if (r < kBesselSeriesRadius) {
      const double r2 = r * r;
      return -r / 4.0 + r * r2 / 48.0 - r * r2 * r2 / 1536.0;
    }
    return -2.0 * std::cyl_bessel_j(2.0, r) / r;
  };
  p.slope_over_radius = [](double r) {
    if (r < kBesselSeriesRadius) {
      const double r2 = r * r;
      return -0.25 + r2 / 48.0 - r2 * r2 / 1536.0;
    }
    return -2.0 * std::cyl_bessel_j(2.0, r) / (r * r);
  };
  p.curvature = [](double r) {
    if (r < kBesselSeriesRadius) {
      const double r2 = r * r;
      return -0.25 + r2 / 16.0 - 5.0 * r2 * r2 / 1536.0;
    }
    return -2.0 * std::cyl_bessel_j(1.0, r) / r + 6.0 * std::cyl_bessel_j(2.0, r) / (r * r);
  };
  p.complement = [value = p.value](double r) {
    if (r < kBesselSeriesRadius) {
      const double r2 = r * r;
      return r2 / 8.0 - r2 * r2 / 192.0 + r2 * r2 * r2 / 9216.0;
    }
    return 1.0 - value(r);
  };
  return p;
}

}  // namespace

double CovarianceModel::covariance(std::span<const double> lag) const {
  return profile_.value(norm(lag));
}

double CovarianceModel::radial_complement(double rho) const {
  return profile_.complement ? profile_.complement(rho) : 1.0 - profile_.value(rho);
}

Eigen::VectorXd CovarianceModel::covariance_gradient(std::span<const double> lag) const {
  const double rho = norm(lag);
  const double s = profile_.slope_over_radius(rho);
  Eigen::VectorXd g(dim_);
  for (int i = 0; i < dim_; ++i) g(i) = s * lag[i];
  return g;
}

Eigen::MatrixXd CovarianceModel::covariance_hessian(std::span<const double> lag) const {
  const double rho = norm(lag);
  const double g2 = profile_.curvature(rho);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(dim_, dim_);
  if (rho == 0.0) return g2 * hess;
  const double s = profile_.slope_over_radius(rho);
  Eigen::VectorXd u(dim_);
  for (int i = 0; i < dim_; ++i) u(i) = lag[i] / rho;
  const Eigen::MatrixXd uu = u * u.transpose();
  return g2 * uu + s * (hess - uu);
}

double CovarianceModel::spectral_density(std::span<const double> freq) const {
  if (!spectral_density_) throw ConfigError("model '" + name_ + "' has no spectral density");
  return spectral_density_(freq);
}

void CovarianceModel::sample_frequency(Engine& engine, std::span<double> out) const {
  if (!frequency_sampler_) throw ConfigError("model '" + name_ + "' has no frequency sampler");
  frequency_sampler_(engine, out);
}

double CovarianceModel::decay_radius(double tol) const {
  if (!decay_) return std::numeric_limits<double>::infinity();
  return decay_(tol);
}

CovarianceModel CovarianceModel::bargmann_fock(int d) {
  check_dim(d);
  CovarianceModel m;
  m.name_ = "bargmann-fock";
  m.dim_ = d;
  m.profile_ = gaussian_profile(1.0);
  const double norm_const = std::pow(4.0 * kPi, -0.5 * d);
  m.spectral_density_ = [norm_const](std::span<const double> xi) {
    double s = 0.0;
    for (double v : xi) s += v * v;
    return norm_const * std::exp(-0.25 * s);
  };
  // S is the N(0, 2 I) density.
  m.frequency_sampler_ = [](Engine& e, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2);
    for (double& v : out) v = normal(e);
  };
  m.lambda_ = 2.0 * Eigen::MatrixXd::Identity(d, d);
  m.decay_ = [](double tol) { return std::sqrt(-std::log(tol)); };
  m.decay_note_ =
      "r(x) = exp(-|x|^2); all derivatives decay like |x|^k exp(-|x|^2), so any "
      "g(t) = C exp(-t^2/2) bounds them on shifted balls";
  return m;
}

CovarianceModel CovarianceModel::large_band(int d) {
  check_dim(d);
  if (d != 2) throw ConfigError("large-band model is only available for d = 2");
  CovarianceModel m;
  m.name_ = "large-band";
  m.dim_ = d;
  m.profile_ = unit_disk_profile();
  m.spectral_density_ = [](std::span<const double> xi) {
    return (xi[0] * xi[0] + xi[1] * xi[1] <= 1.0) ? 1.0 / kPi : 0.0;
  };
  m.frequency_sampler_ = [](Engine& e, std::span<double> out) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double radius = std::sqrt(u(e));
    const double angle = 2.0 * kPi * u(e);
    out[0] = radius * std::cos(angle);
    out[1] = radius * std::sin(angle);
  };
  m.lambda_ = 0.25 * Eigen::MatrixXd::Identity(d, d);
  m.decay_note_ =
      "r(x) = 2 J1(|x|)/|x| decays like |x|^{-3/2}; derivatives share the rate, "
      "so g(t) = C (1+t)^{-3/2} is square integrable";
  return m;
}

CovarianceModel CovarianceModel::synthetic(int d, SyntheticSpec spec) {
  check_dim(d);
  if (!spec.profile.value || !spec.profile.curvature) {
    throw ConfigError("synthetic-test model needs at least a covariance profile and its curvature");
  }
  if (!spec.profile.slope_over_radius) {
    auto slope = spec.profile.slope;
    auto curvature = spec.profile.curvature;
    spec.profile.slope_over_radius = [slope, curvature](double r) {
      return (r == 0.0 || !slope) ? curvature(0.0) : slope(r) / r;
    };
  }
  if (!spec.profile.slope) {
    auto sor = spec.profile.slope_over_radius;
    spec.profile.slope = [sor](double r) { return r * sor(r); };
  }
  CovarianceModel m;
  m.name_ = "synthetic-test";
  m.dim_ = d;
  m.profile_ = std::move(spec.profile);
  m.spectral_density_ = std::move(spec.spectral_density);
  m.frequency_sampler_ = std::move(spec.frequency_sampler);
  m.field_ = std::move(spec.field);
  m.lambda_ = -m.profile_.curvature(0.0) * Eigen::MatrixXd::Identity(d, d);
  if (std::isfinite(spec.decay_radius)) {
    const double radius = spec.decay_radius;
    m.decay_ = [radius](double) { return radius; };
  }
  m.decay_note_ = std::move(spec.note);
  return m;
}

CovarianceModel CovarianceModel::synthetic_default(int d) {
  check_dim(d);
  SyntheticSpec spec;
  spec.profile = gaussian_profile(0.5);
  const double norm_const = std::pow(2.0 * kPi, -0.5 * d);
  spec.spectral_density = [norm_const](std::span<const double> xi) {
    double s = 0.0;
    for (double v : xi) s += v * v;
    return norm_const * std::exp(-0.5 * s);
  };
  spec.frequency_sampler = [](Engine& e, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out) v = normal(e);
  };
  spec.field = [](std::span<const double> x) { return std::sin(kPi * x[0]); };
  spec.decay_radius = std::sqrt(-2.0 * std::log(1e-16));
  spec.note = "exp(-|x|^2/2) profile; deterministic realization sin(pi x_1)";
  return synthetic(d, std::move(spec));
}

CovarianceModel make_model(std::string_view name, int d) {
  if (name == "bargmann-fock") return CovarianceModel::bargmann_fock(d);
  if (name == "large-band") return CovarianceModel::large_band(d);
  if (name == "synthetic-test") return CovarianceModel::synthetic_default(d);
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

CovarianceModel make_model(std::string_view name, int d, SyntheticSpec synthetic) {
  if (name != "synthetic-test") return make_model(name, d);
  return CovarianceModel::synthetic(d, std::move(synthetic));
}

Eigen::MatrixXd spectral_moments(const CovarianceModel& model) {
  return model.spectral_moment_matrix();
}

}  // namespace nodal
