#include "nodal/kac_rice.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "nodal/errors.hpp"
#include "nodal/rng.hpp"

namespace nodal {

namespace {

constexpr double kPi = std::numbers::pi;

// Coefficients of P(s, t) = det(I + 2 diag(s I_b, t I_b) C) as a polynomial
// sum_{a,c <= b} coef[a][c] s^a t^c. Every coefficient is a sum of principal
// minors of a PSD matrix and hence nonnegative, so partial sums never cancel.
struct LaplacePolynomial {
  int block = 1;
  std::array<std::array<double, 3>, 3> coef{};

  explicit LaplacePolynomial(const Eigen::MatrixXd& cov, int b) : block(b) {
    const int dim = 2 * b;
    for (unsigned mask = 0; mask < (1u << dim); ++mask) {
      std::vector<int> idx;
      int a = 0, c = 0;
      for (int i = 0; i < dim; ++i) {
        if (mask & (1u << i)) {
          idx.push_back(i);
          (i < b ? a : c) += 1;
        }
      }
      double minor = 1.0;
      if (!idx.empty()) {
        Eigen::MatrixXd sub(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
          for (std::size_t q = 0; q < idx.size(); ++q) sub(r, q) = cov(idx[r], idx[q]);
        minor = std::max(0.0, sub.determinant());
      }
      coef[a][c] += std::ldexp(minor, a + c);
    }
  }

  // sum over a >= a_min, c >= c_min of coef[a][c] s^a t^c
  double partial(double s, double t, int a_min, int c_min) const {
    double total = 0.0;
    double sp = 1.0;
    for (int a = 0; a <= block; ++a) {
      double tp = 1.0;
      for (int c = 0; c <= block; ++c) {
        if (a >= a_min && c >= c_min) total += coef[a][c] * sp * tp;
        tp *= t;
      }
      sp *= s;
    }
    return total;
  }

  // E[(1 - e^{-sA})(1 - e^{-tB})] with A = |G1|^2, B = |G2|^2, arranged so
  // that no step subtracts nearly equal numbers.
  double integrand(double s, double t) const {
    if (s <= t) {
      const double ls = -0.5 * std::log1p(partial(s, 0.0, 1, 0));
      const double p0t = 1.0 + partial(0.0, t, 0, 1);
      const double lt = -0.5 * std::log(p0t);
      const double delta = -0.5 * std::log1p(partial(s, t, 1, 0) / p0t);
      return -std::expm1(ls) + std::exp(lt) * std::expm1(delta);
    }
    const double lt = -0.5 * std::log1p(partial(0.0, t, 0, 1));
    const double ps0 = 1.0 + partial(s, 0.0, 1, 0);
    const double ls = -0.5 * std::log(ps0);
    const double delta = -0.5 * std::log1p(partial(s, t, 0, 1) / ps0);
    return -std::expm1(lt) + std::exp(ls) * std::expm1(delta);
  }
};

// Log-scale range [lo, hi] for s covering the block's variance scales with
// e^{-37} tails on both sides.
std::pair<double, double> log_range(const Eigen::MatrixXd& block_cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_cov, Eigen::EigenvaluesOnly);
  const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  double bottom = top;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v > 1e-14 * top) bottom = std::min(bottom, v);
  }
  constexpr double kTail = 75.0;
  return {-std::log(top) - kTail, -std::log(bottom) + kTail};
}

Estimate laplace_norm_product(const Eigen::MatrixXd& cov, int b) {
  const LaplacePolynomial poly(cov, b);
  const auto [ulo, uhi] = log_range(cov.topLeftCorner(b, b));
  const auto [vlo, vhi] = log_range(cov.bottomRightCorner(b, b));
  constexpr double step = 0.5;
  const int nu = static_cast<int>(std::ceil((uhi - ulo) / step)) + 1;
  const int nv = static_cast<int>(std::ceil((vhi - vlo) / step)) + 1;

  std::vector<double> s(nu), ws(nu), t(nv), wt(nv);
  for (int i = 0; i < nu; ++i) {
    const double u = ulo + i * step;
    s[i] = std::exp(u);
    ws[i] = std::exp(-0.5 * u);
  }
  for (int j = 0; j < nv; ++j) {
    const double v = vlo + j * step;
    t[j] = std::exp(v);
    wt[j] = std::exp(-0.5 * v);
  }
  // Full-step and double-step trapezoid sums; their gap bounds the error.
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i < nu; ++i) {
    double row_fine = 0.0, row_coarse = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double val = poly.integrand(s[i], t[j]) * wt[j];
      row_fine += val;
      if (j % 2 == 0) row_coarse += val;
    }
    fine += ws[i] * row_fine;
    if (i % 2 == 0) coarse += ws[i] * row_coarse;
  }
  const double norm = 1.0 / (4.0 * kPi);
  fine *= norm * step * step;
  coarse *= norm * 4.0 * step * step;
  return {fine, std::abs(fine - coarse) + 1e-15 * std::abs(fine)};
}

Eigen::MatrixXd square_root_factor(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

double norm_product(const Eigen::VectorXd& g, int b) {
  return g.head(b).norm() * g.tail(b).norm();
}

Estimate monte_carlo_norm_product(const Eigen::MatrixXd& cov, int b, std::size_t draws, std::uint64_t seed) {
  const Eigen::MatrixXd factor = square_root_factor(cov);
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(2 * b);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    for (int i = 0; i < 2 * b; ++i) z(i) = normal(engine);
    const double x = norm_product(factor * z, b);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  const double var = draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

// Physicists' Gauss-Hermite rule by Golub-Welsch, rescaled to the standard
// normal: E[h(Z)] ~ sum w_i h(x_i).
std::pair<std::vector<double>, std::vector<double>> normal_hermite_rule(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = std::numbers::sqrt2 * es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // sqrt(pi) v0^2 / sqrt(pi)
  }
  return {nodes, weights};
}

double tensor_hermite(const Eigen::MatrixXd& factor, int b, int order) {
  const auto [nodes, weights] = normal_hermite_rule(order);
  const int dim = 2 * b;
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd z(dim);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      z(i) = nodes[idx[i]];
      w *= weights[idx[i]];
    }
    total += w * norm_product(factor * z, b);
    int k = 0;
    while (k < dim && ++idx[k] == order) idx[k++] = 0;
    if (k == dim) break;
  }
  return total;
}

Estimate hermite_norm_product(const Eigen::MatrixXd& cov, int b, int order) {
  if (2 * b > 4) throw ConfigError("tensor Gauss-Hermite is limited to conditional dimension <= 4");
  const Eigen::MatrixXd factor = square_root_factor(cov);
  const double fine = tensor_hermite(factor, b, order);
  const double half = tensor_hermite(factor, b, std::max(2, order / 2));
  // The kinks of |x| converge slowly; the opposite-parity rule exposes it.
  const double near = tensor_hermite(factor, b, std::max(2, order - 1));
  return {fine, std::max(std::abs(fine - half), std::abs(fine - near))};
}

}  // namespace

std::string to_string(ConditionalMethod method) {
  switch (method) {
    case ConditionalMethod::laplace: return "laplace-quadrature";
    case ConditionalMethod::monte_carlo: return "monte-carlo";
    case ConditionalMethod::gauss_hermite: return "gauss-hermite";
  }
  return "unknown";
}

ConditionalGradientLaw conditional_gradient_law(const CovarianceModel& model, std::span<const double> separation,
                                                double degeneracy_threshold) {
  const int b = model.dim();
  if (static_cast<int>(separation.size()) != b) throw ConfigError("separation has the wrong dimension");
  double rho = 0.0;
  for (double v : separation) rho += v * v;
  rho = std::sqrt(rho);

  const double corr = model.radial(rho);
  const double comp = model.radial_complement(rho);
  const double one_minus_corr2 = comp * (2.0 - comp);
  if (!(one_minus_corr2 >= degeneracy_threshold)) {
    throw DegenerateJoint("joint law of (f(0), f(x)) is degenerate at |x| = " + std::to_string(rho),
                          degeneracy_radius(model, degeneracy_threshold));
  }

  const Eigen::VectorXd grad = model.covariance_gradient(separation);
  const Eigen::MatrixXd hess = model.covariance_hessian(separation);
  const Eigen::MatrixXd& lambda = model.spectral_moment_matrix();

  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(2 * b, 2);
  cross.block(0, 1, b, 1) = -grad;
  cross.block(b, 0, b, 1) = grad;
  Eigen::Matrix2d values_inv;
  values_inv << 1.0, -corr, -corr, 1.0;
  values_inv /= one_minus_corr2;

  Eigen::MatrixXd grads(2 * b, 2 * b);
  grads.topLeftCorner(b, b) = lambda;
  grads.bottomRightCorner(b, b) = lambda;
  grads.topRightCorner(b, b) = -hess;
  grads.bottomLeftCorner(b, b) = -hess;

  ConditionalGradientLaw law;
  law.covariance = grads - cross * values_inv * cross.transpose();
  law.covariance = 0.5 * (law.covariance + law.covariance.transpose()).eval();
  law.zero_density = 1.0 / (2.0 * kPi * std::sqrt(one_minus_corr2));
  return law;
}

Estimate expected_norm_product(const Eigen::MatrixXd& covariance, int block, const KacOptions& options) {
  switch (options.method) {
    case ConditionalMethod::laplace: return laplace_norm_product(covariance, block);
    case ConditionalMethod::monte_carlo:
      return monte_carlo_norm_product(covariance, block, options.mc_draws, options.mc_seed);
    case ConditionalMethod::gauss_hermite: return hermite_norm_product(covariance, block, options.gh_order);
  }
  throw ConfigError("unknown conditional method");
}

double expected_norm(const Eigen::MatrixXd& covariance) {
  const int b = static_cast<int>(covariance.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < 0.0) throw NumericalError("gradient covariance is not positive semidefinite");
  if (b == 1) return std::sqrt(2.0 * ev(0) / kPi);
  if (b == 2 && ev(1) - ev(0) <= 1e-14 * ev(1)) return std::sqrt(0.5 * kPi * ev(1));
  // sqrt(a) = (2 sqrt(pi))^{-1} \int (1 - e^{-sa}) s^{-3/2} ds, with
  // E e^{-sA} = prod_i (1 + 2 s ev_i)^{-1/2}; trapezoid rule in log s.
  const double top = ev.maxCoeff();
  const double bottom = std::max(ev.minCoeff(), 1e-14 * top);
  constexpr double step = 0.25;
  const double lo = -std::log(top) - 75.0, hi = -std::log(bottom) + 75.0;
  double total = 0.0;
  for (double u = lo; u <= hi; u += step) {
    const double s = std::exp(u);
    double log_mgf = 0.0;
    for (int i = 0; i < b; ++i) log_mgf += -0.5 * std::log1p(2.0 * s * ev(i));
    total += -std::expm1(log_mgf) * std::exp(-0.5 * u);
  }
  return total * step / (2.0 * std::sqrt(kPi));
}

double rho1(const CovarianceModel& model) {
  return expected_norm(model.spectral_moment_matrix()) / std::sqrt(2.0 * kPi);
}

Estimate rho2(const CovarianceModel& model, double r, const KacOptions& options, std::span<const double> direction) {
  if (!(r > 0.0)) throw ConfigError("rho2 needs a positive separation");
  const int d = model.dim();
  std::array<double, 2> sep{0.0, 0.0};
  if (direction.empty()) {
    sep[0] = r;
  } else {
    if (static_cast<int>(direction.size()) != d) throw ConfigError("direction has the wrong dimension");
    double norm = 0.0;
    for (double v : direction) norm += v * v;
    norm = std::sqrt(norm);
    for (int i = 0; i < d; ++i) sep[i] = r * direction[i] / norm;
  }
  const ConditionalGradientLaw law =
      conditional_gradient_law(model, std::span<const double>(sep.data(), d), options.degeneracy_threshold);
  const Estimate e = expected_norm_product(law.covariance, d, options);
  return {e.value * law.zero_density, e.error * law.zero_density};
}

Estimate F2(const CovarianceModel& model, double r, const KacOptions& options, std::span<const double> direction) {
  const Estimate e = rho2(model, r, options, direction);
  const double r1 = rho1(model);
  return {e.value - r1 * r1, e.error};
}

double degeneracy_radius(const CovarianceModel& model, double threshold) {
  auto gap = [&](double r) {
    const double c = model.radial_complement(r);
    return c * (2.0 - c);
  };
  double lo = 0.0, hi = 1e-8;
  while (gap(hi) < threshold && hi < 10.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < threshold ? lo : hi) = mid;
  }
  return hi;
}

int near_diagonal_exponent(int d, int k) {
  if (d == 1) return 0;
  if (k == d) return d - 2;
  return k;
}

double moment_exponent_bound(int d, int k) {
  if (d == 1) return 0.5;
  if (k == d) return 1.0 / (d * d - d + 1);
  return static_cast<double>(d - k) / (2.0 * d);
}

KacDensityProfile kac_profile(const CovarianceModel& model, double r_min, double r_max, int points,
                              const KacOptions& options) {
  if (!(r_min > 0.0) || !(r_max > r_min) || points < 2) throw ConfigError("invalid radial profile range");
  KacDensityProfile profile;
  profile.model = model.name();
  profile.d = model.dim();
  profile.rho1 = rho1(model);
  profile.beta = near_diagonal_exponent(model.dim(), model.codim());
  profile.method = options.method;
  profile.entries.resize(points);
  const double ratio = std::log(r_max / r_min) / (points - 1);
#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < points; ++j) {
    const double r = j + 1 == points ? r_max : r_min * std::exp(ratio * j);
    const Estimate e = rho2(model, r, options);
    profile.entries[j] = {r, e.value, e.value - profile.rho1 * profile.rho1, e.error};
  }
  return profile;
}

double tail_radius(const CovarianceModel& model, double tol, double cap) {
  for (double r = 1.0; r <= cap; r += 0.25) {
    bool small = true;
    for (double probe : {r, r + 0.25, r + 0.5}) {
      if (std::abs(F2(model, probe).value) >= tol) {
        small = false;
        break;
      }
    }
    if (small) return r;
  }
  throw NumericalError("F2 does not fall below " + std::to_string(tol) + " before r = " + std::to_string(cap));
}

namespace {

// \int_0^upper weight(r) F2(r) dr, with the stretch below the degeneracy
// radius replaced by a one-point rule (the integrand is bounded there).
Estimate radial_integral(const CovarianceModel& model, double upper, double rel_tol,
                         const std::function<double(double)>& weight) {
  const double head = std::max(1e-5, 4.0 * degeneracy_radius(model));
  auto integrand = [&](double r) { return weight(r) * F2(model, r).value; };
  Estimate out;
  out.value = head * integrand(head);
  out.error = std::abs(out.value) * 1e-3;
  // Geometric pieces near the diagonal, unit pieces further out.
  std::vector<double> breaks{head};
  for (double b : {1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5}) {
    if (b > head && b < upper) breaks.push_back(b);
  }
  for (double b = 1.0; b < upper; b += 1.0) breaks.push_back(b);
  breaks.push_back(upper);
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    out.value += gauss_kronrod<double, 31>::integrate(integrand, breaks[i], breaks[i + 1], 4, rel_tol, &err);
    out.error += err;
  }
  return out;
}

std::mutex& gamma2_cache_mutex() {
  static std::mutex m;
  return m;
}

using Gamma2Key = std::tuple<std::string, int, double, double, double>;

std::map<Gamma2Key, Gamma2Result>& gamma2_cache() {
  static std::map<Gamma2Key, Gamma2Result> cache;
  return cache;
}

}  // namespace

Gamma2Result gamma2(const CovarianceModel& model, const Gamma2Options& options) {
  const bool cacheable = model.name() != "synthetic-test";
  const Gamma2Key key{model.name(), model.dim(), options.tail_tolerance, options.rel_tolerance, options.r_max};
  if (cacheable) {
    std::lock_guard lock(gamma2_cache_mutex());
    if (auto it = gamma2_cache().find(key); it != gamma2_cache().end()) return it->second;
  }

  const int d = model.dim();
  Gamma2Result out;
  out.r_max = options.r_max > 0.0 ? options.r_max : tail_radius(model, options.tail_tolerance, options.r_max_cap);
  const Estimate integral = radial_integral(model, out.r_max, options.rel_tolerance, [d](double r) {
    return d == 1 ? 2.0 : 2.0 * kPi * r;
  });
  out.integral_of_F2 = integral.value;
  out.error = integral.error;
  out.gamma2 = integral.value;
  if (model.codim() == d) {
    out.rho1_term = rho1(model);
    out.gamma2 += *out.rho1_term;
  }
  if (!(out.gamma2 > 0.0)) {
    throw NonPositiveGamma2("gamma2 = " + std::to_string(out.gamma2) + " is not positive for model " + model.name());
  }
  if (cacheable) {
    std::lock_guard lock(gamma2_cache_mutex());
    gamma2_cache().emplace(key, out);
  }
  return out;
}

double box_variance(const CovarianceModel& model, double R, const Gamma2Options& options) {
  if (!(R > 0.0)) throw ConfigError("box side must be positive");
  const int d = model.dim();
  const double r_max = options.r_max > 0.0 ? options.r_max : tail_radius(model, options.tail_tolerance, options.r_max_cap);
  const double upper = std::min(R, r_max);
  // Overlap measure |A cap (A + x)| integrated over directions.
  const Estimate integral = radial_integral(model, upper, options.rel_tolerance, [d, R](double r) {
    if (d == 1) return 2.0 * (R - r);
    return 2.0 * kPi * R * R * r - 8.0 * R * r * r + 2.0 * r * r * r;
  });
  double var = integral.value;
  if (model.codim() == d) var += rho1(model) * std::pow(R, d);
  return var;
}

}  // namespace nodal
