#include "nodal/field_sampler.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>

#include "nodal/errors.hpp"
#include "nodal/rng.hpp"

namespace nodal {

GridSpec make_grid(int d, double R, double h) {
  if (d != 1 && d != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (!(R > 0.0) || !(h > 0.0)) throw ConfigError("grid needs R > 0 and h > 0");
  const long n = std::lround(R / h) + 1;
  if (n < 2) throw ConfigError("grid spacing too coarse: fewer than 2 points per side");
  return make_grid_points(d, R, static_cast<int>(n));
}

GridSpec make_grid_points(int d, double R, int n) {
  if (d != 1 && d != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (n < 2 || !(R > 0.0)) throw ConfigError("grid needs n >= 2 and R > 0");
  return GridSpec{d, R, R / (n - 1), n};
}

// FFTW plans are created under a global lock (the planner is not
// re-entrant); execution through fftw_execute_dft is thread-safe.
struct FftHandle {
  fftw_plan plan = nullptr;
  ~FftHandle() {
    if (plan != nullptr) {
      static std::mutex destroy_mutex;
      std::lock_guard lock(destroy_mutex);
      fftw_destroy_plan(plan);
    }
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t size)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size))), size(size) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  fftw_complex* data;
  std::size_t size;
};

std::shared_ptr<const FftHandle> make_fft(int d, int padded) {
  const std::size_t total = d == 1 ? padded : static_cast<std::size_t>(padded) * padded;
  FftwBuffer scratch(total);
  auto handle = std::make_shared<FftHandle>();
  std::lock_guard lock(planner_mutex());
  if (d == 1) {
    handle->plan = fftw_plan_dft_1d(padded, scratch.data, scratch.data, FFTW_FORWARD, FFTW_ESTIMATE);
  } else {
    handle->plan = fftw_plan_dft_2d(padded, padded, scratch.data, scratch.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (handle->plan == nullptr) throw NumericalError("FFTW planning failed");
  return handle;
}

// Distance on the torus of `padded` points per side, in grid steps.
int torus_offset(int j, int padded) { return std::min(j, padded - j); }

struct Eigenvalues {
  std::vector<double> values;
  ClipReport clip;
};

Eigenvalues circulant_eigenvalues(const CovarianceModel& model, const GridSpec& grid, int padded,
                                  const FftHandle& fft, double roundoff_floor) {
  const int d = grid.d;
  const std::size_t total = d == 1 ? padded : static_cast<std::size_t>(padded) * padded;
  FftwBuffer buf(total);
  if (d == 1) {
    for (int j = 0; j < padded; ++j) {
      buf.data[j][0] = model.radial(grid.h * torus_offset(j, padded));
      buf.data[j][1] = 0.0;
    }
  } else {
    for (int jy = 0; jy < padded; ++jy) {
      const double dy = grid.h * torus_offset(jy, padded);
      for (int jx = 0; jx < padded; ++jx) {
        const double dx = grid.h * torus_offset(jx, padded);
        auto& c = buf.data[static_cast<std::size_t>(jy) * padded + jx];
        c[0] = model.radial(std::hypot(dx, dy));
        c[1] = 0.0;
      }
    }
  }
  fftw_execute_dft(fft.plan, buf.data, buf.data);

  Eigenvalues out;
  out.values.resize(total);
  double max_ev = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    out.values[i] = buf.data[i][0];
    max_ev = std::max(max_ev, out.values[i]);
  }
  out.clip.max_eigenvalue = max_ev;
  const double floor = roundoff_floor * max_ev;
  for (double& v : out.values) {
    if (v < 0.0 && v >= -floor) {
      ++out.clip.rounded;
      v = 0.0;
    } else if (v < 0.0) {
      ++out.clip.count;
      out.clip.mass += -v;
      v = 0.0;
    }
  }
  return out;
}

constexpr std::size_t kStreamChunk1d = 1024;

template <bool Parallel>
std::pair<FieldSample, FieldSample> sample_pair_impl(const GridSpec& grid, int padded,
                                                     std::span<const double> amplitude,
                                                     const FftHandle& fft, const std::string& model,
                                                     std::uint64_t seed) {
  const int d = grid.d;
  const std::size_t total = amplitude.size();
  FftwBuffer buf(total);

  // One RNG stream per torus row (d = 2) or per fixed-size chunk (d = 1), so
  // the noise does not depend on the thread schedule.
  const std::size_t row_len = d == 1 ? kStreamChunk1d : static_cast<std::size_t>(padded);
  const long rows = static_cast<long>((total + row_len - 1) / row_len);
#pragma omp parallel for schedule(static) if (Parallel)
  for (long row = 0; row < rows; ++row) {
    Engine engine = make_engine(seed, static_cast<std::uint64_t>(row));
    std::normal_distribution<double> normal;
    const std::size_t begin = static_cast<std::size_t>(row) * row_len;
    const std::size_t end = std::min(total, begin + row_len);
    for (std::size_t i = begin; i < end; ++i) {
      const double re = normal(engine);
      const double im = normal(engine);
      buf.data[i][0] = amplitude[i] * re;
      buf.data[i][1] = amplitude[i] * im;
    }
  }
  fftw_execute_dft(fft.plan, buf.data, buf.data);

  std::pair<FieldSample, FieldSample> out;
  for (FieldSample* s : {&out.first, &out.second}) {
    s->grid = grid;
    s->seed = seed;
    s->model = model;
    s->values.resize(grid.size());
  }
  const int n = grid.n;
  if (d == 1) {
    for (int i = 0; i < n; ++i) {
      out.first.values[i] = buf.data[i][0];
      out.second.values[i] = buf.data[i][1];
    }
  } else {
#pragma omp parallel for schedule(static) if (Parallel)
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const auto& c = buf.data[static_cast<std::size_t>(iy) * padded + ix];
        out.first.values[static_cast<std::size_t>(iy) * n + ix] = c[0];
        out.second.values[static_cast<std::size_t>(iy) * n + ix] = c[1];
      }
    }
  }
  return out;
}

}  // namespace

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

EmbeddingPlan plan_embedding(const CovarianceModel& model, const GridSpec& grid, const EmbeddingOptions& options) {
  if (model.dim() != grid.d) {
    throw ConfigError("model dimension " + std::to_string(model.dim()) + " does not match grid dimension " +
                      std::to_string(grid.d));
  }
  const double wrap = model.decay_radius(options.wrap_tolerance);
  int padded = 0;
  int attempts = 0;
  if (std::isfinite(wrap)) {
    // Torus extension: lags between grid points never wrap onto a
    // covariance value above the tolerance.
    padded = fft_friendly_size(grid.n - 1 + static_cast<int>(std::ceil(wrap / grid.h)) + 1);
  } else {
    padded = fft_friendly_size(2 * (grid.n - 1));
    attempts = options.max_doublings;
  }

  for (;;) {
    auto fft = make_fft(grid.d, padded);
    Eigenvalues ev = circulant_eigenvalues(model, grid, padded, *fft, options.roundoff_floor);
    const bool ok = ev.clip.mass <= options.clip_tolerance * ev.clip.max_eigenvalue;
    if (ok) {
      EmbeddingPlan plan;
      plan.grid_ = grid;
      plan.padded_ = padded;
      plan.model_name_ = model.name();
      plan.clip_ = ev.clip;
      const double total = static_cast<double>(ev.values.size());
      plan.amplitude_.resize(ev.values.size());
      for (std::size_t i = 0; i < ev.values.size(); ++i) plan.amplitude_[i] = std::sqrt(ev.values[i] / total);
      plan.eigenvalues_ = std::move(ev.values);
      plan.fft_ = std::move(fft);
      return plan;
    }
    if (attempts-- <= 0) {
      throw EmbeddingNotPSD("circulant embedding of '" + model.name() + "' is not PSD: clipped mass " +
                            std::to_string(ev.clip.mass) + " exceeds " + std::to_string(options.clip_tolerance) +
                            " x max eigenvalue " + std::to_string(ev.clip.max_eigenvalue) + " at padded size " +
                            std::to_string(padded));
    }
    padded = fft_friendly_size(2 * padded);
  }
}

std::pair<FieldSample, FieldSample> sample_field_pair(const EmbeddingPlan& plan, std::uint64_t seed) {
  return sample_pair_impl<true>(plan.grid_, plan.padded_, plan.amplitude_, *plan.fft_, plan.model_name_, seed);
}

std::pair<FieldSample, FieldSample> sample_field_pair_serial(const EmbeddingPlan& plan, std::uint64_t seed) {
  return sample_pair_impl<false>(plan.grid_, plan.padded_, plan.amplitude_, *plan.fft_, plan.model_name_, seed);
}

FieldSample sample_field(const EmbeddingPlan& plan, std::uint64_t seed) {
  return sample_field_pair(plan, seed).first;
}

FieldSample sample_field_spectral(const CovarianceModel& model, const GridSpec& grid, int waves, std::uint64_t seed) {
  if (waves < 1) throw ConfigError("spectral sampler needs at least one wave");
  if (model.dim() != grid.d) throw ConfigError("model and grid dimensions differ");
  const int d = grid.d;
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal;
  std::vector<double> freq(static_cast<std::size_t>(waves) * d);
  std::vector<double> a(waves), b(waves);
  for (int w = 0; w < waves; ++w) {
    model.sample_frequency(engine, std::span<double>(freq.data() + static_cast<std::size_t>(w) * d, d));
    a[w] = normal(engine);
    b[w] = normal(engine);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(waves));

  FieldSample out;
  out.grid = grid;
  out.seed = seed;
  out.model = model.name();
  out.values.resize(grid.size());
  const int n = grid.n;
  const int rows = d == 1 ? 1 : n;
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < rows; ++iy) {
    const double y = grid.coord(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double x = grid.coord(ix);
      double s = 0.0;
      for (int w = 0; w < waves; ++w) {
        const double* k = freq.data() + static_cast<std::size_t>(w) * d;
        const double phase = d == 1 ? k[0] * x : k[0] * x + k[1] * y;
        s += a[w] * std::cos(phase) + b[w] * std::sin(phase);
      }
      out.values[static_cast<std::size_t>(iy) * n + ix] = scale * s;
    }
  }
  return out;
}

FieldSample evaluate_field(const FieldFunction& field, const GridSpec& grid, std::string name) {
  if (!field) throw ConfigError("no deterministic field to evaluate");
  FieldSample out;
  out.grid = grid;
  out.model = std::move(name);
  out.values.resize(grid.size());
  const int n = grid.n;
  if (grid.d == 1) {
    for (int ix = 0; ix < n; ++ix) {
      const double x[1] = {grid.coord(ix)};
      out.values[ix] = field(x);
    }
    return out;
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double x[2] = {grid.coord(ix), grid.coord(iy)};
      out.values[static_cast<std::size_t>(iy) * n + ix] = field(x);
    }
  }
  return out;
}

FieldSample evaluate_field(const CovarianceModel& model, const GridSpec& grid) {
  if (model.dim() != grid.d) throw ConfigError("model and grid dimensions differ");
  return evaluate_field(model.deterministic_field(), grid, model.name());
}

}  // namespace nodal
