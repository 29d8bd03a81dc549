#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nodal/covariance.hpp"
#include "nodal/grid.hpp"

namespace nodal {

struct ClipReport {
  std::size_t count = 0;      // negative eigenvalues set to zero
  double mass = 0.0;          // sum of their magnitudes
  double max_eigenvalue = 0.0;
  // Negative values inside the FFT round-off floor; zeroed, not clipped.
  std::size_t rounded = 0;
};

struct EmbeddingOptions {
  // Torus extension: covariance at the wrap-around distance must be below this.
  double wrap_tolerance = 1e-14;
  // Clipped mass allowed, relative to the largest eigenvalue.
  double clip_tolerance = 1e-8;
  // |eigenvalue| below this times the largest one is FFT round-off.
  double roundoff_floor = 1e-13;
  // Extra padding doublings tried for slowly decaying covariances.
  int max_doublings = 3;
};

struct FftHandle;

// Circulant embedding of a stationary covariance on a periodic torus of
// padded_size()^d points. Read-only after construction and shareable
// across threads.
class EmbeddingPlan {
 public:
  const GridSpec& grid() const noexcept { return grid_; }
  int padded_size() const noexcept { return padded_; }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  const ClipReport& clip_report() const noexcept { return clip_; }
  const std::string& model_name() const noexcept { return model_name_; }

 private:
  friend EmbeddingPlan plan_embedding(const CovarianceModel&, const GridSpec&, const EmbeddingOptions&);
  friend std::pair<FieldSample, FieldSample> sample_field_pair(const EmbeddingPlan&, std::uint64_t);
  friend std::pair<FieldSample, FieldSample> sample_field_pair_serial(const EmbeddingPlan&, std::uint64_t);

  GridSpec grid_;
  int padded_ = 0;
  std::string model_name_;
  std::vector<double> eigenvalues_;
  std::vector<double> amplitude_;  // sqrt(lambda / N)
  ClipReport clip_;
  std::shared_ptr<const FftHandle> fft_;
};

// Smallest 7-smooth integer >= n (sizes FFTW handles efficiently).
int fft_friendly_size(int n);

EmbeddingPlan plan_embedding(const CovarianceModel& model, const GridSpec& grid,
                             const EmbeddingOptions& options = {});

// Both parts of one complex circulant draw: two independent fields with the
// model covariance. Bit-identical for equal (plan, seed) regardless of the
// number of OpenMP threads.
std::pair<FieldSample, FieldSample> sample_field_pair(const EmbeddingPlan& plan, std::uint64_t seed);
FieldSample sample_field(const EmbeddingPlan& plan, std::uint64_t seed);

// Single-threaded reference for sample_field_pair; must agree bit for bit.
std::pair<FieldSample, FieldSample> sample_field_pair_serial(const EmbeddingPlan& plan, std::uint64_t seed);

// Random-phase superposition of M plane waves with frequencies drawn from the
// spectral measure. Converges to the model law as M grows.
FieldSample sample_field_spectral(const CovarianceModel& model, const GridSpec& grid, int waves,
                                  std::uint64_t seed);

// Evaluates a deterministic field (synthetic models) on the grid.
FieldSample evaluate_field(const FieldFunction& field, const GridSpec& grid, std::string name = "synthetic-test");
FieldSample evaluate_field(const CovarianceModel& model, const GridSpec& grid);

}  // namespace nodal
