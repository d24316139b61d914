#pragma once

// Problem-instance generation: Gaussian sensing matrices, sparse signals and
// noisy measurements at a prescribed SNR.

#include <cstddef>
#include <optional>
#include <vector>

#include "pursuitlab/linalg.hpp"
#include "pursuitlab/rng.hpp"

namespace pursuitlab::model {

/// m x N matrix whose columns have unit Euclidean norm.
class SensingMatrix {
 public:
  /// Normalizes the columns of `raw`. Throws InvalidDims if m > N or a column is zero.
  explicit SensingMatrix(linalg::Matrix raw);

  const linalg::Matrix& matrix() const noexcept { return mat_; }
  std::size_t m() const noexcept { return mat_.rows(); }
  std::size_t n() const noexcept { return mat_.cols(); }

 private:
  linalg::Matrix mat_;
};

struct SparseSignal {
  linalg::Vector x;
  std::vector<std::size_t> support;  // strictly increasing

  std::size_t n() const noexcept { return x.size(); }
  std::size_t k() const noexcept { return support.size(); }
};

struct Measurement {
  linalg::Vector y;
  linalg::Vector v;
  double epsilon = 0.0;           // ||v||_2
  std::optional<double> snr_db;   // empty means noise-free
};

/// Scales every column to unit norm. Zero columns are rejected.
linalg::Matrix normalize_columns(const linalg::Matrix& a);

/// i.i.d. N(0, 1/m) entries without column normalization, for RIC studies.
linalg::Matrix gen_gaussian_matrix(Rng& rng, std::size_t m, std::size_t n);

/// i.i.d. standard normal entries drawn in row-major order, then columns normalized.
SensingMatrix gen_sensing_matrix(Rng& rng, std::size_t m, std::size_t n);

/// Uniform random k-subset support (Fisher-Yates prefix) with values uniform
/// on [-1, 1]; exact zeros are redrawn.
SparseSignal gen_sparse_signal(Rng& rng, std::size_t n, std::size_t k);

/// y = A x + v with ||v||_2 = ||A x||_2 * 10^(-snr_db / 20). Without an SNR
/// the measurement is noise-free and no random numbers are consumed.
Measurement gen_measurement(Rng& rng, const SensingMatrix& a, const SparseSignal& x,
                            std::optional<double> snr_db);

}  // namespace pursuitlab::model
