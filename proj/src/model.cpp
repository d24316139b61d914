#include "pursuitlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pursuitlab/error.hpp"

namespace pursuitlab::model {

using linalg::Matrix;
using linalg::Vector;

Matrix normalize_columns(const Matrix& a) {
  Matrix out = a;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double norm = linalg::vec_norm2(a.column(j));
    if (norm == 0.0) throw Error(ErrorCode::InvalidDims, "cannot normalize a zero column");
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) / norm;
  }
  return out;
}

SensingMatrix::SensingMatrix(Matrix raw) : mat_(normalize_columns(raw)) {
  if (mat_.rows() > mat_.cols()) {
    throw Error(ErrorCode::InvalidDims, "sensing matrix needs m <= N");
  }
}

namespace {

void check_dims(std::size_t m, std::size_t n) {
  if (m < 1 || m > n) throw Error(ErrorCode::InvalidDims, "need 1 <= m <= N");
}

std::vector<double> standard_normal_block(Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = rng.normal();
  return out;
}

}  // namespace

Matrix gen_gaussian_matrix(Rng& rng, std::size_t m, std::size_t n) {
  check_dims(m, n);
  auto data = standard_normal_block(rng, m * n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (auto& v : data) v *= scale;
  return Matrix(m, n, std::move(data));
}

SensingMatrix gen_sensing_matrix(Rng& rng, std::size_t m, std::size_t n) {
  check_dims(m, n);
  return SensingMatrix(Matrix(m, n, standard_normal_block(rng, m * n)));
}

SparseSignal gen_sparse_signal(Rng& rng, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidDims, "need 1 <= k <= N");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(perm[i], perm[j]);
  }
  SparseSignal s;
  s.support.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(s.support.begin(), s.support.end());
  s.x.assign(n, 0.0);
  for (std::size_t idx : s.support) {
    double value = 0.0;
    while (value == 0.0) value = rng.uniform_symmetric();
    s.x[idx] = value;
  }
  return s;
}

Measurement gen_measurement(Rng& rng, const SensingMatrix& a, const SparseSignal& x,
                            std::optional<double> snr_db) {
  if (x.n() != a.n()) throw Error(ErrorCode::DimensionMismatch, "signal length differs from N");
  Measurement meas;
  const Vector clean = linalg::matvec(a.matrix(), x.x);
  meas.v.assign(a.m(), 0.0);
  meas.y = clean;
  if (!snr_db) return meas;

  if (!std::isfinite(*snr_db)) throw Error(ErrorCode::InvalidArgument, "SNR must be finite");
  const double signal = linalg::vec_norm2(clean);
  if (signal == 0.0) throw Error(ErrorCode::ZeroSignal, "||Ax|| = 0, SNR undefined");

  Vector raw;
  double raw_norm = 0.0;
  do {
    raw = standard_normal_block(rng, a.m());
    raw_norm = linalg::vec_norm2(raw);
  } while (raw_norm == 0.0);

  const double target = signal * std::pow(10.0, -*snr_db / 20.0);
  const double scale = target / raw_norm;
  for (std::size_t i = 0; i < a.m(); ++i) {
    meas.v[i] = raw[i] * scale;
    meas.y[i] = clean[i] + meas.v[i];
  }
  meas.epsilon = linalg::vec_norm2(meas.v);
  meas.snr_db = snr_db;
  return meas;
}

}  // namespace pursuitlab::model
