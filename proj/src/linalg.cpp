#include "pursuitlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pursuitlab/error.hpp"

namespace pursuitlab::linalg {

namespace {

void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) throw Error(code, what);
}

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// Cholesky factor of G + alpha I, lower triangle stored row-major in l.
std::vector<double> cholesky_shifted(const Matrix& g, double alpha) {
  const std::size_t n = g.rows();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double diag = g(j, j) + alpha;
    double d = diag;
    for (std::size_t p = 0; p < j; ++p) d -= l[j * n + p] * l[j * n + p];
    // A pivot lost to cancellation counts as zero.
    if (!(d > Tolerances::singular_relative * diag) || !std::isfinite(d)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "non-positive pivot at column " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l[i * n + p] * l[j * n + p];
      l[i * n + j] = s / ljj;
    }
  }
  return l;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  require(rows > 0 && cols > 0, ErrorCode::InvalidDims, "matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require(rows > 0 && cols > 0, ErrorCode::InvalidDims, "matrix dimensions must be positive");
  require(data_.size() == rows * cols, ErrorCode::DimensionMismatch,
          "entry count does not match rows * cols");
  for (double v : data_) require(std::isfinite(v), ErrorCode::NonFinite, "matrix entry is not finite");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    require(row.size() == c, ErrorCode::DimensionMismatch, "ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    require(std::isfinite(diag[i]), ErrorCode::NonFinite, "diagonal entry is not finite");
    m(i, i) = diag[i];
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::select_columns(std::span<const std::size_t> indices) const {
  require(!indices.empty(), ErrorCode::InvalidDims, "empty column selection");
  Matrix out(rows_, indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    require(indices[c] < cols_, ErrorCode::DimensionMismatch, "column index out of range");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t c = 0; c < indices.size(); ++c) out(i, c) = (*this)(i, indices[c]);
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vec_norm2(std::span<const double> x) {
  // Scaled accumulation so tiny or huge entries do not under/overflow.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const Matrix& a) { return vec_norm2(a.data()); }

Vector matvec(const Matrix& a, std::span<const double> x) {
  require(x.size() == a.cols(), ErrorCode::DimensionMismatch,
          ("matvec: " + shape(a.rows(), a.cols()) + " times length " + std::to_string(x.size())).c_str());
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

Vector matvec_transpose(const Matrix& a, std::span<const double> y) {
  require(y.size() == a.rows(), ErrorCode::DimensionMismatch,
          ("matvec_transpose: " + shape(a.rows(), a.cols()) + " with length " + std::to_string(y.size())).c_str());
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += row[j] * yi;
  }
  return out;
}

Matrix gram(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix g(n, n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t p = 0; p < n; ++p) {
      const double rp = row[p];
      for (std::size_t q = p; q < n; ++q) g(p, q) += rp * row[q];
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < p; ++q) g(p, q) = g(q, p);
  return g;
}

Vector least_squares(const Matrix& a, std::span<const double> y) {
  const std::size_t m = a.rows();
  const std::size_t s = a.cols();
  require(y.size() == m, ErrorCode::DimensionMismatch, "least_squares: rhs length differs from rows");
  if (s > m) throw Error(ErrorCode::RankDeficient, "least_squares: more columns than rows");

  // Work column-major so each Householder reflection touches contiguous memory.
  std::vector<double> w(m * s);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < s; ++j) w[j * m + i] = a(i, j);
  Vector rhs(y.begin(), y.end());
  Vector diag(s, 0.0);
  Vector v(m);

  for (std::size_t k = 0; k < s; ++k) {
    double* col = w.data() + k * m;
    const double norm = vec_norm2(std::span<const double>(col + k, m - k));
    if (norm == 0.0) {
      diag[k] = 0.0;
      continue;
    }
    const double alpha = col[k] > 0.0 ? -norm : norm;
    for (std::size_t i = k; i < m; ++i) v[i] = col[i];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    diag[k] = alpha;
    col[k] = alpha;
    for (std::size_t i = k + 1; i < m; ++i) col[i] = 0.0;
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (std::size_t j = k + 1; j < s; ++j) {
      double* cj = w.data() + j * m;
      double t = 0.0;
      for (std::size_t i = k; i < m; ++i) t += v[i] * cj[i];
      t *= beta;
      for (std::size_t i = k; i < m; ++i) cj[i] -= t * v[i];
    }
    double t = 0.0;
    for (std::size_t i = k; i < m; ++i) t += v[i] * rhs[i];
    t *= beta;
    for (std::size_t i = k; i < m; ++i) rhs[i] -= t * v[i];
  }

  double dmax = 0.0;
  for (double d : diag) dmax = std::max(dmax, std::abs(d));
  for (std::size_t k = 0; k < s; ++k) {
    if (!(std::abs(diag[k]) >= Tolerances::rank_relative * dmax) || dmax == 0.0) {
      throw Error(ErrorCode::RankDeficient,
                  "least_squares: R diagonal " + std::to_string(k) + " below rank tolerance");
    }
  }

  Vector z(s);
  for (std::size_t kk = s; kk-- > 0;) {
    double acc = rhs[kk];
    for (std::size_t j = kk + 1; j < s; ++j) acc -= w[j * m + kk] * z[j];
    z[kk] = acc / w[kk * m + kk];
  }
  return z;
}

Vector solve_shifted_spd(const Matrix& g, std::span<const double> b, double alpha) {
  const std::size_t n = g.rows();
  require(g.cols() == n, ErrorCode::DimensionMismatch, "solve_shifted_spd: matrix not square");
  require(b.size() == n, ErrorCode::DimensionMismatch, "solve_shifted_spd: rhs length mismatch");
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::InvalidArgument,
          "solve_shifted_spd: shift must be finite and nonnegative");
  const auto l = cholesky_shifted(g, alpha);
  Vector z(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double acc = z[i];
    for (std::size_t p = 0; p < i; ++p) acc -= l[i * n + p] * z[p];
    z[i] = acc / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double acc = z[i];
    for (std::size_t p = i + 1; p < n; ++p) acc -= l[p * n + i] * z[p];
    z[i] = acc / l[i * n + i];
  }
  return z;
}

Vector solve_tikhonov(const Matrix& a, std::span<const double> y, double alpha) {
  require(y.size() == a.rows(), ErrorCode::DimensionMismatch, "solve_tikhonov: rhs length differs from rows");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::InvalidArgument,
          "solve_tikhonov: alpha must be positive");
  return solve_shifted_spd(gram(a), matvec_transpose(a, y), alpha);
}

Vector symmetric_eigenvalues(const Matrix& sym) {
  const std::size_t n = sym.rows();
  require(sym.cols() == n, ErrorCode::DimensionMismatch, "symmetric_eigenvalues: matrix not square");
  std::vector<double> g(sym.data().begin(), sym.data().end());
  auto at = [&](std::size_t i, std::size_t j) -> double& { return g[i * n + j]; };

  const double total = vec_norm2(g);
  const double threshold = Tolerances::jacobi_off_diagonal * total;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += at(i, j) * at(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < Tolerances::jacobi_max_sweeps; ++sweep) {
    if (off_norm() <= threshold) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - sn * akq;
          at(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - sn * aqk;
          at(q, k) = sn * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
    }
  }

  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

EigExtremes gram_eig_extremes(const Matrix& a) {
  const auto eig = symmetric_eigenvalues(gram(a));
  return {eig.front(), eig.back()};
}

double condition_number(const Matrix& a) {
  const auto [lo, hi] = gram_eig_extremes(a);
  if (!(hi > 0.0) || lo <= Tolerances::singular_relative * hi) {
    throw Error(ErrorCode::SingularMatrix, "condition_number: smallest Gram eigenvalue is negligible");
  }
  return std::sqrt(hi / lo);
}

}  // namespace pursuitlab::linalg
