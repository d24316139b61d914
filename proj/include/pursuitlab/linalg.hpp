#pragma once

// Small dense linear algebra: Householder least squares, Cholesky-based
// Tikhonov solves and cyclic Jacobi eigen-extremes of Gram matrices.
// Sizes in this project stay below a few hundred, so everything is O(m s^2)
// straight loops over row-major storage.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pursuitlab::linalg {

/// Tolerances shared by the linear algebra kernels and their tests.
struct Tolerances {
  /// A diagonal of R smaller than this times the largest |R_ii| means rank deficiency.
  static constexpr double rank_relative = 1e-10;
  /// Jacobi stops once the off-diagonal Frobenius norm drops below this times ||G||_F.
  static constexpr double jacobi_off_diagonal = 1e-12;
  static constexpr int jacobi_max_sweeps = 100;
  /// lambda_min <= this times lambda_max counts as singular in condition_number.
  static constexpr double singular_relative = 1e-13;
};

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  /// Zero-filled rows x cols matrix. Both dimensions must be positive.
  Matrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of row-major entries; throws on size mismatch or non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  Vector column(std::size_t j) const;
  /// Submatrix made of the listed columns, in the listed order.
  Matrix select_columns(std::span<const std::size_t> indices) const;
  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double vec_norm2(std::span<const double> x);
double frobenius_norm(const Matrix& a);

/// A x
Vector matvec(const Matrix& a, std::span<const double> x);
/// A^T y
Vector matvec_transpose(const Matrix& a, std::span<const double> y);
/// A^T A
Matrix gram(const Matrix& a);

/// argmin ||y - A z||_2 via Householder QR. Throws RankDeficient if any
/// |R_ii| < rank_relative * max |R_ii| or if A has more columns than rows.
Vector least_squares(const Matrix& a, std::span<const double> y);

/// (A^T A + alpha I)^{-1} A^T y via Cholesky.
Vector solve_tikhonov(const Matrix& a, std::span<const double> y, double alpha);

/// (G + alpha I)^{-1} b for a symmetric positive semidefinite G, via Cholesky.
/// Used directly when the caller already maintains G = A^T A and b = A^T y.
Vector solve_shifted_spd(const Matrix& g, std::span<const double> b, double alpha);

struct EigExtremes {
  double lambda_min;
  double lambda_max;
};

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi.
Vector symmetric_eigenvalues(const Matrix& sym);

/// Smallest and largest eigenvalues of A^T A.
EigExtremes gram_eig_extremes(const Matrix& a);

/// sigma_max / sigma_min of A. Throws SingularMatrix when lambda_min is negligible.
double condition_number(const Matrix& a);

}  // namespace pursuitlab::linalg
