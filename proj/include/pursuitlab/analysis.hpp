#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pursuitlab/linalg.hpp"
#include "pursuitlab/model.hpp"
#include "pursuitlab/pursuit.hpp"

namespace pursuitlab::analysis {

/// Entries of x_hat with magnitude above this count towards its l0 norm.
inline constexpr double kNonzeroMagnitude = 1e-8;
/// Enumeration guard for ric_exact.
inline constexpr std::uint64_t kMaxSubsets = 1'000'000;

struct TrialMetrics {
  double nrmse = 0.0;
  std::size_t support_size = 0;
  bool support_recovered = false;  // supp(x) subset of S
  bool exact_support = false;      // supp(x) == S
  double residual_final = 0.0;
  std::size_t iterations = 0;
  pursuit::Termination termination = pursuit::Termination::MaxIterations;
  std::size_t nonzero_count = 0;   // ||x_hat||_0 above kNonzeroMagnitude

  friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

/// (1/sqrt(N)) ||x - x_hat||_2 / (max x - min x); the spread runs over all
/// entries of x, zeros included. Throws ZeroSpread for constant x.
double nrmse(std::span<const double> x, std::span<const double> x_hat);

/// 10 log10(||Ax||^2 / ||v||^2). Throws UndefinedSnr when either norm is zero.
double snr_db(std::span<const double> ax, std::span<const double> v);

struct SupportMetrics {
  std::size_t support_size;
  bool support_recovered;
  bool exact_support;
};

SupportMetrics support_metrics(const model::SparseSignal& x, const pursuit::RecoveryResult& result);

TrialMetrics trial_metrics(const model::SparseSignal& x, const pursuit::RecoveryResult& result);

/// Number of k-subsets of n items, saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Calls f(subset) for every k-subset of {0..n-1} in colexicographic order.
template <class F>
void for_each_subset_colex(std::size_t n, std::size_t k, F&& f) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    f(std::span<const std::size_t>(c));
    std::size_t i = 0;
    while (i + 1 < k && c[i] + 1 == c[i + 1]) {
      c[i] = i;
      ++i;
    }
    if (c[i] + 1 >= (i + 1 < k ? c[i + 1] : n)) return;
    ++c[i];
  }
}

/// Restricted isometry constant delta_k by enumerating every k-column
/// submatrix. Throws TooLarge past kMaxSubsets subsets, InvalidDims if k > m.
double ric_exact(const linalg::Matrix& a, std::size_t k);

struct BoundCheck {
  double lhs;
  double rhs;
  bool holds;
};

/// Noise amplification of a Tikhonov estimate against eps / sqrt(alpha).
BoundCheck check_tikhonov_bound(const linalg::Matrix& a_s, std::span<const double> y_clean,
                                std::span<const double> y_noisy, double alpha);

struct LandweberStep {
  std::size_t ell;
  double lhs;
  double rhs;
  bool holds;
};

/// Runs the clean and noisy Landweber sequences from zero and checks
/// ||x^{l,0} - x^{l,eps}|| <= sqrt(l) eps for l = 0..ell_max.
/// Throws InvalidOmega unless 0 < omega <= ||A_S||_op^-2.
std::vector<LandweberStep> check_landweber_bound(const linalg::Matrix& a_s, std::span<const double> y_clean,
                                                 std::span<const double> y_noisy, double omega,
                                                 std::size_t ell_max);

/// Absolute slack added to the right-hand side of both bound checks.
inline constexpr double kBoundSlack = 1e-12;

struct EnsembleReport {
  std::size_t instances = 0;
  std::size_t holding = 0;
  double worst_ratio = 0.0;  // max lhs / rhs over instances (and steps)
};

/// Seeded ensemble of Tikhonov bound checks cycling alpha through {0.01, 0.1, 1, 10}.
EnsembleReport tikhonov_ensemble(std::uint64_t seed, std::size_t instances);

/// Seeded ensemble of Landweber bound checks with omega = ||A_S||_F^-2 and ell <= ell_max.
EnsembleReport landweber_ensemble(std::uint64_t seed, std::size_t instances, std::size_t ell_max);

/// A fixed-support problem instance used by both ensembles: A_S with
/// normalized Gaussian columns, clean and noisy measurements.
struct BoundInstance {
  linalg::Matrix a_s;
  linalg::Vector y_clean;
  linalg::Vector y_noisy;
};

BoundInstance bound_instance(std::uint64_t seed, std::size_t index);

}  // namespace pursuitlab::analysis
