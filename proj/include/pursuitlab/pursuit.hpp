#pragma once

// Greedy sparse recovery: OMP and its regularized relatives. All variants
// share the support-augmentation loop (pick the column most correlated with
// the residual, add it to S) and differ in how x_S is re-estimated.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pursuitlab/linalg.hpp"

namespace pursuitlab::pursuit {

enum class Variant { Omp, Sgp, Tomp, Lomp, Cosamp };

const char* to_string(Variant v) noexcept;

enum class Termination { ResidualMet, MaxIterations, Stalled };

const char* to_string(Termination t) noexcept;

/// How L-OMP picks its Landweber step size.
enum class OmegaRule {
  SupportFrobenius,  ///< ||A_S||_F^-2 at every outer iteration
  GlobalFrobenius,   ///< ||A||_F^-2 once per run
  Tight,             ///< 1 / lambda_max(A_S^T A_S) at every outer iteration
  Fixed,             ///< user value, validated against 1 / lambda_max
};

struct StoppingRule {
  double residual_threshold = 0.0;
  std::size_t max_iterations = 1;
};

struct AlgorithmSpec {
  Variant variant = Variant::Omp;
  double alpha = 1.0;                      // T-OMP
  std::size_t lambda = 1;                  // L-OMP inner sweeps
  OmegaRule omega_rule = OmegaRule::SupportFrobenius;
  double omega = 0.0;                      // L-OMP, used with OmegaRule::Fixed
  std::size_t k_max = 8;                   // SGP sparsity estimate for auto mu
  std::optional<double> mu;                // SGP; empty = 2m / (3 k_max)
  std::size_t k = 8;                       // CoSaMP a-priori sparsity

  static AlgorithmSpec omp() { return {}; }
  static AlgorithmSpec tomp(double alpha);
  static AlgorithmSpec lomp(std::size_t lambda, OmegaRule rule = OmegaRule::SupportFrobenius,
                            double omega = 0.0);
  static AlgorithmSpec sgp(std::size_t k_max, std::optional<double> mu = std::nullopt);
  static AlgorithmSpec cosamp(std::size_t k);

  /// Throws InvalidArgument when a parameter of the chosen variant is out of range.
  void validate() const;
  /// Variant parameters as `key=value` pairs joined by ';', e.g. "alpha=1".
  std::string params() const;
};

struct RecoveryResult {
  linalg::Vector x_hat;
  std::vector<std::size_t> support;        // ascending
  std::vector<double> residual_history;    // ||y||, then one entry per iteration
  std::size_t iterations = 0;
  Termination termination = Termination::MaxIterations;
};

/// Below this fraction of ||y||_2 the best correlation counts as zero and the run stalls.
inline constexpr double kStallCorrelation = 1e-14;
/// A zero residual threshold is replaced by this fraction of ||y||_2.
inline constexpr double kNoiseFreeThreshold = 1e-10;

/// A^T r
linalg::Vector observation_vector(const linalg::Matrix& a, std::span<const double> r);

/// SGP step size 2m / (3 k_max).
double auto_mu(std::size_t m, std::size_t k_max);

RecoveryResult recover_omp(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop);
RecoveryResult recover_tomp(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop,
                            double alpha);
RecoveryResult recover_lomp(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop,
                            std::size_t lambda, OmegaRule rule = OmegaRule::SupportFrobenius,
                            double omega = 0.0);
RecoveryResult recover_sgp(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop,
                           std::size_t k_max, std::optional<double> mu = std::nullopt);
RecoveryResult recover_cosamp(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop,
                              std::size_t k);

/// Dispatches on spec.variant.
RecoveryResult recover(const linalg::Matrix& a, std::span<const double> y, StoppingRule stop,
                       const AlgorithmSpec& spec);

/// Runs `sweeps` Landweber steps x <- x + omega A^T (y - A x) starting from x0.
linalg::Vector landweber(const linalg::Matrix& a, std::span<const double> y,
                         std::span<const double> x0, double omega, std::size_t sweeps);

/// Same iteration written on the normal equations: x <- x + omega (b - G x)
/// with G = A^T A and b = A^T y. This is what L-OMP runs internally.
linalg::Vector landweber_normal(const linalg::Matrix& g, std::span<const double> b,
                                std::span<const double> x0, double omega, std::size_t sweeps);

/// One ordered LMS pass over the rows of A starting from z0.
linalg::Vector lms_pass(const linalg::Matrix& a, std::span<const double> y,
                        std::span<const double> z0, double mu);

}  // namespace pursuitlab::pursuit
