#include "pursuitlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pursuitlab/error.hpp"
#include "pursuitlab/rng.hpp"

namespace pursuitlab::analysis {

using linalg::Matrix;
using linalg::Vector;

double nrmse(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size() || x.empty())
    throw Error(ErrorCode::DimensionMismatch, "nrmse: length mismatch");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double spread = *hi - *lo;
  if (!(spread > 0.0)) throw Error(ErrorCode::ZeroSpread, "nrmse: x is constant");
  Vector diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_hat[i];
  return linalg::vec_norm2(diff) / (std::sqrt(static_cast<double>(x.size())) * spread);
}

double snr_db(std::span<const double> ax, std::span<const double> v) {
  const double s = linalg::vec_norm2(ax);
  const double n = linalg::vec_norm2(v);
  if (!(s > 0.0) || !(n > 0.0)) throw Error(ErrorCode::UndefinedSnr, "snr_db: zero signal or noise");
  return 20.0 * std::log10(s / n);
}

SupportMetrics support_metrics(const model::SparseSignal& x, const pursuit::RecoveryResult& result) {
  // Both index lists are ascending.
  const bool contained = std::includes(result.support.begin(), result.support.end(),
                                       x.support.begin(), x.support.end());
  return {result.support.size(), contained, contained && result.support.size() == x.support.size()};
}

TrialMetrics trial_metrics(const model::SparseSignal& x, const pursuit::RecoveryResult& result) {
  TrialMetrics t;
  t.nrmse = nrmse(x.x, result.x_hat);
  const auto sm = support_metrics(x, result);
  t.support_size = sm.support_size;
  t.support_recovered = sm.support_recovered;
  t.exact_support = sm.exact_support;
  t.residual_final = result.residual_history.back();
  t.iterations = result.iterations;
  t.termination = result.termination;
  t.nonzero_count = static_cast<std::size_t>(std::count_if(
      result.x_hat.begin(), result.x_hat.end(), [](double v) { return std::abs(v) > kNonzeroMagnitude; }));
  return t;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  __extension__ using u128 = unsigned __int128;
  u128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

double ric_exact(const Matrix& a, std::size_t k) {
  if (k < 1 || k > a.rows()) throw Error(ErrorCode::InvalidDims, "ric_exact: need 1 <= k <= m");
  if (k > a.cols()) throw Error(ErrorCode::InvalidDims, "ric_exact: need k <= N");
  if (binomial(a.cols(), k) > kMaxSubsets) {
    throw Error(ErrorCode::TooLarge, "ric_exact: more than 1e6 subsets to enumerate");
  }
  const Matrix g = linalg::gram(a);
  Matrix sub(k, k);
  double delta = 0.0;
  for_each_subset_colex(a.cols(), k, [&](std::span<const std::size_t> s) {
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) sub(p, q) = g(s[p], s[q]);
    const auto eig = linalg::symmetric_eigenvalues(sub);
    delta = std::max({delta, 1.0 - eig.front(), eig.back() - 1.0});
  });
  return delta;
}

BoundCheck check_tikhonov_bound(const Matrix& a_s, std::span<const double> y_clean,
                                std::span<const double> y_noisy, double alpha) {
  if (y_clean.size() != y_noisy.size()) throw Error(ErrorCode::DimensionMismatch, "measurement lengths differ");
  const Vector clean = linalg::solve_tikhonov(a_s, y_clean, alpha);
  const Vector noisy = linalg::solve_tikhonov(a_s, y_noisy, alpha);
  Vector dx(clean.size()), dy(y_clean.size());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = clean[i] - noisy[i];
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = y_noisy[i] - y_clean[i];
  const double lhs = linalg::vec_norm2(dx);
  const double rhs = linalg::vec_norm2(dy) / std::sqrt(alpha);
  return {lhs, rhs, lhs <= rhs + kBoundSlack};
}

std::vector<LandweberStep> check_landweber_bound(const Matrix& a_s, std::span<const double> y_clean,
                                                 std::span<const double> y_noisy, double omega,
                                                 std::size_t ell_max) {
  if (y_clean.size() != y_noisy.size() || y_clean.size() != a_s.rows())
    throw Error(ErrorCode::DimensionMismatch, "measurement lengths differ");
  const double lambda_max = linalg::gram_eig_extremes(a_s).lambda_max;
  if (!(omega > 0.0) || omega * lambda_max > 1.0 + 1e-12) {
    throw Error(ErrorCode::InvalidOmega, "omega must lie in (0, ||A_S||_op^-2]");
  }
  Vector dy(y_clean.size());
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = y_noisy[i] - y_clean[i];
  const double eps = linalg::vec_norm2(dy);

  std::vector<LandweberStep> steps;
  steps.reserve(ell_max + 1);
  Vector clean(a_s.cols(), 0.0), noisy(a_s.cols(), 0.0), dx(a_s.cols());
  for (std::size_t ell = 0; ell <= ell_max; ++ell) {
    if (ell > 0) {
      clean = pursuit::landweber(a_s, y_clean, clean, omega, 1);
      noisy = pursuit::landweber(a_s, y_noisy, noisy, omega, 1);
    }
    for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = clean[j] - noisy[j];
    const double lhs = linalg::vec_norm2(dx);
    const double rhs = std::sqrt(static_cast<double>(ell)) * eps;
    steps.push_back({ell, lhs, rhs, lhs <= rhs + kBoundSlack});
  }
  return steps;
}

BoundInstance bound_instance(std::uint64_t seed, std::size_t index) {
  Rng rng = Rng::child(seed, index, 0);
  const std::size_t s = 1 + static_cast<std::size_t>(rng.below(4));
  const std::size_t m_lo = std::max<std::size_t>(6, 2 * s);
  const std::size_t m = m_lo + static_cast<std::size_t>(rng.below(17 - m_lo));
  std::vector<double> raw(m * s);
  for (auto& v : raw) v = rng.normal();
  Matrix a_s = model::normalize_columns(Matrix(m, s, std::move(raw)));

  Vector xs(s);
  for (auto& v : xs) {
    do v = rng.uniform_symmetric();
    while (v == 0.0);
  }
  Vector y_clean = linalg::matvec(a_s, xs);
  // Noise level spread over three decades below the signal energy.
  Vector noise(m);
  for (auto& v : noise) v = rng.normal();
  const double scale = linalg::vec_norm2(y_clean) * std::pow(10.0, -3.0 * rng.uniform()) /
                       linalg::vec_norm2(noise);
  Vector y_noisy(m);
  for (std::size_t i = 0; i < m; ++i) y_noisy[i] = y_clean[i] + scale * noise[i];
  return {std::move(a_s), std::move(y_clean), std::move(y_noisy)};
}

EnsembleReport tikhonov_ensemble(std::uint64_t seed, std::size_t instances) {
  static constexpr double kAlphas[] = {0.01, 0.1, 1.0, 10.0};
  EnsembleReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = bound_instance(seed, i);
    const auto check = check_tikhonov_bound(inst.a_s, inst.y_clean, inst.y_noisy, kAlphas[i % 4]);
    ++report.instances;
    if (check.holds) ++report.holding;
    if (check.rhs > 0.0) report.worst_ratio = std::max(report.worst_ratio, check.lhs / check.rhs);
  }
  return report;
}

EnsembleReport landweber_ensemble(std::uint64_t seed, std::size_t instances, std::size_t ell_max) {
  EnsembleReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = bound_instance(seed, i);
    const double f = linalg::frobenius_norm(inst.a_s);
    const auto steps = check_landweber_bound(inst.a_s, inst.y_clean, inst.y_noisy, 1.0 / (f * f), ell_max);
    ++report.instances;
    bool all = true;
    for (const auto& st : steps) {
      all = all && st.holds;
      if (st.rhs > 0.0) report.worst_ratio = std::max(report.worst_ratio, st.lhs / st.rhs);
    }
    if (all) ++report.holding;
  }
  return report;
}

}  // namespace pursuitlab::analysis
