#include "pursuitlab/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "pursuitlab/error.hpp"

namespace pursuitlab::pursuit {

using linalg::Matrix;
using linalg::Vector;

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Omp: return "OMP";
    case Variant::Sgp: return "SGP";
    case Variant::Tomp: return "TOMP";
    case Variant::Lomp: return "LOMP";
    case Variant::Cosamp: return "COSAMP";
  }
  return "?";
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ResidualMet: return "ResidualMet";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::Stalled: return "Stalled";
  }
  return "?";
}

AlgorithmSpec AlgorithmSpec::tomp(double alpha) {
  AlgorithmSpec s;
  s.variant = Variant::Tomp;
  s.alpha = alpha;
  return s;
}

AlgorithmSpec AlgorithmSpec::lomp(std::size_t lambda, OmegaRule rule, double omega) {
  AlgorithmSpec s;
  s.variant = Variant::Lomp;
  s.lambda = lambda;
  s.omega_rule = rule;
  s.omega = omega;
  return s;
}

AlgorithmSpec AlgorithmSpec::sgp(std::size_t k_max, std::optional<double> mu) {
  AlgorithmSpec s;
  s.variant = Variant::Sgp;
  s.k_max = k_max;
  s.mu = mu;
  return s;
}

AlgorithmSpec AlgorithmSpec::cosamp(std::size_t k) {
  AlgorithmSpec s;
  s.variant = Variant::Cosamp;
  s.k = k;
  return s;
}

void AlgorithmSpec::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  switch (variant) {
    case Variant::Omp: break;
    case Variant::Tomp:
      if (!(std::isfinite(alpha) && alpha > 0.0)) fail("T-OMP alpha must be positive");
      break;
    case Variant::Lomp:
      if (lambda < 1) fail("L-OMP lambda must be a positive integer");
      if (omega_rule == OmegaRule::Fixed && !(std::isfinite(omega) && omega > 0.0))
        fail("L-OMP omega must be positive");
      break;
    case Variant::Sgp:
      if (k_max < 1) fail("SGP k_max must be positive");
      if (mu && !(std::isfinite(*mu) && *mu > 0.0)) fail("SGP mu must be positive");
      break;
    case Variant::Cosamp:
      if (k < 1) fail("CoSaMP k must be positive");
      break;
  }
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(9);
  os << v;
  return os.str();
}

const char* omega_name(OmegaRule r) {
  switch (r) {
    case OmegaRule::SupportFrobenius: return "auto";
    case OmegaRule::GlobalFrobenius: return "global";
    case OmegaRule::Tight: return "tight";
    case OmegaRule::Fixed: return "fixed";
  }
  return "?";
}

}  // namespace

std::string AlgorithmSpec::params() const {
  switch (variant) {
    case Variant::Omp: return "";
    case Variant::Tomp: return "alpha=" + num(alpha);
    case Variant::Lomp:
      return "lambda=" + std::to_string(lambda) + ";omega=" +
             (omega_rule == OmegaRule::Fixed ? num(omega) : std::string(omega_name(omega_rule)));
    case Variant::Sgp:
      return "kmax=" + std::to_string(k_max) + ";mu=" + (mu ? num(*mu) : std::string("auto"));
    case Variant::Cosamp: return "k=" + std::to_string(k);
  }
  return "";
}

Vector observation_vector(const Matrix& a, std::span<const double> r) {
  return linalg::matvec_transpose(a, r);
}

double auto_mu(std::size_t m, std::size_t k_max) {
  return 2.0 * static_cast<double>(m) / (3.0 * static_cast<double>(k_max));
}

Vector landweber(const Matrix& a, std::span<const double> y, std::span<const double> x0,
                 double omega, std::size_t sweeps) {
  if (x0.size() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "landweber: start length");
  Vector x(x0.begin(), x0.end());
  Vector r(a.rows());
  for (std::size_t l = 0; l < sweeps; ++l) {
    const Vector ax = linalg::matvec(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - ax[i];
    const Vector g = linalg::matvec_transpose(a, r);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += omega * g[j];
  }
  return x;
}

Vector landweber_normal(const Matrix& g, std::span<const double> b, std::span<const double> x0,
                        double omega, std::size_t sweeps) {
  const std::size_t s = x0.size();
  if (g.rows() != s || g.cols() != s || b.size() != s)
    throw Error(ErrorCode::DimensionMismatch, "landweber_normal: shape mismatch");
  Vector x(x0.begin(), x0.end());
  Vector grad(s);
  for (std::size_t l = 0; l < sweeps; ++l) {
    for (std::size_t p = 0; p < s; ++p) grad[p] = b[p] - linalg::dot(g.row(p), x);
    for (std::size_t p = 0; p < s; ++p) x[p] += omega * grad[p];
  }
  return x;
}

Vector lms_pass(const Matrix& a, std::span<const double> y, std::span<const double> z0, double mu) {
  if (z0.size() != a.cols() || y.size() != a.rows())
    throw Error(ErrorCode::DimensionMismatch, "lms_pass: shape mismatch");
  Vector z(z0.begin(), z0.end());
  for (std::size_t l = 0; l < a.rows(); ++l) {
    const auto row = a.row(l);
    const double e = y[l] - linalg::dot(row, z);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += mu * e * row[j];
  }
  return z;
}

namespace {

// Columns of A selected so far, in selection order, together with the
// normal-equation pieces G = A_S^T A_S and b = A_S^T y kept up to date.
class ActiveSet {
 public:
  ActiveSet(const Matrix& a, std::span<const double> y)
      : a_(a), y_(y), in_set_(a.cols(), false) {}

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t m() const noexcept { return a_.rows(); }
  bool contains(std::size_t j) const noexcept { return in_set_[j]; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  void add(std::size_t j) {
    const std::size_t m = a_.rows();
    const std::size_t s = order_.size();
    const std::size_t base = cols_.size();
    cols_.resize(base + m);
    for (std::size_t i = 0; i < m; ++i) cols_[base + i] = a_(i, j);
    const double* cj = cols_.data() + base;

    std::vector<double> g((s + 1) * (s + 1));
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q) g[p * (s + 1) + q] = gram_[p * s + q];
    for (std::size_t p = 0; p < s; ++p) {
      const double* cp = cols_.data() + p * m;
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += cp[i] * cj[i];
      g[p * (s + 1) + s] = acc;
      g[s * (s + 1) + p] = acc;
    }
    double diag = 0.0;
    double by = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      diag += cj[i] * cj[i];
      by += cj[i] * y_[i];
    }
    g[s * (s + 1) + s] = diag;
    gram_ = std::move(g);
    aty_.push_back(by);
    order_.push_back(j);
    in_set_[j] = true;
  }

  void pop() {
    const std::size_t s = order_.size();
    const std::size_t n = s - 1;
    std::vector<double> g(n * n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) g[p * n + q] = gram_[p * s + q];
    gram_ = std::move(g);
    aty_.pop_back();
    in_set_[order_.back()] = false;
    order_.pop_back();
    cols_.resize(n * a_.rows());
  }

  Matrix submatrix() const {
    const std::size_t m = a_.rows();
    const std::size_t s = order_.size();
    std::vector<double> data(m * s);
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t i = 0; i < m; ++i) data[i * s + j] = cols_[j * m + i];
    return Matrix(m, s, std::move(data));
  }

  Matrix gram() const {
    const std::size_t s = order_.size();
    return Matrix(s, s, gram_);
  }
  std::span<const double> aty() const noexcept { return aty_; }
  std::span<const double> y() const noexcept { return y_; }
  double column(std::size_t p, std::size_t i) const noexcept { return cols_[p * a_.rows() + i]; }

  double trace() const noexcept {
    const std::size_t s = order_.size();
    double t = 0.0;
    for (std::size_t p = 0; p < s; ++p) t += gram_[p * s + p];
    return t;
  }

  // y - A_S x_S
  Vector residual(std::span<const double> xs) const {
    const std::size_t m = a_.rows();
    Vector r(y_.begin(), y_.end());
    for (std::size_t p = 0; p < xs.size(); ++p) {
      const double xp = xs[p];
      if (xp == 0.0) continue;
      const double* cp = cols_.data() + p * m;
      for (std::size_t i = 0; i < m; ++i) r[i] -= cp[i] * xp;
    }
    return r;
  }

 private:
  const Matrix& a_;
  std::span<const double> y_;
  std::vector<bool> in_set_;
  std::vector<std::size_t> order_;
  std::vector<double> cols_;  // column-major m x s
  std::vector<double> gram_;  // s x s
  std::vector<double> aty_;
};

// Re-estimates x_S given the active set and the warm start (previous x_S
// with a trailing zero for the newly added column).
using Estimator = std::function<Vector(const ActiveSet&, Vector warm)>;

double effective_threshold(const StoppingRule& stop, double y_norm) {
  return stop.residual_threshold > 0.0 ? stop.residual_threshold : kNoiseFreeThreshold * y_norm;
}

void check_inputs(const Matrix& a, std::span<const double> y, const StoppingRule& stop) {
  if (y.size() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "y length differs from rows of A");
  if (stop.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  if (!(stop.residual_threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative residual threshold");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "y has non-finite entries");
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double t) { return std::isfinite(t); });
}

RecoveryResult finish(std::size_t n, const std::vector<std::size_t>& order, std::span<const double> xs,
                      RecoveryResult result) {
  result.x_hat.assign(n, 0.0);
  for (std::size_t p = 0; p < order.size(); ++p) result.x_hat[order[p]] = xs[p];
  result.support = order;
  std::sort(result.support.begin(), result.support.end());
  return result;
}

RecoveryResult greedy_loop(const Matrix& a, std::span<const double> y, StoppingRule stop,
                           const Estimator& estimate) {
  check_inputs(a, y, stop);
  const double y_norm = linalg::vec_norm2(y);
  const double threshold = effective_threshold(stop, y_norm);

  ActiveSet active(a, y);
  Vector xs;
  Vector r(y.begin(), y.end());
  RecoveryResult result;
  result.residual_history.push_back(y_norm);

  while (true) {
    if (result.residual_history.back() <= threshold) {
      result.termination = Termination::ResidualMet;
      break;
    }
    if (result.iterations >= stop.max_iterations) {
      result.termination = Termination::MaxIterations;
      break;
    }
    const Vector u = observation_vector(a, r);
    std::size_t best = a.cols();
    double best_mag = -1.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (active.contains(j)) continue;
      const double mag = std::abs(u[j]);
      if (mag > best_mag) {
        best_mag = mag;
        best = j;
      }
    }
    if (best == a.cols() || best_mag < kStallCorrelation * y_norm) {
      result.termination = Termination::Stalled;
      break;
    }

    active.add(best);
    Vector warm = xs;
    warm.push_back(0.0);
    Vector next;
    try {
      next = estimate(active, std::move(warm));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient && e.code() != ErrorCode::NotPositiveDefinite) throw;
      active.pop();
      result.termination = Termination::Stalled;
      break;
    }
    if (!all_finite(next)) {
      active.pop();
      result.termination = Termination::Stalled;
      break;
    }
    xs = std::move(next);
    r = active.residual(xs);
    result.residual_history.push_back(linalg::vec_norm2(r));
    ++result.iterations;
  }
  return finish(a.cols(), active.order(), xs, std::move(result));
}

double max_gram_eigenvalue(const ActiveSet& active) {
  return linalg::symmetric_eigenvalues(active.gram()).back();
}

// Relative slack when comparing a user omega against 1 / lambda_max.
constexpr double kOmegaSlack = 1e-12;

}  // namespace

RecoveryResult recover_omp(const Matrix& a, std::span<const double> y, StoppingRule stop) {
  return greedy_loop(a, y, stop, [](const ActiveSet& active, Vector) {
    return linalg::least_squares(active.submatrix(), active.y());
  });
}

RecoveryResult recover_tomp(const Matrix& a, std::span<const double> y, StoppingRule stop, double alpha) {
  AlgorithmSpec::tomp(alpha).validate();
  return greedy_loop(a, y, stop, [alpha](const ActiveSet& active, Vector) {
    return linalg::solve_shifted_spd(active.gram(), active.aty(), alpha);
  });
}

RecoveryResult recover_lomp(const Matrix& a, std::span<const double> y, StoppingRule stop,
                            std::size_t lambda, OmegaRule rule, double omega) {
  AlgorithmSpec::lomp(lambda, rule, omega).validate();
  double global_omega = 0.0;
  if (rule == OmegaRule::GlobalFrobenius) {
    const double f = linalg::frobenius_norm(a);
    global_omega = 1.0 / (f * f);
  }
  return greedy_loop(a, y, stop, [=](const ActiveSet& active, Vector x) {
    double step = omega;
    switch (rule) {
      case OmegaRule::SupportFrobenius: step = 1.0 / active.trace(); break;
      case OmegaRule::GlobalFrobenius: step = global_omega; break;
      case OmegaRule::Tight: step = 1.0 / max_gram_eigenvalue(active); break;
      case OmegaRule::Fixed:
        if (omega > (1.0 + kOmegaSlack) / max_gram_eigenvalue(active)) {
          throw Error(ErrorCode::InvalidOmega, "omega exceeds ||A_S||_op^-2");
        }
        break;
    }
    return landweber_normal(active.gram(), active.aty(), x, step, lambda);
  });
}

RecoveryResult recover_sgp(const Matrix& a, std::span<const double> y, StoppingRule stop,
                           std::size_t k_max, std::optional<double> mu) {
  AlgorithmSpec::sgp(k_max, mu).validate();
  const double step = mu ? *mu : auto_mu(a.rows(), k_max);
  return greedy_loop(a, y, stop, [step, y](const ActiveSet& active, Vector z) {
    const std::size_t s = z.size();
    for (std::size_t l = 0; l < active.m(); ++l) {
      double e = y[l];
      for (std::size_t p = 0; p < s; ++p) e -= active.column(p, l) * z[p];
      for (std::size_t p = 0; p < s; ++p) z[p] += step * e * active.column(p, l);
    }
    return z;
  });
}

namespace {

// Indices of the `count` largest |v_j| (ties to the lower index), in that order.
std::vector<std::size_t> largest_magnitudes(std::span<const double> v, std::size_t count) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t p, std::size_t q) {
                      const double a = std::abs(v[p]);
                      const double b = std::abs(v[q]);
                      return a > b || (a == b && p < q);
                    });
  idx.resize(count);
  return idx;
}

}  // namespace

RecoveryResult recover_cosamp(const Matrix& a, std::span<const double> y, StoppingRule stop,
                              std::size_t k) {
  AlgorithmSpec::cosamp(k).validate();
  check_inputs(a, y, stop);
  if (2 * k > a.rows()) throw Error(ErrorCode::InvalidArgument, "CoSaMP needs 2k <= m");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const double y_norm = linalg::vec_norm2(y);
  const double threshold = effective_threshold(stop, y_norm);

  RecoveryResult result;
  result.x_hat.assign(n, 0.0);
  result.residual_history.push_back(y_norm);
  std::vector<std::size_t> support;
  Vector r(y.begin(), y.end());

  while (true) {
    const double current = result.residual_history.back();
    if (current <= threshold) {
      result.termination = Termination::ResidualMet;
      break;
    }
    if (result.iterations >= stop.max_iterations) {
      result.termination = Termination::MaxIterations;
      break;
    }
    const Vector u = observation_vector(a, r);
    const auto ranked = largest_magnitudes(u, n);
    if (std::abs(u[ranked.front()]) < kStallCorrelation * y_norm) {
      result.termination = Termination::Stalled;
      break;
    }

    // Previous support first, then the 2k strongest new correlations, capped at m columns.
    std::vector<std::size_t> merged = support;
    std::vector<bool> taken(n, false);
    for (std::size_t j : support) taken[j] = true;
    for (std::size_t p = 0; p < 2 * k && p < ranked.size() && merged.size() < m; ++p) {
      if (!taken[ranked[p]]) {
        taken[ranked[p]] = true;
        merged.push_back(ranked[p]);
      }
    }
    std::sort(merged.begin(), merged.end());

    Vector xi;
    try {
      xi = linalg::least_squares(a.select_columns(merged), y);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      result.termination = Termination::Stalled;
      break;
    }
    const auto keep = largest_magnitudes(xi, k);
    Vector candidate(n, 0.0);
    std::vector<std::size_t> next_support;
    for (std::size_t p : keep) {
      candidate[merged[p]] = xi[p];
      next_support.push_back(merged[p]);
    }
    std::sort(next_support.begin(), next_support.end());

    const Vector ax = linalg::matvec(a, candidate);
    Vector next_r(m);
    for (std::size_t i = 0; i < m; ++i) next_r[i] = y[i] - ax[i];
    const double next_norm = linalg::vec_norm2(next_r);
    // Pruning can raise the residual; stop on the better estimate instead.
    if (next_norm > current) {
      result.termination = Termination::Stalled;
      break;
    }
    const bool fixed_point = next_support == support && next_norm == current;
    result.x_hat = std::move(candidate);
    support = std::move(next_support);
    r = std::move(next_r);
    result.residual_history.push_back(next_norm);
    ++result.iterations;
    if (fixed_point) {
      result.termination = Termination::Stalled;
      break;
    }
  }
  result.support = support;
  return result;
}

RecoveryResult recover(const Matrix& a, std::span<const double> y, StoppingRule stop,
                       const AlgorithmSpec& spec) {
  switch (spec.variant) {
    case Variant::Omp: return recover_omp(a, y, stop);
    case Variant::Tomp: return recover_tomp(a, y, stop, spec.alpha);
    case Variant::Lomp: return recover_lomp(a, y, stop, spec.lambda, spec.omega_rule, spec.omega);
    case Variant::Sgp: return recover_sgp(a, y, stop, spec.k_max, spec.mu);
    case Variant::Cosamp: return recover_cosamp(a, y, stop, spec.k);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown variant");
}

}  // namespace pursuitlab::pursuit
