#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pursuitlab/error.hpp"
#include "pursuitlab/model.hpp"
#include "pursuitlab/pursuit.hpp"
#include "pursuitlab/rng.hpp"

using namespace pursuitlab;
using namespace pursuitlab::pursuit;
using linalg::Matrix;
using linalg::Vector;

namespace {

struct Instance {
  model::SensingMatrix a;
  model::SparseSignal x;
  model::Measurement meas;
};

Instance make(std::uint64_t seed, std::size_t m, std::size_t n, std::size_t k, std::optional<double> snr) {
  Rng rng(seed);
  auto a = model::gen_sensing_matrix(rng, m, n);
  auto x = model::gen_sparse_signal(rng, n, k);
  auto meas = model::gen_measurement(rng, a, x, snr);
  return {std::move(a), std::move(x), std::move(meas)};
}

double residual_norm(const Matrix& a, const Vector& y, const Vector& x) {
  const auto ax = linalg::matvec(a, x);
  Vector r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - ax[i];
  return linalg::vec_norm2(r);
}

const AlgorithmSpec kAll[] = {AlgorithmSpec::omp(),    AlgorithmSpec::tomp(0.1),  AlgorithmSpec::tomp(10),
                              AlgorithmSpec::lomp(1),  AlgorithmSpec::lomp(100),  AlgorithmSpec::sgp(8),
                              AlgorithmSpec::cosamp(4)};

}  // namespace

TEST(Omp, IdentityRecoversInTwoIterations) {
  const Matrix a = Matrix::identity(6);
  const Vector x{0, 2.5, 0, 0, -1, 0};
  const auto r = recover_omp(a, x, {1e-10, 6});
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_EQ(r.termination, Termination::ResidualMet);
  EXPECT_EQ(r.support, (std::vector<std::size_t>{1, 4}));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(r.x_hat[j], x[j], 1e-15);
}

TEST(Omp, MatchesExhaustiveSearchNoiseFree) {
  // OMP is not guaranteed to find the best support at m=10, k=3. Whenever it
  // stops after k iterations it must agree with the exhaustive minimizer, and
  // that should be the common case.
  std::size_t agreed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = make(2000 + seed, 10, 20, 3, std::nullopt);
    const auto r = recover_omp(inst.a.matrix(), inst.meas.y, {0.0, 10});
    if (r.iterations != 3) continue;
    const auto best = oracle::best_k_support(inst.a.matrix(), inst.meas.y, 3);
    ASSERT_EQ(r.support, best.support) << seed;
    for (std::size_t j = 0; j < 20; ++j) ASSERT_NEAR(r.x_hat[j], best.x[j], 1e-8);
    ++agreed;
  }
  EXPECT_GE(agreed, 12u);
}

TEST(Omp, TieGoesToLowestIndex) {
  // Columns 0 and 2 are equally correlated with y.
  const auto a = Matrix::from_rows({{1, 0, 1}, {0, 1, 0}});
  const auto r = recover_omp(a, Vector{1, 0}, {1e-12, 1});
  EXPECT_EQ(r.support, (std::vector<std::size_t>{0}));
}

TEST(Omp, ZeroObservationStalls) {
  const Matrix a = Matrix::identity(3);
  const auto r = recover_omp(a, Vector{0, 0, 0}, {0.0, 3});
  // ||y|| = 0 meets any threshold immediately.
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.termination, Termination::ResidualMet);
}

TEST(Omp, HighSnrCapturesCorrectSupportSize) {
  std::size_t exact = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto inst = make(100 + s, 64, 256, 8, 40.0);
    const auto r = recover_omp(inst.a.matrix(), inst.meas.y, {inst.meas.epsilon, 64});
    exact += r.support.size() == 8;
  }
  EXPECT_GE(exact, 180u);
}

TEST(Tomp, SmallAlphaMatchesOmp) {
  const auto inst = make(7, 32, 64, 4, 30.0);
  const StoppingRule stop{inst.meas.epsilon, 32};
  const auto omp = recover_omp(inst.a.matrix(), inst.meas.y, stop);
  const auto tomp = recover_tomp(inst.a.matrix(), inst.meas.y, stop, 1e-12);
  EXPECT_EQ(omp.support, tomp.support);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_NEAR(omp.x_hat[j], tomp.x_hat[j], 1e-6);
}

TEST(Tomp, SingleColumnHalvesCoefficient) {
  const auto a = Matrix::from_rows({{0.6}, {0.8}});
  const auto r = recover_tomp(a, Vector{1.8, 2.4}, {1e-12, 1}, 1.0);
  EXPECT_NEAR(r.x_hat[0], 1.5, 1e-15);
}

TEST(Tomp, RejectsBadAlpha) { EXPECT_THROW(recover_tomp(Matrix::identity(2), Vector{1, 0}, {0, 1}, 0.0), Error); }

TEST(Lomp, SingleStepUnitCurvature) {
  const auto a = Matrix::from_rows({{0.6}, {0.8}});
  const auto r = recover_lomp(a, Vector{1.0, 2.0}, {1e-12, 1}, 1, OmegaRule::Fixed, 1.0);
  EXPECT_NEAR(r.x_hat[0], 0.6 + 1.6, 1e-15);
}

TEST(Lomp, ManySweepsConvergeToLeastSquares) {
  const auto inst = make(17, 16, 32, 4, std::nullopt);
  const std::vector<std::size_t> s(inst.x.support.begin(), inst.x.support.end());
  const Matrix a_s = inst.a.matrix().select_columns(s);
  const auto ls = linalg::least_squares(a_s, inst.meas.y);
  const double omega = 1.0 / std::pow(linalg::frobenius_norm(a_s), 2);
  const Vector zero(4, 0.0);
  const auto x = landweber(a_s, inst.meas.y, zero, omega, 10000);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(x[j], ls[j], 1e-8);
  const auto xn = landweber_normal(linalg::gram(a_s), linalg::matvec_transpose(a_s, inst.meas.y), zero, omega, 10000);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(xn[j], ls[j], 1e-8);
}

TEST(Lomp, LambdaSplitsAdditively) {
  Rng rng(3);
  const auto a = oracle::tall_gaussian(rng, 10, 4);
  Vector y(10);
  for (auto& v : y) v = rng.normal();
  const double omega = 0.2;
  const Vector zero(4, 0.0);
  const auto ab = landweber(a, y, zero, omega, 7);
  const auto a_then_b = landweber(a, y, landweber(a, y, zero, omega, 3), omega, 4);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(ab[j], a_then_b[j], 1e-14);
}

TEST(Lomp, FixedOmegaAboveBoundRejected) {
  const auto a = Matrix::from_rows({{1, 1}, {0, 1}});
  try {
    recover_lomp(a, Vector{1, 1}, {0, 2}, 5, OmegaRule::Fixed, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidOmega);
  }
}

TEST(Lomp, OmegaRulesAllRun) {
  const auto inst = make(19, 32, 64, 4, 25.0);
  for (auto rule : {OmegaRule::SupportFrobenius, OmegaRule::GlobalFrobenius, OmegaRule::Tight}) {
    const auto r = recover_lomp(inst.a.matrix(), inst.meas.y, {inst.meas.epsilon, 32}, 10, rule);
    EXPECT_EQ(r.iterations, r.support.size());
  }
}

TEST(Sgp, OneRowExactCorrection) {
  const auto a = Matrix::from_rows({{1.0}});
  const auto z = lms_pass(a, Vector{1.0}, Vector{0.0}, 1.0);
  EXPECT_EQ(z[0], 1.0);
}

TEST(Sgp, AutoMu) {
  EXPECT_DOUBLE_EQ(auto_mu(16, 8), 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(auto_mu(64, 8), 16.0 / 3.0);
}

TEST(Sgp, InnerPassMatchesLmsPass) {
  // With a single selected atom the SGP estimate is one LMS pass from zero.
  const auto inst = make(23, 16, 32, 2, 20.0);
  const auto r = recover_sgp(inst.a.matrix(), inst.meas.y, {0.0, 1}, 8);
  ASSERT_EQ(r.support.size(), 1u);
  const std::vector<std::size_t> s{r.support[0]};
  const auto z = lms_pass(inst.a.matrix().select_columns(s), inst.meas.y, Vector{0.0}, auto_mu(16, 8));
  EXPECT_NEAR(r.x_hat[s[0]], z[0], 1e-14);
}

TEST(Cosamp, IdentityOneIteration) {
  const Matrix a = Matrix::identity(8);
  const Vector x{0, 0, 3, 0, 0, -2, 0, 0};
  const auto r = recover_cosamp(a, x, {1e-10, 8}, 2);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.support, (std::vector<std::size_t>{2, 5}));
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(r.x_hat[j], x[j], 1e-15);
}

TEST(Cosamp, OneIterationMergesThenPrunes) {
  // k=1 from a zero start: least squares on the two strongest correlations,
  // then the larger coefficient is kept as is.
  const auto inst = make(29, 4, 6, 1, 20.0);
  const auto& a = inst.a.matrix();
  const auto r = recover_cosamp(a, inst.meas.y, {0.0, 1}, 1);
  const auto u = oracle::naive_matvec_transpose(a, inst.meas.y);
  std::vector<std::size_t> order(6);
  for (std::size_t j = 0; j < 6; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](auto p, auto q) { return std::abs(u[p]) > std::abs(u[q]); });
  std::vector<std::size_t> t{order[0], order[1]};
  std::sort(t.begin(), t.end());
  const auto xi = oracle::pinv_solve(a.select_columns(t), inst.meas.y);
  const std::size_t keep = std::abs(xi[0]) >= std::abs(xi[1]) ? 0 : 1;
  ASSERT_EQ(r.support, (std::vector<std::size_t>{t[keep]}));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(r.x_hat[j], j == t[keep] ? xi[keep] : 0.0, 1e-12);
}

TEST(Cosamp, OneSparseFindsBruteForceSupport) {
  const auto inst = make(29, 4, 6, 1, 20.0);
  const auto r = recover_cosamp(inst.a.matrix(), inst.meas.y, {0.0, 4}, 1);
  EXPECT_EQ(r.support, oracle::best_k_support(inst.a.matrix(), inst.meas.y, 1).support);
}

TEST(Cosamp, NeedsTwoKRows) {
  EXPECT_THROW(recover_cosamp(Matrix::identity(3), Vector{1, 0, 0}, {0, 3}, 2), Error);
}

TEST(AlgorithmSpec, ValidateAndParams) {
  EXPECT_EQ(AlgorithmSpec::tomp(1).params(), "alpha=1");
  EXPECT_EQ(AlgorithmSpec::lomp(100).params(), "lambda=100;omega=auto");
  EXPECT_EQ(AlgorithmSpec::sgp(8).params(), "kmax=8;mu=auto");
  EXPECT_EQ(AlgorithmSpec::cosamp(8).params(), "k=8");
  EXPECT_EQ(AlgorithmSpec::omp().params(), "");
  EXPECT_THROW(AlgorithmSpec::lomp(0).validate(), Error);
  EXPECT_THROW(AlgorithmSpec::sgp(0).validate(), Error);
  EXPECT_THROW(AlgorithmSpec::sgp(8, -1.0).validate(), Error);
}

TEST(ObservationVector, Basics) {
  Rng rng(1);
  const auto a = model::gen_sensing_matrix(rng, 4, 6).matrix();
  EXPECT_EQ(observation_vector(a, Vector(4, 0.0)), Vector(6, 0.0));
  const Vector r{1, -2, 3};
  EXPECT_EQ(observation_vector(Matrix::identity(3), r), r);
  Vector rr(4);
  for (auto& v : rr) v = rng.normal();
  const auto u = observation_vector(a, rr), ref = oracle::naive_matvec_transpose(a, rr);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(u[j], ref[j], 1e-12);
}

// Invariants across all variants on a seeded ensemble.
TEST(Properties, ResultInvariants) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::size_t m = s % 2 ? 16 : 32;
    const auto inst = make(500 + s, m, 64, 4, s % 4 == 0 ? std::nullopt : std::optional<double>(5.0 + s));
    const StoppingRule stop{inst.meas.epsilon, m};
    for (const auto& spec : kAll) {
      const auto r = recover(inst.a.matrix(), inst.meas.y, stop, spec);
      ASSERT_EQ(r.residual_history.size(), r.iterations + 1);
      ASSERT_NEAR(r.residual_history.back(), residual_norm(inst.a.matrix(), inst.meas.y, r.x_hat), 1e-9);
      ASSERT_TRUE(std::is_sorted(r.support.begin(), r.support.end()));
      for (std::size_t j = 0; j < 64; ++j) {
        if (!std::binary_search(r.support.begin(), r.support.end(), j)) ASSERT_EQ(r.x_hat[j], 0.0);
      }
      if (spec.variant != Variant::Cosamp) {
        ASSERT_EQ(r.support.size(), r.iterations) << to_string(spec.variant);
      }
      if (spec.variant == Variant::Omp || spec.variant == Variant::Cosamp) {
        for (std::size_t i = 1; i < r.residual_history.size(); ++i)
          ASSERT_LE(r.residual_history[i], r.residual_history[i - 1] + 1e-9);
      }
      if (r.termination == Termination::ResidualMet) {
        const double threshold = stop.residual_threshold > 0
                                     ? stop.residual_threshold
                                     : kNoiseFreeThreshold * linalg::vec_norm2(inst.meas.y);
        ASSERT_LE(r.residual_history.back(), threshold);
      }
    }
  }
}

TEST(Properties, OmpResidualOrthogonalToSelectedColumns) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto inst = make(900 + s, 32, 128, 6, 15.0);
    const auto r = recover_omp(inst.a.matrix(), inst.meas.y, {inst.meas.epsilon, 32});
    const auto ax = linalg::matvec(inst.a.matrix(), r.x_hat);
    Vector res(32);
    for (std::size_t i = 0; i < 32; ++i) res[i] = inst.meas.y[i] - ax[i];
    const auto u = observation_vector(inst.a.matrix(), res);
    for (auto j : r.support) ASSERT_LE(std::abs(u[j]), 1e-9);
  }
}

TEST(Properties, Deterministic) {
  const auto inst = make(5, 16, 64, 4, 10.0);
  for (const auto& spec : kAll) {
    const auto a = recover(inst.a.matrix(), inst.meas.y, {inst.meas.epsilon, 16}, spec);
    const auto b = recover(inst.a.matrix(), inst.meas.y, {inst.meas.epsilon, 16}, spec);
    EXPECT_EQ(a.x_hat, b.x_hat);
    EXPECT_EQ(a.residual_history, b.residual_history);
  }
}
