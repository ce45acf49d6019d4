#include <gtest/gtest.h>

#include <random>

#include "oracles.h"
#include "slq/dynamics.h"
#include "slq/errors.h"
#include "slq/model.h"
#include "slq/reference_problems.h"

namespace slq {
namespace {

TEST(Validate, NoisyIntegratorIsValidWithMargins) {
  const ValidationReport r = Validate(NoisyIntegrator());
  EXPECT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r.r_margin, 1.0);
  EXPECT_DOUBLE_EQ(r.q_margin, 2.0);
}

TEST(Validate, ZeroQIsNotPositiveDefinite) {
  LQProblem p = LQProblem::Zero(1, 1);
  p.R(0, 0) = 1.0;
  const ValidationReport r = Validate(p);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].what, "Q-S^T R^-1 S not positive definite");
}

TEST(Validate, ReportsNegativeMarginOfReducedQ) {
  std::mt19937_64 rng(7);
  LQProblem p = LQProblem::Zero(3, 3);
  p.R = MatrixXd::Identity(3, 3);
  p.S = testing::RandomMatrix(rng, 3, 3);
  VectorXd d(3);
  d << -0.1, 1.0, 1.0;
  p.Q = Symmetrize(p.S.transpose() * p.S + MatrixXd(d.asDiagonal()));
  const ValidationReport r = Validate(p);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NEAR(r.violations[0].margin, -0.1, 1e-12);
  EXPECT_NEAR(r.q_margin, -0.1, 1e-12);
}

TEST(Validate, RNotPositiveDefinite) {
  LQProblem p = LQProblem::Zero(1, 1);
  p.Q(0, 0) = 1.0;
  p.R(0, 0) = -1.0;
  const ValidationReport r = Validate(p);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].what, "R not positive definite");
  EXPECT_TRUE(std::isnan(r.q_margin));
}

TEST(Validate, SymmetryTolerance) {
  LQProblem p = LQProblem::Zero(2, 1);
  p.Q = MatrixXd::Identity(2, 2);
  p.R(0, 0) = 1.0;
  p.Q(0, 1) = 1e-15;
  EXPECT_TRUE(Validate(p).ok());
  p.Q(0, 1) = 1e-6;
  const ValidationReport r = Validate(p);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].what, "Q not symmetric");
}

TEST(Validate, DimensionMismatchIsStructural) {
  LQProblem p = NoisyIntegrator();
  p.B = MatrixXd::Zero(2, 1);
  EXPECT_THROW(Validate(p), DimensionError);
  p = NoisyIntegrator();
  p.sigma = VectorXd::Zero(3);
  EXPECT_THROW(Validate(p), DimensionError);
}

TEST(Reduce, IdentityWithoutCrossTerms) {
  const LQProblem p = NoisyIntegrator();
  const ReducedLQProblem r = Reduce(p);
  EXPECT_EQ(r.A, p.A);
  EXPECT_EQ(r.C, p.C);
  EXPECT_EQ(r.Q, p.Q);
  EXPECT_EQ(r.q, p.q);
  EXPECT_EQ(r.phi0, 0.0);
}

TEST(Reduce, ScalarExample) {
  LQProblem p = LQProblem::Zero(1, 1);
  p.A(0, 0) = 1;
  p.B(0, 0) = 1;
  p.D(0, 0) = 1;
  p.S(0, 0) = 1;
  p.R(0, 0) = 2;
  p.r(0) = 2;
  p.Q(0, 0) = 3;
  const ReducedLQProblem r = Reduce(p);
  EXPECT_DOUBLE_EQ(r.A(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.b(0), -1.0);
  EXPECT_DOUBLE_EQ(r.C(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(r.sigma(0), -1.0);
  EXPECT_DOUBLE_EQ(r.Q(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(r.q(0), -1.0);
  EXPECT_DOUBLE_EQ(r.phi0, 2.0);
  EXPECT_EQ(r.B, p.B);
  EXPECT_EQ(r.D, p.D);
}

TEST(Reduce, IdempotentAndRevalidates) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const LQProblem p = testing::RandomStabilizableProblem(rng, 3, 2, true);
    const ReducedLQProblem r = Reduce(p);
    EXPECT_TRUE(Validate(r.ToProblem()).ok());
    const ReducedLQProblem rr = Reduce(r.ToProblem());
    EXPECT_TRUE(rr.A.isApprox(r.A, 1e-14));
    EXPECT_TRUE(rr.C.isApprox(r.C, 1e-14));
    EXPECT_TRUE(rr.Q.isApprox(r.Q, 1e-14));
    EXPECT_EQ(rr.phi0, 0.0);
  }
}

TEST(Reduce, RejectsInvalidProblem) {
  LQProblem p = LQProblem::Zero(1, 1);
  p.R(0, 0) = 1.0;
  EXPECT_THROW(Reduce(p), ValidationError);
}

// J(x; u) = Ĵ(x; v) − φ₀T/2 under u = v − R⁻¹(SX + r). The original cost is
// evaluated exactly by the matrix-exponential oracle, the reduced one by
// the moment flow.
TEST(Reduce, CostIdentityOnRandomProblems) {
  std::mt19937_64 rng(2024);
  const double T = 2.0;
  for (int trial = 0; trial < 6; ++trial) {
    const LQProblem p = testing::RandomStabilizableProblem(rng, 2, 2, true);
    const ReducedLQProblem r = Reduce(p);
    const MatrixXd K = testing::RandomMatrix(rng, 2, 2, 0.5);
    const VectorXd k = testing::RandomVector(rng, 2);
    const VectorXd x0 = testing::RandomVector(rng, 2);
    const testing::ExactMoments exact =
        testing::ConstantGainMoments(p, K, k, x0, T);

    const MatrixXd RinvS = p.R.llt().solve(p.S);
    const VectorXd Rinvr = p.R.llt().solve(p.r);
    const dynamics::AffineFeedback fb =
        testing::ConstantFeedback(K + RinvS, k + Rinvr, T, 1e-3);
    const dynamics::MomentTrajectory mom = dynamics::MomentFlow(r, fb, x0);
    EXPECT_NEAR(mom.cost.back(), exact.cost, 1e-8 * (1 + std::abs(exact.cost)));
    EXPECT_TRUE(mom.mean.back().isApprox(exact.mean, 1e-9));
  }
}

TEST(OriginalControl, UndoesTheShift) {
  LQProblem p = LQProblem::Zero(1, 1);
  p.R(0, 0) = 2;
  p.S(0, 0) = 1;
  p.r(0) = 2;
  const VectorXd u =
      OriginalControl(p, VectorXd::Constant(1, 3.0), VectorXd::Constant(1, 4.0));
  EXPECT_NEAR(u(0), 3.0 - (4.0 + 2.0) / 2.0, 1e-15);
}

}  // namespace
}  // namespace slq
