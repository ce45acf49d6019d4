#include "slq/stability.h"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "slq/errors.h"
#include "slq/riccati.h"

namespace slq::stability {
namespace {

constexpr double kCalibrationStep = 0.01;
constexpr long kMaxCalibrationSteps = 1000000;

long CalibrationSteps(double beta) {
  const double steps = std::ceil(10.0 / beta / kCalibrationStep);
  return static_cast<long>(std::min<double>(steps, kMaxCalibrationSteps));
}

}  // namespace

MatrixXd MsGenerator(const Eigen::Ref<const MatrixXd>& A,
                     const Eigen::Ref<const MatrixXd>& C) {
  if (A.rows() != A.cols() || C.rows() != A.rows() || C.cols() != A.cols()) {
    throw DimensionError("A and C must be square and of equal size");
  }
  const MatrixXd I = MatrixXd::Identity(A.rows(), A.cols());
  return Kron(I, A) + Kron(A, I) + Kron(C, C);
}

StabilityReport IsMsStable(const Eigen::Ref<const MatrixXd>& A,
                           const Eigen::Ref<const MatrixXd>& C) {
  const int n = static_cast<int>(A.rows());
  const MatrixXd G = MsGenerator(A, C);
  StabilityReport report;
  report.generator_abscissa = SpectralAbscissa(G);
  report.stable = report.generator_abscissa < 0.0;

  if (report.stable) {
    report.beta = -report.generator_abscissa;
    // E|Φ(t)|² = tr M(t) with vec M(t) = e^{Gt} vec(I).
    const MatrixXd E = (G * kCalibrationStep).exp();
    VectorXd v = Vec(MatrixXd::Identity(n, n));
    const long steps = CalibrationSteps(report.beta);
    double alpha = n;
    for (long k = 1; k <= steps; ++k) {
      v = E * v;
      const double tr = Unvec(v, n, n).trace();
      alpha = std::max(alpha, tr * std::exp(report.beta * k * kCalibrationStep));
    }
    report.alpha = std::max(alpha, 1.0);
  }

  // PA + AᵀP + CᵀPC = −I is Gᵀ vec(P) = −vec(I).
  const Eigen::FullPivLU<MatrixXd> lu(G.transpose());
  if (!lu.isInvertible()) {
    report.witness_failed = true;
    return report;
  }
  const VectorXd p = lu.solve(-Vec(MatrixXd::Identity(n, n)));
  if (!p.allFinite()) {
    report.witness_failed = true;
    return report;
  }
  const MatrixXd P = Symmetrize(Unvec(p, n, n));
  if (IsPositiveDefinite(P)) {
    const MatrixXd L = P * A + A.transpose() * P + C.transpose() * P * C;
    report.witness_residual = (L + MatrixXd::Identity(n, n)).norm();
    report.witness_margin = MaxEigenvalue(L);
    if (report.witness_margin < 0.0) report.lyapunov_witness = P;
  }
  return report;
}

const char* ToString(Stabilizability s) {
  switch (s) {
    case Stabilizability::kStabilizable:
      return "stabilizable";
    case Stabilizability::kNotStabilizable:
      return "not_stabilizable";
    case Stabilizability::kIndeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

StabilizabilityResult IsStabilizable(const Eigen::Ref<const MatrixXd>& A,
                                     const Eigen::Ref<const MatrixXd>& B,
                                     const Eigen::Ref<const MatrixXd>& C,
                                     const Eigen::Ref<const MatrixXd>& D,
                                     const StabilizabilityOptions& options) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  LQProblem surrogate = LQProblem::Zero(n, m);
  surrogate.A = A;
  surrogate.B = B;
  surrogate.C = C;
  surrogate.D = D;
  surrogate.Q = MatrixXd::Identity(n, n);
  surrogate.R = MatrixXd::Identity(m, m);
  const ReducedLQProblem reduced = Reduce(surrogate);

  riccati::AreOptions are;
  are.h = options.h;
  are.max_time = options.max_time;

  StabilizabilityResult result;
  try {
    const riccati::AreSolution sol = riccati::SolveAre(reduced, are);
    result.status = Stabilizability::kStabilizable;
    result.theta = sol.theta;
    result.closed_loop_abscissa = sol.closed_loop_abscissa;
  } catch (const DivergenceError& e) {
    result.status = Stabilizability::kNotStabilizable;
    result.detail = e.what();
  } catch (const NumericalError& e) {
    result.status = Stabilizability::kIndeterminate;
    result.detail = e.what();
  }
  return result;
}

StabilizabilityResult IsStabilizable(const LQProblem& problem,
                                     const StabilizabilityOptions& options) {
  CheckDimensions(problem);
  return IsStabilizable(problem.A, problem.B, problem.C, problem.D, options);
}

DecayBound MatrixExponentialDecay(const Eigen::Ref<const MatrixXd>& A) {
  return MatrixExponentialDecay(A, MatrixXd::Zero(A.rows(), A.cols()));
}

DecayBound MatrixExponentialDecay(const Eigen::Ref<const MatrixXd>& A,
                                  const Eigen::Ref<const MatrixXd>& C) {
  if (!(SpectralAbscissa(A) < 0.0)) {
    throw NumericalError("matrix exponential decay requires a Hurwitz A");
  }
  const StabilityReport ms = IsMsStable(A, C);
  if (!ms.stable) {
    throw NumericalError("[A, C] is not mean-square stable");
  }
  DecayBound out;
  out.beta_half = 0.5 * ms.beta;
  const MatrixXd E = (MatrixXd(A) * kCalibrationStep).exp();
  MatrixXd Phi = MatrixXd::Identity(A.rows(), A.cols());
  double alpha = Phi.norm();
  const long steps = CalibrationSteps(out.beta_half);
  for (long k = 1; k <= steps; ++k) {
    Phi = E * Phi;
    alpha = std::max(alpha,
                     Phi.norm() * std::exp(out.beta_half * k * kCalibrationStep));
  }
  out.alpha_half = alpha;
  return out;
}

}  // namespace slq::stability
