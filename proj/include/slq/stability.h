#pragma once

#include <optional>
#include <string>

#include "slq/linalg.h"
#include "slq/model.h"

namespace slq::stability {

/// Generator of the second-moment flow d/dt E[XXᵀ] = A M + M Aᵀ + C M Cᵀ of
/// dX = A X dt + C X dW, acting on column-major vec(M):
///   G = I ⊗ A + A ⊗ I + C ⊗ C.
MatrixXd MsGenerator(const Eigen::Ref<const MatrixXd>& A,
                     const Eigen::Ref<const MatrixXd>& C);

struct StabilityReport {
  double generator_abscissa = 0.0;
  bool stable = false;
  // Valid only when stable: E|Φ(t)|² ≤ alpha·exp(−beta·t) on the
  // calibration grid (step 0.01 up to t = 10/beta).
  double beta = 0.0;
  double alpha = 0.0;
  // P ≻ 0 solving P A + Aᵀ P + Cᵀ P C = −I, present iff found positive
  // definite.
  std::optional<MatrixXd> lyapunov_witness;
  double witness_residual = 0.0;  // ‖PA + AᵀP + CᵀPC + I‖_F
  double witness_margin = 0.0;    // λ_max(PA + AᵀP + CᵀPC), negative if valid
  bool witness_failed = false;    // singular/non-finite Lyapunov system
};

StabilityReport IsMsStable(const Eigen::Ref<const MatrixXd>& A,
                           const Eigen::Ref<const MatrixXd>& C);

enum class Stabilizability { kStabilizable, kNotStabilizable, kIndeterminate };

const char* ToString(Stabilizability s);

struct StabilizabilityOptions {
  double h = 0.0;          // 0 selects the Riccati default step
  double max_time = 500.0; // Σ-flow time budget
};

struct StabilizabilityResult {
  Stabilizability status = Stabilizability::kIndeterminate;
  std::optional<MatrixXd> theta;
  double closed_loop_abscissa = 0.0;
  std::string detail;
};

/// Probes L²-stabilizability of [A, C; B, D] by synthesizing the ARE for the
/// surrogate cost Q = I, R = I. A converged synthesis certifies the
/// stabilizer Θ = −(I + DᵀPD)⁻¹(BᵀP + DᵀPC); a diverging Σ-flow refutes it;
/// running out of time budget is reported as indeterminate.
StabilizabilityResult IsStabilizable(const Eigen::Ref<const MatrixXd>& A,
                                     const Eigen::Ref<const MatrixXd>& B,
                                     const Eigen::Ref<const MatrixXd>& C,
                                     const Eigen::Ref<const MatrixXd>& D,
                                     const StabilizabilityOptions& options = {});
StabilizabilityResult IsStabilizable(const LQProblem& problem,
                                     const StabilizabilityOptions& options = {});

struct DecayBound {
  double alpha_half = 0.0;
  double beta_half = 0.0;
};

/// |e^{At}|_F ≤ alpha_half·exp(−beta_half·t) with beta_half half the
/// mean-square rate of [A, C] (C defaults to zero). Throws NumericalError
/// when A is not Hurwitz or [A, C] is not mean-square stable.
DecayBound MatrixExponentialDecay(const Eigen::Ref<const MatrixXd>& A);
DecayBound MatrixExponentialDecay(const Eigen::Ref<const MatrixXd>& A,
                                  const Eigen::Ref<const MatrixXd>& C);

}  // namespace slq::stability
