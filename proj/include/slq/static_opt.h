#pragma once

#include <optional>

#include "slq/linalg.h"
#include "slq/model.h"

namespace slq::static_opt {

/// Minimizer of
///   F(x, u) = ⟨Qx,x⟩ + ⟨Ru,u⟩ + 2⟨q,x⟩ + ⟨P(Cx+Du+σ), Cx+Du+σ⟩
/// over A x + B u + b = 0, with multiplier λ*.
struct StaticSolution {
  VectorXd x_star;
  VectorXd u_star;
  VectorXd lambda_star;
  VectorXd sigma_star;  // C x* + D u* + σ
  double F_value = 0.0;
  double V_static = 0.0;  // (F − φ₀)/2
  double kkt_residual = 0.0;
  double feasibility_residual = 0.0;
};

/// F(x, u) for the reduced problem.
double Objective(const ReducedLQProblem& p, const MatrixXd& P,
                 const VectorXd& x, const VectorXd& u);

/// Solves the saddle system
///   [H  Mᵀ] [z]   [g ]
///   [M  0 ] [λ] = [−b]
/// with M = (A, B), H = [[Q + CᵀPC, CᵀPD], [DᵀPC, R + DᵀPD]] and
/// g = −(Cᵀ; Dᵀ)Pσ − (q; 0), by symmetric indefinite factorization.
/// Throws NumericalError when (A, B) does not have full row rank.
StaticSolution SolveStatic(const ReducedLQProblem& p, const MatrixXd& P);

/// λ* = (M H⁻¹ Mᵀ)⁻¹ (b + M H⁻¹ g), the Schur-complement form of the same
/// system.
VectorXd SchurMultiplier(const ReducedLQProblem& p, const MatrixXd& P);

struct NaiveSolution {
  bool feasible = false;
  double constraint_residual = 0.0;  // least-squares residual of the stack
  VectorXd x;
  VectorXd u;
  double F0_value = 0.0;
};

/// Minimizes F₀(x,u) = ⟨Qx,x⟩ + 2⟨Sx,u⟩ + ⟨Ru,u⟩ + 2⟨q,x⟩ + 2⟨r,u⟩ subject
/// to A x + B u + b = 0 and C x + D u + σ = 0. Infeasible when the stacked
/// least-squares residual exceeds 1e−8.
NaiveSolution SolveNaiveStatic(const LQProblem& p);

struct DivergenceReport {
  StaticSolution correct;   // in original control coordinates
  NaiveSolution naive;
  bool naive_feasible = false;
  bool coincide = false;    // within 1e−8
  double distance = 0.0;    // max-norm gap, NaN when naive is infeasible
};

/// Solves both problems for the original (unreduced) data and compares them.
DivergenceReport StaticDivergenceReport(const LQProblem& p, const MatrixXd& P);

}  // namespace slq::static_opt
