#pragma once

#include <cstddef>
#include <vector>

#include "slq/linalg.h"
#include "slq/model.h"

namespace slq::riccati {

// Gain maps of the reduced problem evaluated at a symmetric P.
//   𝒬(P) = PA + AᵀP + CᵀPC + Q
//   𝒮(P) = BᵀP + DᵀPC
//   𝒭(P) = R + DᵀPD
//   𝒦(P) = −𝒭(P)⁻¹𝒮(P)
MatrixXd GainQ(const ReducedLQProblem& p, const MatrixXd& P);
MatrixXd GainS(const ReducedLQProblem& p, const MatrixXd& P);
MatrixXd GainR(const ReducedLQProblem& p, const MatrixXd& P);
MatrixXd GainK(const ReducedLQProblem& p, const MatrixXd& P);

/// 𝒬(P) − 𝒮(P)ᵀ𝒭(P)⁻¹𝒮(P), symmetrized.
MatrixXd RiccatiRhs(const ReducedLQProblem& p, const MatrixXd& P);

/// P𝒜 + 𝒜ᵀP + 𝒞ᵀP𝒞 + Q + KᵀRK with 𝒜 = A + BK, 𝒞 = C + DK.
MatrixXd ClosedLoopLyapunov(const ReducedLQProblem& p, const MatrixXd& P,
                            const MatrixXd& K);

/// 1e−3·min(1, 1/‖A‖_F).
double DefaultStep(const ReducedLQProblem& p);

/// Norm beyond which the Σ-flow is declared divergent: 1e8·(1 + ‖Q‖_F).
double DivergenceCap(const ReducedLQProblem& p);

/// ARE residual tolerance 1e−10·(1 + ‖Q‖_F).
double AreTolerance(const ReducedLQProblem& p);

struct SigmaTrajectory {
  std::vector<double> grid;     // 0 = t_0 < … < t_N = T
  std::vector<MatrixXd> values;
  double step = 0.0;            // actual uniform step T/N
};

/// Σ̇ = 𝒬(Σ) − 𝒮(Σ)ᵀ𝒭(Σ)⁻¹𝒮(Σ), Σ(0) = 0, by fixed-step RK4 on [0, T].
/// N = round(T/h) steps (at least one). Throws DivergenceError when
/// ‖Σ‖ exceeds DivergenceCap.
SigmaTrajectory SigmaFlow(const ReducedLQProblem& p, double T, double h);

enum class FlowOutcome { kSettled, kDiverged, kBudgetExhausted };

struct SettledFlow {
  FlowOutcome outcome = FlowOutcome::kBudgetExhausted;
  MatrixXd sigma;
  double time = 0.0;
};

/// Runs the Σ-flow in unit windows until ‖Σ(t+1) − Σ(t)‖_F ≤
/// tol·(1 + ‖Σ(t+1)‖_F), the norm passes the cap, or max_time is reached.
SettledFlow SettleSigmaFlow(const ReducedLQProblem& p, double h, double tol,
                            double max_time);

struct AreOptions {
  double h = 0.0;          // 0 selects DefaultStep
  double flow_tol = 1e-6;  // stall criterion handed to SettleSigmaFlow
  double max_time = 1000.0;
  int max_newton = 50;
};

struct AreSolution {
  MatrixXd P;
  MatrixXd theta;
  double residual = 0.0;
  int iterations = 0;      // Newton–Kleinman steps taken
  double flow_time = 0.0;  // Σ-flow time before refinement
  bool refined = false;    // residual reached AreTolerance
  double closed_loop_abscissa = 0.0;
};

/// Stabilizing solution of 𝒬(P) − 𝒮(P)ᵀ𝒭(P)⁻¹𝒮(P) = 0: Σ-flow to a stall,
/// then Newton–Kleinman. Throws DivergenceError if the flow diverges and
/// NumericalError if the flow does not settle within max_time or the result
/// does not stabilize the closed loop. Newton stagnation returns the best
/// iterate with refined = false.
AreSolution SolveAre(const ReducedLQProblem& p, const AreOptions& options = {});

/// P_T(t) on a uniform grid over [0, T].
struct RiccatiSchedule {
  std::vector<double> grid;
  double step = 0.0;
  double horizon = 0.0;
  std::vector<MatrixXd> P;
  std::vector<MatrixXd> Pdot;  // dP_T/dt at the nodes

  std::size_t size() const { return grid.size(); }
  /// P_T at the midpoint of [t_i, t_{i+1}] (cubic Hermite).
  MatrixXd Midpoint(std::size_t i) const;
};

/// P_T(t) = Σ(T − t) from a single forward Σ integration.
RiccatiSchedule FiniteHorizonRiccati(const ReducedLQProblem& p, double T,
                                     double h);
RiccatiSchedule ScheduleFromSigma(const ReducedLQProblem& p,
                                  const SigmaTrajectory& sigma);

/// P_T ≡ P on the grid of [0, T] (the infinite-horizon feedback).
RiccatiSchedule ConstantSchedule(const MatrixXd& P, double T, double h);

/// Θ_T(t_i) = 𝒦(P_T(t_i)).
std::vector<MatrixXd> GainSchedule(const ReducedLQProblem& p,
                                   const RiccatiSchedule& schedule);

struct PhiTrajectory {
  std::vector<double> grid;
  double step = 0.0;
  std::vector<VectorXd> values;
  std::vector<VectorXd> derivs;  // dφ/dt at the nodes
  VectorXd terminal;

  std::size_t size() const { return grid.size(); }
  VectorXd Midpoint(std::size_t i) const;
};

/// φ̇ + (A + BΘ_T)ᵀφ + (C + DΘ_T)ᵀP_Tσ + P_Tb + q = 0, φ(T) = 0.
PhiTrajectory PhiValueOde(const ReducedLQProblem& p,
                          const RiccatiSchedule& schedule);

/// φ̇_T + (A + BΘ_T)ᵀφ_T + (C + DΘ_T)ᵀ(P_T − P)σ* = 0, φ_T(T) = −λ*.
PhiTrajectory PhiTurnpikeOde(const ReducedLQProblem& p,
                             const RiccatiSchedule& schedule,
                             const MatrixXd& P, const VectorXd& lambda_star,
                             const VectorXd& sigma_star);

struct DecayFit {
  double K = 0.0;
  double rate = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  int points = 0;
};

/// Fits ‖P − Σ(t)‖_F ≈ K e^{−rate·t} by least squares on log‖P − Σ(t)‖
/// over the points where it lies in [1e−9, 1e−2] times its value at t = 0.
/// Throws NumericalError when fewer than three points qualify.
DecayFit MeasureDecayRate(const SigmaTrajectory& traj, const MatrixXd& P);
/// Same with P replaced by the last value of the trajectory.
DecayFit MeasureDecayRate(const SigmaTrajectory& traj);

}  // namespace slq::riccati
