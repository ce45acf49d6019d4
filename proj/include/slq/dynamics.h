#pragma once

#include <cstdint>
#include <vector>

#include "slq/linalg.h"
#include "slq/model.h"
#include "slq/riccati.h"
#include "slq/static_opt.h"

namespace slq::dynamics {

/// Expected optimal trajectories. Hatted quantities are deviations from the
/// static point: X̂ = X̄ − x*, û = ū − u*, Ŷ = Ȳ − λ*.
struct MeanTrajectory {
  std::vector<double> grid;
  std::vector<VectorXd> EX, Eu, EY, EZ;
  std::vector<VectorXd> EXhat, Euhat, EYhat;
};

/// d E[X̂] = (A + BΘ_T) E[X̂] + B v̂_T, E[X̂](0) = x0 − x*, with
/// v̂_T = −𝒭(P_T)⁻¹[Bᵀφ_T + Dᵀ(P_T − P)σ*], E[û] = Θ_T E[X̂] + v̂_T,
/// E[Ŷ] = P_T E[X̂] + φ_T and E[Z̄] = P_T(C E[X̂] + D E[û] + σ*).
MeanTrajectory MeanFlow(const ReducedLQProblem& p,
                        const riccati::RiccatiSchedule& schedule,
                        const riccati::PhiTrajectory& phi_turnpike,
                        const MatrixXd& P,
                        const static_opt::StaticSolution& st,
                        const VectorXd& x0);

/// sup_t ‖BᵀE[Ȳ] + DᵀE[Z̄] + R E[ū]‖.
double StationarityResidual(const ReducedLQProblem& p,
                            const MeanTrajectory& mean);

/// sup over interior nodes of ‖d/dt E[Ȳ] + AᵀE[Ȳ] + CᵀE[Z̄] + Q E[X̄] + q‖,
/// with the derivative taken by fourth-order central differences.
double AdjointOdeResidual(const ReducedLQProblem& p,
                          const MeanTrajectory& mean);

/// Control law v = Θ(t) X + κ(t) tabulated at grid nodes and midpoints.
struct AffineFeedback {
  std::vector<double> grid;
  double step = 0.0;
  std::vector<MatrixXd> theta, theta_mid;
  std::vector<VectorXd> kappa, kappa_mid;

  std::size_t size() const { return grid.size(); }
};

/// κ = −𝒭(P_T)⁻¹(Bᵀφ + DᵀP_Tσ) from the value-function φ.
AffineFeedback ValueFeedback(const ReducedLQProblem& p,
                             const riccati::RiccatiSchedule& schedule,
                             const riccati::PhiTrajectory& phi_value);

/// κ = −Θ_T x* + v̂_T + u*, the same law written around the static point.
AffineFeedback TurnpikeFeedback(const ReducedLQProblem& p,
                                const riccati::RiccatiSchedule& schedule,
                                const riccati::PhiTrajectory& phi_turnpike,
                                const MatrixXd& P,
                                const static_opt::StaticSolution& st);

/// First and second moments of the closed loop
///   dX = (𝒜X + β) dt + (𝒞X + γ) dW,  𝒜 = A + BΘ, 𝒞 = C + DΘ,
///   β = Bκ + b, γ = Dκ + σ,
/// augmented with I = ∫X dt and J = ∫v dt, together with the expected cost
/// ½∫(⟨QX,X⟩ + ⟨Rv,v⟩ + 2⟨q,X⟩) dt − φ₀T/2.
struct MomentTrajectory {
  std::vector<double> grid;
  std::vector<VectorXd> mean;    // E[X]
  std::vector<MatrixXd> second;  // E[XXᵀ]
  std::vector<double> cost;      // running expected cost
  // Moments of (X, I, J) at T.
  VectorXd aug_mean;
  MatrixXd aug_second;
  double min_covariance_eig = 0.0;
};

/// Throws NumericalError if E[XXᵀ] − E[X]E[X]ᵀ loses positive
/// semidefiniteness by more than 1e−8·(1 + ‖E[XXᵀ]‖).
MomentTrajectory MomentFlow(const ReducedLQProblem& p,
                            const AffineFeedback& feedback,
                            const VectorXd& x0);

/// V_T(x0) = ½⟨P_T(0)x0,x0⟩ + ⟨φ(0),x0⟩
///         + ½∫(⟨P_Tσ,σ⟩ + 2⟨φ,b⟩ − |𝒭(P_T)^{−1/2}(Bᵀφ + DᵀP_Tσ)|²) dt
///         − φ₀T/2
/// by the trapezoid rule on the schedule grid.
double ValueFunction(const ReducedLQProblem& p,
                     const riccati::RiccatiSchedule& schedule,
                     const riccati::PhiTrajectory& phi_value,
                     const VectorXd& x0);

struct McOptions {
  long paths = 10000;
  double h = 0.0;          // 0 means the feedback grid step
  std::uint64_t seed = 42;
  int threads = 0;         // 0 consults TURNPIKE_THREADS, then hardware
  long record_stride = 0;  // in MC steps; 0 picks at most ~1000 records
};

struct McEnsemble {
  long paths = 0;
  long flagged = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<VectorXd> mean_X, se_X;
  std::vector<VectorXd> mean_u, se_u;
  double mean_cost = 0.0;
  double se_cost = 0.0;
};

/// Euler–Maruyama paths of dX = (AX + Bv + b)dt + (CX + Dv + σ)dW under
/// v = Θ X + κ, with the pathwise trapezoid cost
/// ½∫(⟨QX,X⟩ + ⟨Rv,v⟩ + 2⟨q,X⟩) dt − φ₀T/2. Path k draws its normals from
/// a counter-based stream keyed by (seed, k); partial sums over chunks of
/// 1024 paths are combined in chunk order, so results do not depend on the
/// thread count. Throws NumericalError when more than 0.1% of paths leave
/// the finite range.
McEnsemble SimulateMc(const ReducedLQProblem& p, const AffineFeedback& feedback,
                      const VectorXd& x0, const McOptions& options);

/// Thread count for Monte Carlo from TURNPIKE_THREADS (0 or unset = auto).
int ThreadsFromEnvironment();

/// Everything the turnpike checks need for one horizon.
struct HorizonSolution {
  double T = 0.0;
  riccati::RiccatiSchedule schedule;
  riccati::PhiTrajectory phi_value;
  riccati::PhiTrajectory phi_turnpike;
  MeanTrajectory mean;
  double value = 0.0;
};

HorizonSolution SolveHorizon(const ReducedLQProblem& p,
                             const riccati::AreSolution& are,
                             const static_opt::StaticSolution& st, double T,
                             double h, const VectorXd& x0);

}  // namespace slq::dynamics
