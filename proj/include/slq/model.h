#pragma once

#include <string>
#include <vector>

#include "slq/linalg.h"

namespace slq {

/// Coefficients of the controlled SDE
///   dX = (A X + B u + b) dt + (C X + D u + sigma) dW
/// and the running cost
///   ½ E ∫ [⟨QX,X⟩ + 2⟨SX,u⟩ + ⟨Ru,u⟩ + 2⟨q,X⟩ + 2⟨r,u⟩] dt.
struct LQProblem {
  int n = 0;
  int m = 0;
  MatrixXd A, B, C, D;
  VectorXd b, sigma;
  MatrixXd Q, S, R;
  VectorXd q, r;

  /// All blocks zero with the shapes implied by (n, m).
  static LQProblem Zero(int n, int m);
};

/// The problem after eliminating the cross term and the linear control cost
/// by u = v − R⁻¹(S X + r). The state equation keeps B and D; the cost is
///   ½ E ∫ [⟨Q̂X,X⟩ + ⟨Rv,v⟩ + 2⟨q̂,X⟩] dt − φ₀ T/2.
struct ReducedLQProblem {
  int n = 0;
  int m = 0;
  MatrixXd A, B, C, D;
  VectorXd b, sigma;
  MatrixXd Q, R;
  VectorXd q;
  double phi0 = 0.0;

  /// The reduced coefficients as a full problem with S = 0 and r = 0.
  LQProblem ToProblem() const;
};

struct Violation {
  std::string what;
  double margin;  // signed quantity that should have been positive
};

struct ValidationReport {
  std::vector<Violation> violations;
  double r_margin = 0.0;  // λ_min(R)
  double q_margin = 0.0;  // λ_min(Q − SᵀR⁻¹S); NaN when R is singular

  bool ok() const { return violations.empty(); }
};

/// Throws DimensionError when any block disagrees with (n, m).
void CheckDimensions(const LQProblem& problem);

/// Symmetry (relative tolerance 1e−12) and the strong standard condition
/// R ≻ 0, Q − SᵀR⁻¹S ≻ 0 (threshold 1e−10·‖M‖). Dimension problems throw
/// instead of being reported.
ValidationReport Validate(const LQProblem& problem);

/// Throws ValidationError if the problem is not valid.
ReducedLQProblem Reduce(const LQProblem& problem);

/// Original control from the reduced one: u = v − R⁻¹(S x + r).
VectorXd OriginalControl(const LQProblem& problem,
                         const Eigen::Ref<const VectorXd>& v,
                         const Eigen::Ref<const VectorXd>& x);

}  // namespace slq
