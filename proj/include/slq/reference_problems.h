#pragma once

#include "slq/model.h"

namespace slq {

/// n = m = 1: A=0, B=1, C=1, D=0, Q=2, R=1, q=2, everything else zero.
/// P = 2, Θ = −2, static point x* = −1/2, u* = 0; the naive problem has the
/// different solution (0, 0).
LQProblem NoisyIntegrator();

/// n = m = 1: A=B=C=D=Q=R=b=1, σ=q=0. P = 2+√5, x* = u* = −1/2; the naive
/// problem is infeasible.
LQProblem CoupledDriftDiffusion();

}  // namespace slq
