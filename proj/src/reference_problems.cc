#include "slq/reference_problems.h"

namespace slq {

LQProblem NoisyIntegrator() {
  LQProblem p = LQProblem::Zero(1, 1);
  p.B(0, 0) = 1.0;
  p.C(0, 0) = 1.0;
  p.Q(0, 0) = 2.0;
  p.R(0, 0) = 1.0;
  p.q(0) = 2.0;
  return p;
}

LQProblem CoupledDriftDiffusion() {
  LQProblem p = LQProblem::Zero(1, 1);
  p.A(0, 0) = 1.0;
  p.B(0, 0) = 1.0;
  p.C(0, 0) = 1.0;
  p.D(0, 0) = 1.0;
  p.Q(0, 0) = 1.0;
  p.R(0, 0) = 1.0;
  p.b(0) = 1.0;
  return p;
}

}  // namespace slq
