#include "slq/riccati.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "slq/errors.h"
#include "slq/rk4.h"
#include "slq/stability.h"

namespace slq::riccati {
namespace {

int StepCount(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("horizon and step must be positive");
  }
  return std::max(1, static_cast<int>(std::lround(T / h)));
}

std::vector<double> UniformGrid(int steps, double T) {
  std::vector<double> grid(steps + 1);
  for (int i = 0; i <= steps; ++i) grid[i] = T * i / steps;
  grid.back() = T;
  return grid;
}

MatrixXd SigmaStep(const ReducedLQProblem& p, const MatrixXd& sigma,
                   double h) {
  auto rhs = [&](Stage, const MatrixXd& s) { return RiccatiRhs(p, s); };
  return Symmetrize(Rk4Step(sigma, h, rhs));
}

bool Blown(const MatrixXd& M, double cap) {
  const double norm = M.norm();
  return !std::isfinite(norm) || norm > cap;
}

void CheckGrid(const ReducedLQProblem& p, const RiccatiSchedule& s) {
  if (s.size() < 2 || s.P.size() != s.size() || s.Pdot.size() != s.size()) {
    throw std::invalid_argument("Riccati schedule is malformed");
  }
  if (s.P.front().rows() != p.n) {
    throw DimensionError("Riccati schedule does not match problem dimension");
  }
}

// Integrates φ̇ = −(A + BΘ_T)ᵀφ − c(t) backward from φ(T) = terminal, where
// c is produced by forcing(P_T, Θ_T).
template <typename Forcing>
PhiTrajectory IntegrateBackward(const ReducedLQProblem& p,
                                const RiccatiSchedule& s,
                                const VectorXd& terminal, Forcing forcing) {
  CheckGrid(p, s);
  const std::size_t N = s.size() - 1;
  const double h = s.step;

  auto rate = [&](const MatrixXd& PT, const VectorXd& phi) -> VectorXd {
    const MatrixXd theta = GainK(p, PT);
    const MatrixXd Acl = p.A + p.B * theta;
    return -(Acl.transpose() * phi + forcing(PT, theta));
  };

  PhiTrajectory out;
  out.grid = s.grid;
  out.step = h;
  out.terminal = terminal;
  out.values.assign(N + 1, VectorXd());
  out.derivs.assign(N + 1, VectorXd());
  out.values[N] = terminal;
  out.derivs[N] = rate(s.P[N], terminal);

  for (std::size_t k = N; k-- > 0;) {
    // Reversed time: dφ/ds = −dφ/dt, stepping from node k+1 to node k.
    const MatrixXd mid = s.Midpoint(k);
    auto rhs = [&](Stage stage, const VectorXd& phi) -> VectorXd {
      const MatrixXd& PT = stage == Stage::kStart ? s.P[k + 1]
                           : stage == Stage::kEnd ? s.P[k]
                                                  : mid;
      return -rate(PT, phi);
    };
    out.values[k] = Rk4Step(out.values[k + 1], h, rhs);
    out.derivs[k] = rate(s.P[k], out.values[k]);
  }
  return out;
}

}  // namespace

MatrixXd GainQ(const ReducedLQProblem& p, const MatrixXd& P) {
  return P * p.A + p.A.transpose() * P + p.C.transpose() * P * p.C + p.Q;
}

MatrixXd GainS(const ReducedLQProblem& p, const MatrixXd& P) {
  return p.B.transpose() * P + p.D.transpose() * P * p.C;
}

MatrixXd GainR(const ReducedLQProblem& p, const MatrixXd& P) {
  return Symmetrize(p.R + p.D.transpose() * P * p.D);
}

MatrixXd GainK(const ReducedLQProblem& p, const MatrixXd& P) {
  return -SpdSolve(GainR(p, P), GainS(p, P));
}

MatrixXd RiccatiRhs(const ReducedLQProblem& p, const MatrixXd& P) {
  const MatrixXd S = GainS(p, P);
  return Symmetrize(GainQ(p, P) - S.transpose() * SpdSolve(GainR(p, P), S));
}

MatrixXd ClosedLoopLyapunov(const ReducedLQProblem& p, const MatrixXd& P,
                            const MatrixXd& K) {
  const MatrixXd Acl = p.A + p.B * K;
  const MatrixXd Ccl = p.C + p.D * K;
  return P * Acl + Acl.transpose() * P + Ccl.transpose() * P * Ccl + p.Q +
         K.transpose() * p.R * K;
}

double DefaultStep(const ReducedLQProblem& p) {
  const double a = p.A.norm();
  return 1e-3 * (a > 1.0 ? 1.0 / a : 1.0);
}

double DivergenceCap(const ReducedLQProblem& p) {
  return 1e8 * (1.0 + p.Q.norm());
}

double AreTolerance(const ReducedLQProblem& p) {
  return 1e-10 * (1.0 + p.Q.norm());
}

SigmaTrajectory SigmaFlow(const ReducedLQProblem& p, double T, double h) {
  const int N = StepCount(T, h);
  SigmaTrajectory out;
  out.grid = UniformGrid(N, T);
  out.step = T / N;
  out.values.reserve(N + 1);
  out.values.push_back(MatrixXd::Zero(p.n, p.n));
  const double cap = DivergenceCap(p);
  for (int i = 0; i < N; ++i) {
    MatrixXd next = SigmaStep(p, out.values.back(), out.step);
    if (Blown(next, cap)) {
      std::ostringstream os;
      os << "Riccati flow diverged at t = " << out.grid[i + 1]
         << " (not stabilizable, or horizon/step pathological)";
      throw DivergenceError(os.str(), out.grid[i + 1]);
    }
    out.values.push_back(std::move(next));
  }
  return out;
}

SettledFlow SettleSigmaFlow(const ReducedLQProblem& p, double h, double tol,
                            double max_time) {
  const int per_unit = StepCount(1.0, h);
  const double dt = 1.0 / per_unit;
  const double cap = DivergenceCap(p);

  SettledFlow out;
  out.sigma = MatrixXd::Zero(p.n, p.n);
  while (out.time < max_time) {
    MatrixXd sigma = out.sigma;
    for (int i = 0; i < per_unit; ++i) {
      sigma = SigmaStep(p, sigma, dt);
      if (Blown(sigma, cap)) {
        out.outcome = FlowOutcome::kDiverged;
        out.time += (i + 1) * dt;
        out.sigma = sigma;
        return out;
      }
    }
    out.time += 1.0;
    const double change = (sigma - out.sigma).norm();
    out.sigma = std::move(sigma);
    if (change <= tol * (1.0 + out.sigma.norm())) {
      out.outcome = FlowOutcome::kSettled;
      return out;
    }
  }
  out.outcome = FlowOutcome::kBudgetExhausted;
  return out;
}

AreSolution SolveAre(const ReducedLQProblem& p, const AreOptions& options) {
  const double h = options.h > 0.0 ? options.h : DefaultStep(p);
  const SettledFlow flow =
      SettleSigmaFlow(p, h, options.flow_tol, options.max_time);
  if (flow.outcome == FlowOutcome::kDiverged) {
    std::ostringstream os;
    os << "Riccati flow diverged at t = " << flow.time
       << " (system not stabilizable)";
    throw DivergenceError(os.str(), flow.time);
  }
  if (flow.outcome == FlowOutcome::kBudgetExhausted) {
    throw NumericalError("Riccati flow did not settle within the time budget");
  }

  const double tol = AreTolerance(p);
  AreSolution sol;
  sol.flow_time = flow.time;
  sol.P = flow.sigma;
  sol.residual = RiccatiRhs(p, sol.P).norm();
  MatrixXd best = sol.P;
  double best_residual = sol.residual;
  int stalled = 0;

  while (sol.residual > tol && sol.iterations < options.max_newton) {
    const MatrixXd K = GainK(p, sol.P);
    const MatrixXd Acl = p.A + p.B * K;
    const MatrixXd Ccl = p.C + p.D * K;
    const MatrixXd Gt = stability::MsGenerator(Acl, Ccl).transpose();
    const VectorXd rhs = -Vec(p.Q + K.transpose() * p.R * K);
    const Eigen::PartialPivLU<MatrixXd> lu(Gt);
    const MatrixXd next = Symmetrize(Unvec(lu.solve(rhs), p.n, p.n));
    ++sol.iterations;
    if (!next.allFinite()) break;
    sol.P = next;
    sol.residual = RiccatiRhs(p, sol.P).norm();
    if (sol.residual < best_residual) {
      stalled = (sol.residual > 0.5 * best_residual) ? stalled + 1 : 0;
      best = sol.P;
      best_residual = sol.residual;
    } else {
      ++stalled;
    }
    if (stalled >= 3) break;
  }
  sol.P = best;
  sol.residual = best_residual;
  sol.refined = sol.residual <= tol;
  sol.theta = GainK(p, sol.P);

  const stability::StabilityReport cl = stability::IsMsStable(
      p.A + p.B * sol.theta, p.C + p.D * sol.theta);
  sol.closed_loop_abscissa = cl.generator_abscissa;
  if (!cl.stable) {
    throw NumericalError("ARE solution does not stabilize the closed loop");
  }
  return sol;
}

MatrixXd RiccatiSchedule::Midpoint(std::size_t i) const {
  return Symmetrize(HermiteMidpoint(P[i], P[i + 1], Pdot[i], Pdot[i + 1], step));
}

RiccatiSchedule ScheduleFromSigma(const ReducedLQProblem& p,
                                  const SigmaTrajectory& sigma) {
  const std::size_t N = sigma.values.size() - 1;
  RiccatiSchedule s;
  s.grid = sigma.grid;
  s.step = sigma.step;
  s.horizon = sigma.grid.back();
  s.P.resize(N + 1);
  s.Pdot.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    s.P[i] = sigma.values[N - i];
    s.Pdot[i] = -RiccatiRhs(p, s.P[i]);
  }
  return s;
}

RiccatiSchedule FiniteHorizonRiccati(const ReducedLQProblem& p, double T,
                                     double h) {
  return ScheduleFromSigma(p, SigmaFlow(p, T, h));
}

RiccatiSchedule ConstantSchedule(const MatrixXd& P, double T, double h) {
  const int N = StepCount(T, h);
  RiccatiSchedule s;
  s.grid = UniformGrid(N, T);
  s.step = T / N;
  s.horizon = T;
  s.P.assign(N + 1, P);
  s.Pdot.assign(N + 1, MatrixXd::Zero(P.rows(), P.cols()));
  return s;
}

std::vector<MatrixXd> GainSchedule(const ReducedLQProblem& p,
                                   const RiccatiSchedule& schedule) {
  std::vector<MatrixXd> out;
  out.reserve(schedule.size());
  for (const MatrixXd& P : schedule.P) out.push_back(GainK(p, P));
  return out;
}

VectorXd PhiTrajectory::Midpoint(std::size_t i) const {
  return HermiteMidpoint(values[i], values[i + 1], derivs[i], derivs[i + 1],
                         step);
}

PhiTrajectory PhiValueOde(const ReducedLQProblem& p,
                          const RiccatiSchedule& schedule) {
  return IntegrateBackward(
      p, schedule, VectorXd::Zero(p.n),
      [&](const MatrixXd& PT, const MatrixXd& theta) -> VectorXd {
        const MatrixXd Ccl = p.C + p.D * theta;
        return Ccl.transpose() * (PT * p.sigma) + PT * p.b + p.q;
      });
}

PhiTrajectory PhiTurnpikeOde(const ReducedLQProblem& p,
                             const RiccatiSchedule& schedule,
                             const MatrixXd& P, const VectorXd& lambda_star,
                             const VectorXd& sigma_star) {
  if (P.rows() != p.n || lambda_star.size() != p.n ||
      sigma_star.size() != p.n) {
    throw DimensionError("turnpike data does not match problem dimension");
  }
  return IntegrateBackward(
      p, schedule, VectorXd(-lambda_star),
      [&](const MatrixXd& PT, const MatrixXd& theta) -> VectorXd {
        const MatrixXd Ccl = p.C + p.D * theta;
        return Ccl.transpose() * ((PT - P) * sigma_star);
      });
}

DecayFit MeasureDecayRate(const SigmaTrajectory& traj, const MatrixXd& P) {
  const double e0 = (P - traj.values.front()).norm();
  if (!(e0 > 0.0)) {
    throw NumericalError("decay fit: zero initial distance to the limit");
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  DecayFit fit;
  bool first = true;
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    const double e = (P - traj.values[i]).norm() / e0;
    if (!(e >= 1e-9 && e <= 1e-2)) continue;
    const double t = traj.grid[i];
    const double y = std::log(e * e0);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++fit.points;
    if (first) fit.t_begin = t;
    first = false;
    fit.t_end = t;
  }
  if (fit.points < 3) {
    throw NumericalError(
        "decay fit window is empty; lengthen the horizon or refine the grid");
  }
  const double k = fit.points;
  const double denom = k * stt - st * st;
  if (!(denom > 0.0)) {
    throw NumericalError("decay fit window is degenerate; refine the grid");
  }
  const double slope = (k * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / k;
  fit.rate = -slope;
  fit.K = std::exp(intercept);
  return fit;
}

DecayFit MeasureDecayRate(const SigmaTrajectory& traj) {
  return MeasureDecayRate(traj, traj.values.back());
}

}  // namespace slq::riccati
