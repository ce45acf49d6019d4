#include "slq/static_opt.h"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <vector>

#include "slq/errors.h"

namespace slq::static_opt {
namespace {

constexpr double kNaiveTol = 1e-8;

struct Blocks {
  MatrixXd H;
  MatrixXd M;
  VectorXd g;
};

Blocks Assemble(const ReducedLQProblem& p, const MatrixXd& P) {
  const int n = p.n, m = p.m;
  Blocks k;
  k.H.resize(n + m, n + m);
  k.H.topLeftCorner(n, n) = p.Q + p.C.transpose() * P * p.C;
  k.H.topRightCorner(n, m) = p.C.transpose() * P * p.D;
  k.H.bottomLeftCorner(m, n) = p.D.transpose() * P * p.C;
  k.H.bottomRightCorner(m, m) = p.R + p.D.transpose() * P * p.D;
  k.H = Symmetrize(k.H);
  k.M.resize(n, n + m);
  k.M << p.A, p.B;
  k.g.resize(n + m);
  k.g.head(n) = -(p.C.transpose() * (P * p.sigma) + p.q);
  k.g.tail(m) = -(p.D.transpose() * (P * p.sigma));
  return k;
}

void RequireFullRowRank(const MatrixXd& M) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(M.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() < M.rows()) {
    throw NumericalError("static problem infeasible/irregular under given data");
  }
}

}  // namespace

double Objective(const ReducedLQProblem& p, const MatrixXd& P,
                 const VectorXd& x, const VectorXd& u) {
  const VectorXd s = p.C * x + p.D * u + p.sigma;
  return x.dot(p.Q * x) + u.dot(p.R * u) + 2.0 * p.q.dot(x) + s.dot(P * s);
}

StaticSolution SolveStatic(const ReducedLQProblem& p, const MatrixXd& P) {
  if (P.rows() != p.n || P.cols() != p.n) {
    throw DimensionError("P does not match the problem dimension");
  }
  const Blocks k = Assemble(p, P);
  RequireFullRowRank(k.M);

  const int n = p.n, m = p.m, dim = 2 * n + m;
  MatrixXd K = MatrixXd::Zero(dim, dim);
  K.topLeftCorner(n + m, n + m) = k.H;
  K.bottomLeftCorner(n, n + m) = k.M;
  K.topRightCorner(n + m, n) = k.M.transpose();
  VectorXd rhs(dim);
  rhs << k.g, -p.b;

  std::vector<lapack_int> ipiv(dim);
  const lapack_int info =
      LAPACKE_dsysv(LAPACK_COL_MAJOR, 'L', dim, 1, K.data(), dim, ipiv.data(),
                    rhs.data(), dim);
  if (info != 0) {
    throw NumericalError("static saddle system is singular");
  }

  StaticSolution s;
  s.x_star = rhs.head(n);
  s.u_star = rhs.segment(n, m);
  s.lambda_star = rhs.tail(n);
  s.sigma_star = p.C * s.x_star + p.D * s.u_star + p.sigma;
  s.F_value = Objective(p, P, s.x_star, s.u_star);
  s.V_static = 0.5 * (s.F_value - p.phi0);
  const VectorXd Ps = P * s.sigma_star;
  const VectorXd rx = p.Q * s.x_star + p.A.transpose() * s.lambda_star +
                      p.C.transpose() * Ps + p.q;
  const VectorXd ru = p.R * s.u_star + p.B.transpose() * s.lambda_star +
                      p.D.transpose() * Ps;
  s.kkt_residual = std::max(rx.norm(), ru.norm());
  s.feasibility_residual = (p.A * s.x_star + p.B * s.u_star + p.b).norm();
  return s;
}

VectorXd SchurMultiplier(const ReducedLQProblem& p, const MatrixXd& P) {
  const Blocks k = Assemble(p, P);
  RequireFullRowRank(k.M);
  const Eigen::LLT<MatrixXd> H(k.H);
  const MatrixXd S = k.M * H.solve(k.M.transpose());
  return S.ldlt().solve(p.b + k.M * H.solve(k.g));
}

NaiveSolution SolveNaiveStatic(const LQProblem& p) {
  CheckDimensions(p);
  const int n = p.n, m = p.m;
  MatrixXd E(2 * n, n + m);
  E << p.A, p.B, p.C, p.D;
  VectorXd f(2 * n);
  f << p.b, p.sigma;

  NaiveSolution out;
  const Eigen::JacobiSVD<MatrixXd> svd(E, Eigen::ComputeFullU |
                                              Eigen::ComputeFullV);
  const VectorXd z0 = svd.solve(-f);
  out.constraint_residual = (E * z0 + f).norm();
  out.feasible = out.constraint_residual <= kNaiveTol;
  if (!out.feasible) return out;

  const VectorXd& sv = svd.singularValues();
  const double cutoff =
      (sv.size() > 0 ? sv(0) : 0.0) * 1e-12 * std::max(2 * n, n + m);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
  const MatrixXd N = svd.matrixV().rightCols(n + m - rank);

  MatrixXd H0(n + m, n + m);
  H0 << Symmetrize(p.Q), p.S.transpose(), p.S, Symmetrize(p.R);
  VectorXd g0(n + m);
  g0 << p.q, p.r;

  VectorXd z = z0;
  if (N.cols() > 0) {
    const MatrixXd reduced = Symmetrize(N.transpose() * H0 * N);
    z += N * reduced.llt().solve(-N.transpose() * (H0 * z0 + g0));
  }
  out.x = z.head(n);
  out.u = z.tail(m);
  out.F0_value = z.dot(H0 * z) + 2.0 * g0.dot(z);
  return out;
}

DivergenceReport StaticDivergenceReport(const LQProblem& p, const MatrixXd& P) {
  const ReducedLQProblem reduced = Reduce(p);
  DivergenceReport report;
  report.correct = SolveStatic(reduced, P);
  report.correct.u_star =
      OriginalControl(p, report.correct.u_star, report.correct.x_star);
  report.naive = SolveNaiveStatic(p);
  report.naive_feasible = report.naive.feasible;
  if (report.naive_feasible) {
    report.distance =
        std::max((report.correct.x_star - report.naive.x).lpNorm<Eigen::Infinity>(),
                 (report.correct.u_star - report.naive.u).lpNorm<Eigen::Infinity>());
    report.coincide = report.distance <= kNaiveTol;
  } else {
    report.distance = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace slq::static_opt
