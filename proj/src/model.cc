#include "slq/model.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "slq/errors.h"

namespace slq {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDefiniteTol = 1e-10;

void ExpectShape(const MatrixXd& M, int rows, int cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << M.rows() << "x" << M.cols() << ", expected "
       << rows << "x" << cols;
    throw DimensionError(os.str());
  }
}

void ExpectSize(const VectorXd& v, int size, const char* name) {
  if (v.size() != size) {
    std::ostringstream os;
    os << name << " has length " << v.size() << ", expected " << size;
    throw DimensionError(os.str());
  }
}

}  // namespace

LQProblem LQProblem::Zero(int n, int m) {
  if (n <= 0 || m <= 0) throw DimensionError("n and m must be positive");
  LQProblem p;
  p.n = n;
  p.m = m;
  p.A = MatrixXd::Zero(n, n);
  p.B = MatrixXd::Zero(n, m);
  p.C = MatrixXd::Zero(n, n);
  p.D = MatrixXd::Zero(n, m);
  p.b = VectorXd::Zero(n);
  p.sigma = VectorXd::Zero(n);
  p.Q = MatrixXd::Zero(n, n);
  p.S = MatrixXd::Zero(m, n);
  p.R = MatrixXd::Zero(m, m);
  p.q = VectorXd::Zero(n);
  p.r = VectorXd::Zero(m);
  return p;
}

LQProblem ReducedLQProblem::ToProblem() const {
  LQProblem p = LQProblem::Zero(n, m);
  p.A = A;
  p.B = B;
  p.C = C;
  p.D = D;
  p.b = b;
  p.sigma = sigma;
  p.Q = Q;
  p.R = R;
  p.q = q;
  return p;
}

void CheckDimensions(const LQProblem& p) {
  if (p.n <= 0 || p.m <= 0) throw DimensionError("n and m must be positive");
  ExpectShape(p.A, p.n, p.n, "A");
  ExpectShape(p.B, p.n, p.m, "B");
  ExpectShape(p.C, p.n, p.n, "C");
  ExpectShape(p.D, p.n, p.m, "D");
  ExpectSize(p.b, p.n, "b");
  ExpectSize(p.sigma, p.n, "sigma");
  ExpectShape(p.Q, p.n, p.n, "Q");
  ExpectShape(p.S, p.m, p.n, "S");
  ExpectShape(p.R, p.m, p.m, "R");
  ExpectSize(p.q, p.n, "q");
  ExpectSize(p.r, p.m, "r");
}

ValidationReport Validate(const LQProblem& p) {
  CheckDimensions(p);
  ValidationReport report;

  const double q_asym = RelativeAsymmetry(p.Q);
  if (q_asym > kSymmetryTol) {
    report.violations.push_back({"Q not symmetric", -q_asym});
  }
  const double r_asym = RelativeAsymmetry(p.R);
  if (r_asym > kSymmetryTol) {
    report.violations.push_back({"R not symmetric", -r_asym});
  }

  const MatrixXd R = Symmetrize(p.R);
  report.r_margin = MinEigenvalue(R);
  const bool r_pd = report.r_margin > kDefiniteTol * R.norm();
  if (!r_pd) {
    report.violations.push_back({"R not positive definite", report.r_margin});
    report.q_margin = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  const MatrixXd Qhat =
      Symmetrize(p.Q) - p.S.transpose() * R.llt().solve(p.S);
  report.q_margin = MinEigenvalue(Qhat);
  if (!(report.q_margin > kDefiniteTol * Qhat.norm())) {
    report.violations.push_back(
        {"Q-S^T R^-1 S not positive definite", report.q_margin});
  }
  return report;
}

ReducedLQProblem Reduce(const LQProblem& p) {
  const ValidationReport report = Validate(p);
  if (!report.ok()) {
    throw ValidationError("cannot reduce invalid problem: " +
                          report.violations.front().what);
  }
  const MatrixXd R = Symmetrize(p.R);
  const Eigen::LLT<MatrixXd> llt(R);
  const MatrixXd RinvS = llt.solve(p.S);
  const VectorXd Rinvr = llt.solve(p.r);

  ReducedLQProblem out;
  out.n = p.n;
  out.m = p.m;
  out.A = p.A - p.B * RinvS;
  out.B = p.B;
  out.C = p.C - p.D * RinvS;
  out.D = p.D;
  out.b = p.b - p.B * Rinvr;
  out.sigma = p.sigma - p.D * Rinvr;
  out.Q = Symmetrize(Symmetrize(p.Q) - p.S.transpose() * RinvS);
  out.R = R;
  out.q = p.q - p.S.transpose() * Rinvr;
  out.phi0 = p.r.dot(Rinvr);
  return out;
}

VectorXd OriginalControl(const LQProblem& p,
                         const Eigen::Ref<const VectorXd>& v,
                         const Eigen::Ref<const VectorXd>& x) {
  return v - Symmetrize(p.R).llt().solve(p.S * x + p.r);
}

}  // namespace slq
