#include "slq/linalg.h"

#include <algorithm>
#include <limits>

#include "slq/errors.h"

namespace slq {

MatrixXd Symmetrize(const Eigen::Ref<const MatrixXd>& M) {
  return 0.5 * (M + M.transpose());
}

double RelativeAsymmetry(const Eigen::Ref<const MatrixXd>& M) {
  const double norm = M.norm();
  if (norm == 0.0) return 0.0;
  return (M - M.transpose()).norm() / norm;
}

double MinEigenvalue(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(M),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double MaxEigenvalue(const Eigen::Ref<const MatrixXd>& M) {
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(M),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double SpectralAbscissa(const Eigen::Ref<const MatrixXd>& M) {
  Eigen::EigenSolver<MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation did not converge");
  }
  return es.eigenvalues().real().maxCoeff();
}

MatrixXd Kron(const Eigen::Ref<const MatrixXd>& a,
              const Eigen::Ref<const MatrixXd>& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

VectorXd Vec(const Eigen::Ref<const MatrixXd>& M) {
  VectorXd v(M.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) v(k++) = M(i, j);
  }
  return v;
}

MatrixXd Unvec(const Eigen::Ref<const VectorXd>& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw DimensionError("Unvec: size mismatch");
  }
  MatrixXd M(rows, cols);
  Eigen::Index k = 0;
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) M(i, j) = v(k++);
  }
  return M;
}

MatrixXd SpdSolve(const Eigen::Ref<const MatrixXd>& S,
                  const Eigen::Ref<const MatrixXd>& rhs) {
  Eigen::LLT<MatrixXd> llt(Symmetrize(S));
  if (llt.info() != Eigen::Success) {
    throw InternalError("matrix expected positive definite is not");
  }
  return llt.solve(rhs);
}

bool IsPositiveDefinite(const Eigen::Ref<const MatrixXd>& M, double rel_tol) {
  return MinEigenvalue(M) > rel_tol * M.norm();
}

}  // namespace slq
