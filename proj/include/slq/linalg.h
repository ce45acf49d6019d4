#pragma once

#include <Eigen/Dense>

namespace slq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// (M + Mᵀ) / 2.
MatrixXd Symmetrize(const Eigen::Ref<const MatrixXd>& M);

/// ‖M − Mᵀ‖_F / max(‖M‖_F, tiny). Zero for the zero matrix.
double RelativeAsymmetry(const Eigen::Ref<const MatrixXd>& M);

// Extreme eigenvalues of the symmetric part of M.
double MinEigenvalue(const Eigen::Ref<const MatrixXd>& M);
double MaxEigenvalue(const Eigen::Ref<const MatrixXd>& M);

/// Largest real part over the spectrum of a general square matrix.
double SpectralAbscissa(const Eigen::Ref<const MatrixXd>& M);

MatrixXd Kron(const Eigen::Ref<const MatrixXd>& a,
              const Eigen::Ref<const MatrixXd>& b);

// Column-major vectorization. With this convention
//   vec(A M Bᵀ) = (B ⊗ A) vec(M),
// which is what the mean-square generator relies on.
VectorXd Vec(const Eigen::Ref<const MatrixXd>& M);
MatrixXd Unvec(const Eigen::Ref<const VectorXd>& v, int rows, int cols);

/// Solves S X = rhs for symmetric positive definite S via Cholesky.
/// Throws InternalError when S is not numerically positive definite.
MatrixXd SpdSolve(const Eigen::Ref<const MatrixXd>& S,
                  const Eigen::Ref<const MatrixXd>& rhs);

/// Strict positive definiteness with threshold rel_tol·‖M‖_F.
bool IsPositiveDefinite(const Eigen::Ref<const MatrixXd>& M,
                        double rel_tol = 1e-10);

/// Cubic Hermite value at the midpoint of [t, t+h] given endpoint values and
/// derivatives. Fourth-order accurate, which keeps RK4 stages consistent when
/// coefficients are only known on the grid.
template <typename T>
T HermiteMidpoint(const T& y0, const T& y1, const T& d0, const T& d1,
                  double h) {
  return T(0.5 * (y0 + y1) + (h / 8.0) * (d0 - d1));
}

}  // namespace slq
