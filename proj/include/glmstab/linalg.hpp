#ifndef GLMSTAB_LINALG_HPP
#define GLMSTAB_LINALG_HPP

#include <Eigen/Dense>

namespace glmstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative threshold (against the largest eigenvalue) below which an
// eigenvalue counts as zero.
inline constexpr double kRankTol = 1e-10;

// Symmetric eigendecomposition with eigenvalues sorted in descending order.
struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values(k)
};

// Decomposes the symmetric part (M + M^T)/2 of a square matrix.
SymmetricEigen symmetric_eigen(const Matrix& m);

// U f(Lambda) U^T for a function applied to each eigenvalue.
template <class F>
Matrix spectral_apply(const SymmetricEigen& eig, F f) {
  Vector mapped(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) mapped(k) = f(eig.values(k));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

// Number of eigenvalues >= rank_tol * lambda_max (0 when lambda_max <= 0).
Eigen::Index numerical_rank(const Vector& descending, double rank_tol = kRankTol);

// Largest relative asymmetry |M - M^T|_max / max(|M|_max, tiny).
double asymmetry(const Matrix& m);

// (1/rows) * sum_i x_i x_i^T, accumulated row by row in index order.
Matrix second_moment(const Matrix& rows);

}  // namespace glmstab

#endif  // GLMSTAB_LINALG_HPP
