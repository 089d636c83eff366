#include "glmstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "glmstab/error.hpp"

namespace glmstab {

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::Argument, "eigendecomposition of a non-square matrix");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Data, "symmetric eigendecomposition did not converge");

  // Eigen returns ascending order; flip to descending.
  const Eigen::Index d = sym.rows();
  SymmetricEigen out{Vector(d), Matrix(d, d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    out.values(k) = solver.eigenvalues()(d - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  return out;
}

Eigen::Index numerical_rank(const Vector& descending, double rank_tol) {
  if (descending.size() == 0) return 0;
  const double top = descending(0);
  if (!(top > 0.0)) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < descending.size(); ++k) {
    if (descending(k) >= rank_tol * top) ++rank;
  }
  return rank;
}

double asymmetry(const Matrix& m) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix second_moment(const Matrix& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  Matrix c = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      const double xa = rows(i, a);
      for (Eigen::Index b = a; b < d; ++b) c(a, b) += xa * rows(i, b);
    }
  }
  if (n > 0) c /= static_cast<double>(n);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < a; ++b) c(a, b) = c(b, a);
  return c;
}

}  // namespace glmstab
