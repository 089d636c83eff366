#ifndef GLMSTAB_COVARIANCE_HPP
#define GLMSTAB_COVARIANCE_HPP

#include "glmstab/dataset.hpp"
#include "glmstab/domain.hpp"
#include "glmstab/linalg.hpp"

namespace glmstab {

// Spectral summary of the empirical covariance (1/n) sum_i x_i x_i^T.
struct CovarianceSummary {
  Matrix C_hat;
  double trace = 0.0;
  Vector eigenvalues;  // descending, clamped at 0 from below
  Matrix eigenvectors;
  Eigen::Index rank = 0;
  double lambda_max = 0.0;
  double lambda_min_nonzero = 0.0;  // 0 when rank == 0
  double kappa_C = 0.0;             // trace / lambda_min_nonzero, 0 when rank == 0
  Vector per_point_norms_sq;

  // Orthonormal basis of the column space (first `rank` eigenvectors).
  Matrix span_basis() const;
  // Moore-Penrose pseudo-inverse at the same rank threshold.
  Matrix pseudo_inverse() const;
};

CovarianceSummary empirical_covariance(const Dataset& dataset);
// Same summary for an arbitrary (possibly single-row) sample matrix.
CovarianceSummary covariance_of(const Matrix& rows);

// Symmetric positive definite P with cached P^{-1/2} and P^{1/2}.
struct Preconditioner {
  Matrix P;
  Matrix P_inv_sqrt;
  Matrix P_sqrt;
  double delta = 0.0;  // completion parameter, 0 when unused

  bool is_identity() const;
};

// Throws NotPositiveDefinite when an eigenvalue is below rank_tol * lambda_max
// and Argument when P is not symmetric to 1e-10 relative.
Preconditioner inverse_sqrt(const Matrix& P, double rank_tol = kRankTol);

// Full rank: P = C_hat. Rank deficient: zero eigenvalues replaced by delta,
// i.e. P = C_hat + delta (I - C_hat C_hat^+), which needs delta > 0.
Preconditioner optimal_preconditioner(const CovarianceSummary& cov, double delta);

struct PreconditionedProblem {
  Dataset dataset;
  Domain domain;
};

// Maps every x_j to P^{-1/2} x_j and W to P^{1/2} W. Only quadratic-form balls
// are closed under this map; L1Ball/Box are accepted only with P = I.
PreconditionedProblem precondition(const Dataset& dataset, const Domain& domain,
                                   const Preconditioner& pre);
// The domain half of the map on its own.
Domain transform_domain(const Domain& domain, const Preconditioner& pre);

}  // namespace glmstab

#endif  // GLMSTAB_COVARIANCE_HPP
