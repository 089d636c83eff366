#include "glmstab/covariance.hpp"

#include <cmath>
#include <sstream>

#include "glmstab/error.hpp"

namespace glmstab {

Matrix CovarianceSummary::span_basis() const { return eigenvectors.leftCols(rank); }

Matrix CovarianceSummary::pseudo_inverse() const {
  const Eigen::Index d = C_hat.rows();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < rank; ++k)
    out.noalias() += (1.0 / eigenvalues(k)) * eigenvectors.col(k) * eigenvectors.col(k).transpose();
  return out;
}

CovarianceSummary covariance_of(const Matrix& rows) {
  if (!rows.allFinite()) fail(ErrorCode::Data, "instance matrix contains non-finite entries");
  CovarianceSummary cov;
  cov.C_hat = second_moment(rows);
  cov.trace = cov.C_hat.trace();
  SymmetricEigen eig = symmetric_eigen(cov.C_hat);
  cov.eigenvalues = eig.values.cwiseMax(0.0);
  cov.eigenvectors = std::move(eig.vectors);
  cov.rank = numerical_rank(cov.eigenvalues);
  cov.lambda_max = cov.eigenvalues.size() > 0 ? cov.eigenvalues(0) : 0.0;
  if (cov.rank > 0) {
    cov.lambda_min_nonzero = cov.eigenvalues(cov.rank - 1);
    cov.kappa_C = cov.trace / cov.lambda_min_nonzero;
  }
  cov.per_point_norms_sq = rows.rowwise().squaredNorm();
  return cov;
}

CovarianceSummary empirical_covariance(const Dataset& dataset) { return covariance_of(dataset.X()); }

bool Preconditioner::is_identity() const {
  return P.rows() == P.cols() && P.isIdentity(0.0) && P_inv_sqrt.isIdentity(0.0) && P_sqrt.isIdentity(0.0);
}

Preconditioner inverse_sqrt(const Matrix& P, double rank_tol) {
  if (P.rows() != P.cols() || P.rows() == 0) fail(ErrorCode::Argument, "preconditioner must be a non-empty square matrix");
  if (!P.allFinite()) fail(ErrorCode::Argument, "preconditioner has non-finite entries");
  if (asymmetry(P) > 1e-10) fail(ErrorCode::Argument, "preconditioner is not symmetric to 1e-10 relative");

  Preconditioner out;
  out.P = 0.5 * (P + P.transpose());
  if (out.P.isIdentity(0.0)) {
    out.P_inv_sqrt = out.P;
    out.P_sqrt = out.P;
    return out;
  }
  const SymmetricEigen eig = symmetric_eigen(out.P);
  const double top = eig.values(0);
  const double bottom = eig.values(eig.values.size() - 1);
  if (!(top > 0.0) || bottom < rank_tol * top) {
    std::ostringstream os;
    os.precision(17);
    os << "smallest eigenvalue " << bottom << " is below " << rank_tol << " * lambda_max (" << top
       << "); complete the matrix with optimal_preconditioner(delta > 0) first";
    fail(ErrorCode::NotPositiveDefinite, os.str());
  }
  out.P_inv_sqrt = spectral_apply(eig, [](double v) { return 1.0 / std::sqrt(v); });
  out.P_sqrt = spectral_apply(eig, [](double v) { return std::sqrt(v); });
  return out;
}

Preconditioner optimal_preconditioner(const CovarianceSummary& cov, double delta) {
  const Eigen::Index d = cov.C_hat.rows();
  if (cov.rank == d) {
    Preconditioner pre = inverse_sqrt(cov.C_hat);
    pre.delta = 0.0;
    return pre;
  }
  if (!(delta > 0.0) || !std::isfinite(delta))
    fail(ErrorCode::Argument, "rank-deficient covariance needs a completion parameter delta > 0");

  SymmetricEigen completed{cov.eigenvalues, cov.eigenvectors};
  for (Eigen::Index k = cov.rank; k < d; ++k) completed.values(k) = delta;
  Preconditioner pre;
  pre.P = spectral_apply(completed, [](double v) { return v; });
  pre.P_inv_sqrt = spectral_apply(completed, [](double v) { return 1.0 / std::sqrt(v); });
  pre.P_sqrt = spectral_apply(completed, [](double v) { return std::sqrt(v); });
  pre.delta = delta;
  return pre;
}

Domain transform_domain(const Domain& domain, const Preconditioner& pre) {
  if (pre.is_identity()) return domain;
  const Eigen::Index d = pre.P.rows();
  switch (domain.kind()) {
    case DomainKind::EuclideanBall: {
      // {P^{1/2} w : |w| <= r} = {v : v^T P^{-1} v <= r^2}
      Matrix P_inv = pre.P_inv_sqrt * pre.P_inv_sqrt;
      P_inv = 0.5 * (P_inv + P_inv.transpose()).eval();
      return Domain::quad_ball(std::move(P_inv), domain.radius());
    }
    case DomainKind::QuadBall: {
      const auto& q = std::get<QuadBall>(domain.shape());
      if (q.A.rows() != d) fail(ErrorCode::Argument, "preconditioner and quadratic-form ball differ in dimension");
      Matrix A = pre.P_inv_sqrt * q.A * pre.P_inv_sqrt;
      A = 0.5 * (A + A.transpose()).eval();
      return Domain::quad_ball(std::move(A), q.radius);
    }
    case DomainKind::L1Ball:
    case DomainKind::Box:
      break;
  }
  fail(ErrorCode::UnsupportedDomainTransform,
       std::string("the image of a ") + to_string(domain.kind()) +
           " under a non-identity P^{1/2} is not representable; use a euclidean_ball or quad_ball domain");
}

PreconditionedProblem precondition(const Dataset& dataset, const Domain& domain, const Preconditioner& pre) {
  if (pre.P.rows() != dataset.d()) {
    std::ostringstream os;
    os << "preconditioner dimension " << pre.P.rows() << " does not match data dimension " << dataset.d();
    fail(ErrorCode::Argument, os.str());
  }
  if (pre.is_identity()) return {dataset, domain};
  Domain mapped = transform_domain(domain, pre);
  Matrix X = dataset.X() * pre.P_inv_sqrt;
  return {Dataset(std::move(X), dataset.y(), dataset.cap_Y()), std::move(mapped)};
}

}  // namespace glmstab
