#include "glmstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glmstab/error.hpp"
#include "glmstab/parallel.hpp"

namespace glmstab {

namespace {

double solve_eps(const SolveResult& r, double tol) { return r.converged ? tol : r.certificate_eps; }

}  // namespace

double stability_slack(const Matrix& X, double rho, double alpha, double eps_full, std::span<const double> eps_loo,
                       bool* predictions_determined) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (static_cast<Eigen::Index>(eps_loo.size()) != n) fail(ErrorCode::Argument, "one leave-one-out eps per sample");
  const CovarianceSummary full = covariance_of(X);
  const Matrix full_pinv = full.pseudo_inverse();
  const double nd = static_cast<double>(n);
  const double scale = rho * std::sqrt(2.0 / alpha);

  bool determined = true;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = X.row(i).transpose();
    const double x_norm = x.norm();
    if (x_norm == 0.0) continue;
    Matrix loo = (nd * full.C_hat - x * x.transpose()) / (nd - 1.0);
    const SymmetricEigen eig = symmetric_eigen(loo);
    const Vector values = eig.values.cwiseMax(0.0);
    const Eigen::Index rank = numerical_rank(values);
    const Vector coords = eig.vectors.transpose() * x;
    double leverage_loo = 0.0;
    for (Eigen::Index k = 0; k < rank; ++k) leverage_loo += coords(k) * coords(k) / values(k);
    const double outside = coords.tail(d - rank).norm();
    if (outside > 1e-8 * x_norm) determined = false;
    const double leverage_full = std::max(0.0, x.dot(full_pinv * x));
    total += scale * (std::sqrt(eps_full * leverage_full) + std::sqrt(eps_loo[i] * leverage_loo));
  }
  if (predictions_determined) *predictions_determined = determined;
  return total / nd;
}

double stability_bound(const CovarianceSummary& cov, double rho, double alpha, Eigen::Index n) {
  if (n < 1) fail(ErrorCode::Argument, "stability bound needs n >= 1");
  return 2.0 * rho * rho * cov.kappa_C / (alpha * static_cast<double>(n));
}

double uniform_stability_bound(const CovarianceSummary& cov, double rho, double alpha, Eigen::Index n) {
  if (n < 1) fail(ErrorCode::Argument, "uniform stability bound needs n >= 1");
  if (cov.rank == 0) return 0.0;
  const double max_norm_sq = cov.per_point_norms_sq.maxCoeff();
  return 2.0 * rho * rho * max_norm_sq / (static_cast<double>(n) * alpha * cov.lambda_min_nonzero);
}

double uniform_stability_bound(const Dataset& dataset, double rho, double alpha) {
  return uniform_stability_bound(empirical_covariance(dataset), rho, alpha, dataset.n());
}

double preconditioned_bound(double rho, double alpha, Eigen::Index effective_dim, Eigen::Index n) {
  if (n < 1) fail(ErrorCode::Argument, "preconditioned bound needs n >= 1");
  if (effective_dim < 0) fail(ErrorCode::Argument, "effective dimension must be nonnegative");
  return 2.0 * rho * rho * static_cast<double>(effective_dim) / (alpha * static_cast<double>(n));
}

StabilityReport average_stability(const Dataset& dataset, const LossFamily& family, const Domain& domain, double tol,
                                  const StabilityOptions& options) {
  if (!(tol > 0.0)) fail(ErrorCode::Argument, "stability needs a positive solver tolerance");
  const Eigen::Index n = dataset.n();
  if (n < 2) fail(ErrorCode::Argument, "average stability needs n >= 2");

  const CovarianceSummary cov = empirical_covariance(dataset);
  StabilityReport report;
  report.n = n;
  report.d = dataset.d();
  report.rank = cov.rank;
  report.kappa_C = cov.kappa_C;
  report.rho = family.rho();
  report.alpha = family.alpha();
  report.solver_tol = tol;

  const SolveResult full = erm_solve(dataset, family, domain, tol, options.max_iter, options.tuning);
  std::vector<SolveResult> loo(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t i) {
    loo[i] = loo_solve(dataset, family, domain, static_cast<Eigen::Index>(i), tol, full.w_hat, options.max_iter,
                       options.tuning);
  });

  report.w_hat = full.w_hat;
  report.converged = full.converged;
  report.max_certificate_eps = full.certificate_eps;
  report.delta_i.resize(n);
  std::vector<double> eps_loo(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const SolveResult& r = loo[static_cast<std::size_t>(i)];
    const double y = dataset.y()(i);
    const auto x = dataset.X().row(i);
    const double held_out = family.eval(y, x.dot(r.w_hat)).value;
    const double fitted = family.eval(y, x.dot(full.w_hat)).value;
    report.delta_i(i) = held_out - fitted;
    sum += report.delta_i(i);
    report.converged = report.converged && r.converged;
    report.max_certificate_eps = std::max(report.max_certificate_eps, r.certificate_eps);
    eps_loo[static_cast<std::size_t>(i)] = solve_eps(r, tol);
    report.w_loo.push_back(r.w_hat);
  }
  report.delta = sum / static_cast<double>(n);

  report.bound_avg = stability_bound(cov, family.rho(), family.alpha(), n);
  report.bound_uniform = uniform_stability_bound(cov, family.rho(), family.alpha(), n);
  report.bound_preconditioned = preconditioned_bound(family.rho(), family.alpha(), cov.rank, n);
  report.numeric_slack = stability_slack(dataset.X(), family.rho(), family.alpha(), solve_eps(full, tol), eps_loo,
                                         &report.predictions_determined);
  return report;
}

StabilityReport preconditioned_stability(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                         const Preconditioner& pre, double tol, const StabilityOptions& options) {
  const PreconditionedProblem problem = precondition(dataset, domain, pre);
  return average_stability(problem.dataset, family, problem.domain, tol, options);
}

InvarianceReport compare_stability(const StabilityReport& original, const StabilityReport& preconditioned,
                                   std::string label) {
  InvarianceReport r;
  r.label = std::move(label);
  r.delta_original = original.delta;
  r.delta_preconditioned = preconditioned.delta;
  r.abs_diff = std::abs(preconditioned.delta - original.delta);
  r.tolerance_used = original.numeric_slack + preconditioned.numeric_slack + 1e-9;
  r.pass = r.abs_diff <= r.tolerance_used;
  r.kappa_before = original.kappa_C;
  r.kappa_after = preconditioned.kappa_C;
  if (original.delta_i.size() == preconditioned.delta_i.size() && original.delta_i.size() > 0)
    r.max_abs_diff_i = (original.delta_i - preconditioned.delta_i).cwiseAbs().maxCoeff();
  r.per_index_checked = original.predictions_determined && preconditioned.predictions_determined;
  r.per_index_pass = !r.per_index_checked || r.max_abs_diff_i <= 10.0 * r.tolerance_used;
  r.preconditioned = preconditioned;
  return r;
}

std::vector<InvarianceReport> invariance_check(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                               std::span<const LabeledPreconditioner> preconditioners, double tol,
                                               const StabilityOptions& options, StabilityReport* original_out) {
  if (!domain.preconditionable())
    fail(ErrorCode::UnsupportedDomainTransform,
         std::string("invariance checks need a euclidean_ball or quad_ball domain, got ") + to_string(domain.kind()));
  const StabilityReport original = average_stability(dataset, family, domain, tol, options);
  std::vector<InvarianceReport> out;
  out.reserve(preconditioners.size());
  for (const auto& entry : preconditioners) {
    const StabilityReport pre = preconditioned_stability(dataset, family, domain, entry.pre, tol, options);
    out.push_back(compare_stability(original, pre, entry.label));
  }
  if (original_out) *original_out = original;
  return out;
}

std::vector<InvarianceReport> invariance_check(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                               std::span<const Matrix> P_list, double tol,
                                               const StabilityOptions& options) {
  std::vector<LabeledPreconditioner> labeled;
  labeled.reserve(P_list.size());
  for (std::size_t k = 0; k < P_list.size(); ++k)
    labeled.push_back({"P[" + std::to_string(k) + "]", inverse_sqrt(P_list[k])});
  return invariance_check(dataset, family, domain, labeled, tol, options);
}

}  // namespace glmstab
