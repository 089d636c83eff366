#ifndef GLMSTAB_STABILITY_HPP
#define GLMSTAB_STABILITY_HPP

#include <span>
#include <string>
#include <vector>

#include "glmstab/covariance.hpp"
#include "glmstab/solver.hpp"

namespace glmstab {

struct StabilityOptions {
  std::size_t max_iter = kDefaultMaxIter;
  SolverTuning tuning;
  unsigned threads = 1;
};

struct StabilityReport {
  double delta = 0.0;               // average stability Delta(S, W)
  Vector delta_i;                   // per-sample loss increase of the leave-one-out minimizer
  double bound_avg = 0.0;           // 2 rho^2 kappa(C_hat) / (alpha n)
  double bound_uniform = 0.0;       // max_i 2 rho^2 |x_i|^2 / (n alpha lambda_min)
  double bound_preconditioned = 0.0;  // 2 rho^2 rank / (alpha n)
  double solver_tol = 0.0;
  double numeric_slack = 0.0;

  bool converged = true;          // every solve met solver_tol
  bool predictions_determined = true;  // every x_i lies in the span of the other samples
  double max_certificate_eps = 0.0;
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  Eigen::Index rank = 0;
  double kappa_C = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  Vector w_hat;
  std::vector<Vector> w_loo;
};

// Error budget for Delta when each solve is only eps-optimal. For a solve on
// covariance C that is eps-suboptimal, strong convexity alpha C gives
//     |x^T (w - w*)| <= sqrt(x^T C^+ x) sqrt(2 eps / alpha),
// so the loss at x is off by at most rho times that. Summing the full-sample
// and leave-one-out terms and averaging over i yields the slack. eps is the
// solver tolerance for converged solves and the achieved certificate otherwise.
double stability_slack(const Matrix& X, double rho, double alpha, double eps_full, std::span<const double> eps_loo,
                       bool* predictions_determined = nullptr);

StabilityReport average_stability(const Dataset& dataset, const LossFamily& family, const Domain& domain, double tol,
                                  const StabilityOptions& options = {});

// 2 rho^2 kappa(C_hat) / (alpha n)
double stability_bound(const CovarianceSummary& cov, double rho, double alpha, Eigen::Index n);
// max_i 2 rho^2 |x_i|^2 / (n alpha lambda_min_nonzero(C_hat))
double uniform_stability_bound(const Dataset& dataset, double rho, double alpha);
double uniform_stability_bound(const CovarianceSummary& cov, double rho, double alpha, Eigen::Index n);
// 2 rho^2 effective_dim / (alpha n)
double preconditioned_bound(double rho, double alpha, Eigen::Index effective_dim, Eigen::Index n);

StabilityReport preconditioned_stability(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                         const Preconditioner& pre, double tol, const StabilityOptions& options = {});

struct InvarianceReport {
  std::string label;
  double delta_original = 0.0;
  double delta_preconditioned = 0.0;
  double abs_diff = 0.0;
  double tolerance_used = 0.0;
  bool pass = false;
  double kappa_before = 0.0;
  double kappa_after = 0.0;
  double max_abs_diff_i = 0.0;
  bool per_index_checked = false;  // held-out predictions determined in both coordinate systems
  bool per_index_pass = true;      // max_abs_diff_i <= 10 * tolerance_used (when checked)
  StabilityReport preconditioned;
};

struct LabeledPreconditioner {
  std::string label;
  Preconditioner pre;
};

// One report per preconditioner; the unpreconditioned report is computed once.
std::vector<InvarianceReport> invariance_check(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                               std::span<const LabeledPreconditioner> preconditioners, double tol,
                                               const StabilityOptions& options = {},
                                               StabilityReport* original_out = nullptr);
// Convenience overload for raw positive definite matrices.
std::vector<InvarianceReport> invariance_check(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                                               std::span<const Matrix> P_list, double tol,
                                               const StabilityOptions& options = {});

InvarianceReport compare_stability(const StabilityReport& original, const StabilityReport& preconditioned,
                                   std::string label = {});

}  // namespace glmstab

#endif  // GLMSTAB_STABILITY_HPP
