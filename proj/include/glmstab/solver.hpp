#ifndef GLMSTAB_SOLVER_HPP
#define GLMSTAB_SOLVER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "glmstab/covariance.hpp"
#include "glmstab/dataset.hpp"
#include "glmstab/domain.hpp"
#include "glmstab/loss.hpp"

namespace glmstab {

// Euclidean projection onto W. Interior points come back unchanged.
//   EuclideanBall  radial scaling
//   Box            coordinate clamping
//   L1Ball         sort-and-threshold
//   QuadBall       rotate into the eigenbasis of A and solve the secular
//                  equation sum_k lambda_k z_k^2 / (1 + theta lambda_k)^2 = r^2
//                  for theta >= 0 (safeguarded Newton/bisection)
Vector project(const Domain& domain, const Vector& point);

struct RiskValue {
  double value = 0.0;
  Vector gradient;
};

// L(w) = (1/n) sum_i phi_{y_i}(w^T x_i) and its gradient. Throws
// InfeasiblePrediction naming the first index whose prediction leaves the
// loss's prediction interval.
RiskValue empirical_risk(const Dataset& dataset, const LossFamily& family, const Vector& w);
// Same over an arbitrary sample matrix.
RiskValue empirical_risk(const Matrix& X, const Vector& y, const LossFamily& family, const Vector& w);

inline constexpr std::size_t kDefaultMaxIter = 100000;

enum class SolverMetric {
  // Run the projected gradient iteration in coordinates whitened by the
  // (completed) sample covariance when the domain is a quadratic-form ball;
  // other domains fall back to Euclidean.
  Whitened,
  // Plain projected gradient in the given coordinates.
  Euclidean,
};

struct SolverTuning {
  SolverMetric metric = SolverMetric::Whitened;
  bool record_history = false;
};

struct SolveResult {
  Vector w_hat;
  // Upper bound on L(w_hat) - min L.
  double certificate_eps = 0.0;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  // Objective after every accepted step, starting with the initial point.
  std::vector<double> objective_history;
};

// Projected gradient descent from project(W, 0) with halving backtracking
// starting at 1/L_est. Each step is accepted when the quadratic upper bound
// with Armijo constant 1/2 holds, and certified by
//     eps = |Pi G|^2 / (2 mu),  mu = alpha * lambda_min_nonzero(C_hat)
// where G is the gradient mapping and Pi the projector onto span(x_i).
// Running out of iterations is not an error: converged = false.
SolveResult erm_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain, double tol,
                      std::size_t max_iter = kDefaultMaxIter, const SolverTuning& tuning = {});

// Minimizer of (1/(n-1)) sum_{j != i} phi_{y_j}(w^T x_j), warm-started.
SolveResult loo_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain, Eigen::Index i,
                      double tol, const Vector& warm_start, std::size_t max_iter = kDefaultMaxIter,
                      const SolverTuning& tuning = {});

// Solver core over a raw sample matrix (at least one row).
SolveResult solve_sample(const Matrix& X, const Vector& y, const LossFamily& family, const Domain& domain,
                         double tol, std::size_t max_iter, const SolverTuning& tuning,
                         const Vector* warm_start = nullptr);

// Copy of X / y without row i.
Matrix drop_row(const Matrix& X, Eigen::Index i);
Vector drop_entry(const Vector& y, Eigen::Index i);

enum class StepRule {
  InverseStrongConvexity,  // eta_t = 1 / (gamma t)
  Constant,                // eta_t = eta
};

struct SgdConfig {
  std::size_t passes = 1;
  StepRule step_rule = StepRule::InverseStrongConvexity;
  double constant_step = 0.0;  // eta for StepRule::Constant
  double gamma = 0.0;          // strong-convexity estimate alpha * lambda_min_nonzero(C_hat)
  std::uint64_t seed = 0;
  bool averaging = true;

  void validate() const;
};

inline constexpr double kSgdReferenceTol = 1e-10;

// Projected SGD sampling indices uniformly from the seeded Stream. Returns the
// uniform average of w_1..w_T when averaging is on. certificate_eps is the
// measured gap L(w_out) - L(w_ref) against erm_solve at kSgdReferenceTol
// (clamped at 0); it is never derived from convergence theory.
SolveResult sgd_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                      const SgdConfig& config);
// Same on the sample with row i removed.
SolveResult sgd_loo_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                          Eigen::Index i, const SgdConfig& config);
SolveResult sgd_sample(const Matrix& X, const Vector& y, const LossFamily& family, const Domain& domain,
                       const SgdConfig& config);

}  // namespace glmstab

#endif  // GLMSTAB_SOLVER_HPP
