#include "glmstab/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "glmstab/error.hpp"
#include "glmstab/rng.hpp"

namespace glmstab {

namespace {

constexpr int kMaxHalvings = 80;

void require_dims(const Matrix& X, const Vector& y, const Vector& w) {
  if (y.size() != X.rows()) fail(ErrorCode::Argument, "label count does not match the number of instances");
  if (w.size() != X.cols()) {
    std::ostringstream os;
    os << "weight vector has dimension " << w.size() << " but instances have dimension " << X.cols();
    fail(ErrorCode::Argument, os.str());
  }
}

double risk_value(const Matrix& X, const Vector& y, const LossFamily& family, const Vector& w, Vector* gradient) {
  require_dims(X, y, w);
  const Eigen::Index n = X.rows();
  const Interval iv = family.prediction_interval();
  double total = 0.0;
  if (gradient) gradient->setZero(X.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = X.row(i).dot(w);
    if (!iv.contains(z, kPredictionSlack) || !std::isfinite(z)) {
      std::ostringstream os;
      os.precision(17);
      os << "prediction w^T x_" << i << " = " << z << " lies outside the prediction interval [" << iv.lo << ", "
         << iv.hi << "]";
      fail(ErrorCode::InfeasiblePrediction, os.str());
    }
    const LossValue v = family.eval_unchecked(y(i), z);
    total += v.value;
    if (gradient) gradient->noalias() += v.first * X.row(i).transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (gradient) *gradient *= inv_n;
  return total * inv_n;
}

struct PgdOutcome {
  Vector w;
  double objective = 0.0;
  double eps = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

PgdOutcome projected_gradient(const Matrix& X, const Vector& y, const LossFamily& family, const Domain& domain,
                              const Vector& start, const CovarianceSummary& cov, double tol, std::size_t max_iter,
                              bool record_history) {
  const Eigen::Index d = X.cols();
  const double mu = family.alpha() * cov.lambda_min_nonzero;
  const double step0 = 1.0 / (family.curvature_max() * cov.lambda_max);
  const bool full_rank = cov.rank == d;
  const Matrix basis = cov.span_basis();

  PgdOutcome out;
  out.w = project(domain, start);
  Vector grad(d);
  out.objective = risk_value(X, y, family, out.w, &grad);
  out.eps = std::numeric_limits<double>::infinity();
  if (record_history) out.history.push_back(out.objective);

  Vector grad_new(d);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    double t = step0;
    bool accepted = false;
    Vector w_new;
    Vector diff;
    double f_new = 0.0;
    for (int h = 0; h < kMaxHalvings; ++h) {
      w_new = project(domain, out.w - t * grad);
      diff = w_new - out.w;
      f_new = risk_value(X, y, family, w_new, &grad_new);
      const double model = out.objective + grad.dot(diff) + diff.squaredNorm() / (2.0 * t);
      if (f_new <= model + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(out.objective)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const Vector mapping = -diff / t;
    const double span_sq = full_rank ? mapping.squaredNorm() : (basis.transpose() * mapping).squaredNorm();
    out.eps = span_sq / (2.0 * mu);
    out.w = std::move(w_new);
    out.objective = f_new;
    grad.swap(grad_new);
    out.iterations = k;
    if (record_history) out.history.push_back(out.objective);
    if (out.eps <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace

RiskValue empirical_risk(const Matrix& X, const Vector& y, const LossFamily& family, const Vector& w) {
  RiskValue out;
  out.value = risk_value(X, y, family, w, &out.gradient);
  return out;
}

RiskValue empirical_risk(const Dataset& dataset, const LossFamily& family, const Vector& w) {
  return empirical_risk(dataset.X(), dataset.y(), family, w);
}

Matrix drop_row(const Matrix& X, Eigen::Index i) {
  if (i < 0 || i >= X.rows()) fail(ErrorCode::Argument, "row index out of range");
  Matrix out(X.rows() - 1, X.cols());
  out.topRows(i) = X.topRows(i);
  out.bottomRows(X.rows() - 1 - i) = X.bottomRows(X.rows() - 1 - i);
  return out;
}

Vector drop_entry(const Vector& y, Eigen::Index i) {
  if (i < 0 || i >= y.size()) fail(ErrorCode::Argument, "entry index out of range");
  Vector out(y.size() - 1);
  out.head(i) = y.head(i);
  out.tail(y.size() - 1 - i) = y.tail(y.size() - 1 - i);
  return out;
}

SolveResult solve_sample(const Matrix& X, const Vector& y, const LossFamily& family, const Domain& domain,
                         double tol, std::size_t max_iter, const SolverTuning& tuning, const Vector* warm_start) {
  if (!(tol > 0.0)) fail(ErrorCode::Argument, "solver tolerance must be positive");
  if (X.rows() < 1) fail(ErrorCode::Argument, "solver needs at least one sample");
  if (const auto dim = domain.dimension(); dim && *dim != X.cols())
    fail(ErrorCode::Argument, "domain dimension does not match the data");
  const Eigen::Index d = X.cols();
  const Vector start = warm_start ? *warm_start : Vector::Zero(d);
  if (start.size() != d) fail(ErrorCode::Argument, "warm start has the wrong dimension");

  const CovarianceSummary cov = covariance_of(X);
  SolveResult result;

  if (cov.rank == 0) {
    // Every loss is constant in w.
    result.w_hat = project(domain, start);
    result.objective = risk_value(X, y, family, result.w_hat, nullptr);
    result.certificate_eps = 0.0;
    result.converged = true;
    if (tuning.record_history) result.objective_history.push_back(result.objective);
    return result;
  }

  PgdOutcome pgd;
  if (tuning.metric == SolverMetric::Whitened && domain.preconditionable()) {
    const Preconditioner pre = optimal_preconditioner(cov, cov.lambda_max);
    const Matrix Xw = X * pre.P_inv_sqrt;
    const Domain Ww = transform_domain(domain, pre);
    const Vector u0 = pre.P_sqrt * project(domain, start);
    pgd = projected_gradient(Xw, y, family, Ww, u0, covariance_of(Xw), tol, max_iter, tuning.record_history);
    pgd.w = project(domain, pre.P_inv_sqrt * pgd.w);
    pgd.objective = risk_value(X, y, family, pgd.w, nullptr);
  } else {
    pgd = projected_gradient(X, y, family, domain, start, cov, tol, max_iter, tuning.record_history);
  }

  result.w_hat = std::move(pgd.w);
  result.objective = pgd.objective;
  result.certificate_eps = pgd.eps;
  result.iterations = pgd.iterations;
  result.converged = pgd.converged;
  result.objective_history = std::move(pgd.history);
  return result;
}

SolveResult erm_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain, double tol,
                      std::size_t max_iter, const SolverTuning& tuning) {
  return solve_sample(dataset.X(), dataset.y(), family, domain, tol, max_iter, tuning, nullptr);
}

SolveResult loo_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain, Eigen::Index i,
                      double tol, const Vector& warm_start, std::size_t max_iter, const SolverTuning& tuning) {
  if (i < 0 || i >= dataset.n()) {
    std::ostringstream os;
    os << "leave-one-out index " << i << " outside [0, " << dataset.n() << ")";
    fail(ErrorCode::Argument, os.str());
  }
  const Matrix X = drop_row(dataset.X(), i);
  const Vector y = drop_entry(dataset.y(), i);
  return solve_sample(X, y, family, domain, tol, max_iter, tuning, &warm_start);
}

void SgdConfig::validate() const {
  if (passes < 1) fail(ErrorCode::Argument, "SGD needs at least one pass");
  if (step_rule == StepRule::InverseStrongConvexity && !(gamma > 0.0))
    fail(ErrorCode::Argument, "the 1/(gamma t) step rule needs gamma > 0");
  if (step_rule == StepRule::Constant && !(constant_step >= 0.0 && std::isfinite(constant_step)))
    fail(ErrorCode::Argument, "constant SGD step must be finite and nonnegative");
}

SolveResult sgd_sample(const Matrix& X, const Vector& y, const LossFamily& family, const Domain& domain,
                       const SgdConfig& config) {
  config.validate();
  const Eigen::Index m = X.rows();
  const Eigen::Index d = X.cols();
  if (m < 1) fail(ErrorCode::Argument, "SGD needs at least one sample");

  Stream rng(config.seed);
  Vector w = project(domain, Vector::Zero(d));
  Vector average = Vector::Zero(d);
  const std::size_t total = config.passes * static_cast<std::size_t>(m);
  for (std::size_t t = 1; t <= total; ++t) {
    const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(m)));
    const double z = X.row(i).dot(w);
    const double slope = family.eval(y(i), z).first;
    const double eta = config.step_rule == StepRule::Constant
                           ? config.constant_step
                           : 1.0 / (config.gamma * static_cast<double>(t));
    if (slope != 0.0 && eta != 0.0) w = project(domain, w - (eta * slope) * X.row(i).transpose());
    average += (w - average) / static_cast<double>(t);
  }

  SolveResult result;
  result.w_hat = config.averaging ? project(domain, average) : w;
  result.iterations = total;
  result.objective = risk_value(X, y, family, result.w_hat, nullptr);
  const SolveResult reference = solve_sample(X, y, family, domain, kSgdReferenceTol, kDefaultMaxIter, {}, nullptr);
  result.certificate_eps = std::max(0.0, result.objective - reference.objective);
  result.converged = reference.converged;
  return result;
}

SolveResult sgd_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain,
                      const SgdConfig& config) {
  return sgd_sample(dataset.X(), dataset.y(), family, domain, config);
}

SolveResult sgd_loo_solve(const Dataset& dataset, const LossFamily& family, const Domain& domain, Eigen::Index i,
                          const SgdConfig& config) {
  return sgd_sample(drop_row(dataset.X(), i), drop_entry(dataset.y(), i), family, domain, config);
}

}  // namespace glmstab
