#include "glmstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glmstab/error.hpp"
#include "glmstab/parallel.hpp"

namespace glmstab {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
MeanSe summarize(const std::vector<TrialRecord>& trials, F field) {
  const double count = static_cast<double>(trials.size());
  double sum = 0.0;
  for (const auto& t : trials) sum += field(t);
  const double mean = sum / count;
  double ss = 0.0;
  for (const auto& t : trials) {
    const double dev = field(t) - mean;
    ss += dev * dev;
  }
  const double se = trials.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  return {mean, se};
}

Vector reference_predictor(const Sampler& sampler, const LossFamily& family, const Domain& domain, Eigen::Index n,
                           double tol, Stream& trial, const ExperimentOptions& options) {
  const auto size = static_cast<Eigen::Index>(options.oracle_factor) * n;
  const Dataset reference = sampler.sample(std::max<Eigen::Index>(size, 2), trial.child(2).key());
  return erm_solve(reference, family, domain, tol, options.max_iter).w_hat;
}

McReport aggregate(std::vector<TrialRecord> records, Eigen::Index n, Eigen::Index d, const LossFamily& family) {
  McReport report;
  report.trials = records.size();
  report.n = n;
  report.d = d;
  const MeanSe gap = summarize(records, [](const TrialRecord& t) { return t.gap; });
  const MeanSe delta = summarize(records, [](const TrialRecord& t) { return t.delta; });
  const MeanSe excess = summarize(records, [](const TrialRecord& t) { return t.excess; });
  report.mean_gap = gap.mean;
  report.se_gap = gap.se;
  report.mean_delta = delta.mean;
  report.se_delta = delta.se;
  report.mean_excess = excess.mean;
  report.se_excess = excess.se;
  report.bound_preconditioned = preconditioned_bound(family.rho(), family.alpha(), d, n);
  report.bound_unpreconditioned_mean =
      summarize(records, [](const TrialRecord& t) { return t.bound_unpreconditioned; }).mean;
  report.mean_kappa_C = summarize(records, [](const TrialRecord& t) { return t.kappa_C; }).mean;
  report.mean_numeric_slack = summarize(records, [](const TrialRecord& t) { return t.numeric_slack; }).mean;
  for (const auto& t : records) {
    if (t.delta > t.bound_unpreconditioned + t.numeric_slack) ++report.bound_violations;
    report.all_converged = report.all_converged && t.converged;
  }
  report.per_trial = std::move(records);
  return report;
}

}  // namespace

McReport monte_carlo_gap(const Sampler& sampler, Eigen::Index n, std::size_t trials, double tol, std::uint64_t seed,
                         const ExperimentOptions& options) {
  if (trials < 30) fail(ErrorCode::Argument, "Monte Carlo experiments need at least 30 trials");
  if (n < 2) fail(ErrorCode::Argument, "sample size must be at least 2");
  const LossFamily family = sampler.family();
  const Domain domain = sampler.domain();
  const Stream root(seed);

  std::vector<TrialRecord> records(trials);
  parallel_for(trials, options.threads, [&](std::size_t t) {
    Stream trial = root.child(t);
    const Dataset data = sampler.sample(n, trial.child(0).key());
    StabilityOptions stab;
    stab.max_iter = options.max_iter;
    const StabilityReport rep = average_stability(data, family, domain, tol, stab);
    const Vector w_ref = reference_predictor(sampler, family, domain, n, tol, trial, options);
    const PairedRiskEstimate est =
        estimate_risk_paired(sampler, family, rep.w_hat, w_ref, options.m_test, trial.child(1).key());

    TrialRecord& r = records[t];
    r.delta = rep.delta;
    r.gap = est.risk.risk - empirical_risk(data, family, rep.w_hat).value;
    r.excess = est.difference.risk;
    r.kappa_C = rep.kappa_C;
    r.rank = rep.rank;
    r.bound_unpreconditioned = rep.bound_avg;
    r.bound_uniform = rep.bound_uniform;
    r.numeric_slack = rep.numeric_slack;
    r.converged = rep.converged;
  });
  return aggregate(std::move(records), n, sampler.dimension(), family);
}

std::vector<McReport> excess_risk_experiment(const Sampler& sampler, const std::vector<Eigen::Index>& n_grid,
                                             std::size_t trials, double tol, std::uint64_t seed,
                                             const ExperimentOptions& options) {
  if (n_grid.empty()) fail(ErrorCode::Argument, "n_grid must not be empty");
  for (Eigen::Index n : n_grid)
    if (n < 2) fail(ErrorCode::Argument, "every n in n_grid must be at least 2");
  const Stream root(seed);
  std::vector<McReport> rows;
  rows.reserve(n_grid.size());
  for (Eigen::Index n : n_grid)
    rows.push_back(monte_carlo_gap(sampler, n, trials, tol, root.child(static_cast<std::uint64_t>(n)).key(), options));
  return rows;
}

SgdReport sgd_stability_experiment(const Sampler& sampler, Eigen::Index n, const SgdExperimentConfig& config,
                                   std::size_t trials, std::uint64_t seed, const ExperimentOptions& options) {
  if (trials < 30) fail(ErrorCode::Argument, "Monte Carlo experiments need at least 30 trials");
  if (n < 2) fail(ErrorCode::Argument, "sample size must be at least 2");
  if (config.passes < 1) fail(ErrorCode::Argument, "SGD needs at least one pass");
  const LossFamily family = sampler.family();
  const Domain domain = sampler.domain();
  const Eigen::Index d = sampler.dimension();
  const double rho = family.rho();
  const double alpha = family.alpha();
  const Stream root(seed);

  std::vector<TrialRecord> records(trials);
  std::vector<double> hardt(trials);
  std::vector<double> ratio_over_kappa(trials);
  parallel_for(trials, options.threads, [&](std::size_t t) {
    Stream trial = root.child(t);
    const Dataset data = sampler.sample(n, trial.child(0).key());
    const CovarianceSummary cov = empirical_covariance(data);

    double gamma = config.gamma;
    if (!(gamma > 0.0)) gamma = cov.rank > 0 ? alpha * cov.lambda_min_nonzero : 1.0;
    SgdConfig sgd;
    sgd.passes = config.passes;
    sgd.step_rule = config.step_rule;
    sgd.constant_step = config.constant_step;
    sgd.gamma = gamma;
    sgd.averaging = config.averaging;

    const Stream sgd_root = trial.child(3);
    sgd.seed = sgd_root.child(static_cast<std::uint64_t>(n)).key();
    const SolveResult full = sgd_solve(data, family, domain, sgd);

    double sum = 0.0;
    bool converged = full.converged;
    for (Eigen::Index i = 0; i < n; ++i) {
      SgdConfig loo_cfg = sgd;
      loo_cfg.seed = sgd_root.child(static_cast<std::uint64_t>(i)).key();
      const SolveResult loo = sgd_loo_solve(data, family, domain, i, loo_cfg);
      converged = converged && loo.converged;
      const auto x = data.X().row(i);
      const double yi = data.y()(i);
      sum += family.eval(yi, x.dot(loo.w_hat)).value - family.eval(yi, x.dot(full.w_hat)).value;
    }

    const Vector w_ref = reference_predictor(sampler, family, domain, n, kSgdReferenceTol, trial, options);
    const PairedRiskEstimate est =
        estimate_risk_paired(sampler, family, full.w_hat, w_ref, options.m_test, trial.child(1).key());

    TrialRecord& r = records[t];
    r.delta = sum / static_cast<double>(n);
    r.gap = est.risk.risk - full.objective;
    r.excess = est.difference.risk;
    r.kappa_C = cov.kappa_C;
    r.rank = cov.rank;
    r.bound_unpreconditioned = stability_bound(cov, rho, alpha, n);
    r.bound_uniform = uniform_stability_bound(cov, rho, alpha, n);
    r.eps = full.certificate_eps;
    r.converged = converged;
    const double max_norm_sq = cov.per_point_norms_sq.maxCoeff();
    hardt[t] = 2.0 * rho * rho * max_norm_sq / (gamma * static_cast<double>(n));
    const double pre = preconditioned_bound(rho, alpha, d, n);
    ratio_over_kappa[t] = cov.kappa_C > 0.0 ? (hardt[t] / pre) / (cov.kappa_C / static_cast<double>(d))
                                            : std::numeric_limits<double>::infinity();
  });

  SgdReport report;
  report.preconditioned_bound = preconditioned_bound(rho, alpha, d, n);
  double hardt_sum = 0.0;
  for (double h : hardt) hardt_sum += h;
  report.hardt_style_bound = hardt_sum / static_cast<double>(trials);
  report.hardt_ratio_mean = report.hardt_style_bound / report.preconditioned_bound;
  report.min_hardt_ratio_over_kappa = *std::min_element(ratio_over_kappa.begin(), ratio_over_kappa.end());
  const MeanSe eps = summarize(records, [](const TrialRecord& r) { return r.eps; });
  report.measured_eps_mean = eps.mean;
  report.measured_eps_max = 0.0;
  for (const auto& r : records) report.measured_eps_max = std::max(report.measured_eps_max, r.eps);
  const MeanSe de = summarize(records, [](const TrialRecord& r) { return r.delta + r.eps; });
  report.mean_delta_plus_eps = de.mean;
  report.se_delta_plus_eps = de.se;
  report.mc = aggregate(std::move(records), n, d, family);
  // Per-trial bounds hold for exact minimizers only.
  report.mc.bound_violations = 0;
  return report;
}

}  // namespace glmstab
