#include "glmstab/report.hpp"

#include <cmath>

namespace glmstab {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(num(v(k)));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

Json to_json(const Domain& domain) {
  Json out;
  out["kind"] = to_string(domain.kind());
  out["radius"] = num(domain.radius());
  if (const auto* q = std::get_if<QuadBall>(&domain.shape())) out["A"] = to_json(q->A);
  return out;
}

Json to_json(const LossFamily& family) {
  Json out;
  out["kind"] = to_string(family.kind());
  out["cap_Y"] = num(family.cap_Y());
  out["rho"] = num(family.rho());
  out["alpha"] = num(family.alpha());
  out["prediction_interval"] = {num(family.prediction_interval().lo), num(family.prediction_interval().hi)};
  return out;
}

Json to_json(const DistributionSpec& spec) {
  Json out;
  out["d"] = spec.d;
  out["spectrum"] = to_json(spec.spectrum);
  out["w_star_direction"] = to_json(spec.w_star_direction);
  out["w_star_norm"] = num(spec.w_star_norm);
  out["noise_sigma"] = num(spec.noise_sigma);
  out["cap_Y"] = num(spec.cap_Y);
  out["instance_norm"] = to_string(spec.instance_norm);
  out["instance_radius"] = num(spec.instance_radius);
  out["family"] = to_string(spec.family_kind);
  out["rotation_seed"] = spec.rotation_seed ? Json(*spec.rotation_seed) : Json(nullptr);
  return out;
}

Json to_json(const CovarianceSummary& cov) {
  Json out;
  out["trace"] = num(cov.trace);
  out["eigenvalues"] = to_json(cov.eigenvalues);
  out["rank"] = cov.rank;
  out["lambda_max"] = num(cov.lambda_max);
  out["lambda_min_nonzero"] = num(cov.lambda_min_nonzero);
  out["kappa_C"] = num(cov.kappa_C);
  return out;
}

Json to_json(const SolveResult& result) {
  Json out;
  out["w_hat"] = to_json(result.w_hat);
  out["certificate_eps"] = num(result.certificate_eps);
  out["iterations"] = result.iterations;
  out["objective"] = num(result.objective);
  out["converged"] = result.converged;
  return out;
}

Json to_json(const StabilityReport& r, bool include_loo_predictors) {
  Json out;
  out["delta"] = num(r.delta);
  out["delta_i"] = to_json(r.delta_i);
  out["bound_avg"] = num(r.bound_avg);
  out["bound_uniform"] = num(r.bound_uniform);
  out["bound_preconditioned"] = num(r.bound_preconditioned);
  out["solver_tol"] = num(r.solver_tol);
  out["numeric_slack"] = num(r.numeric_slack);
  out["converged"] = r.converged;
  out["predictions_determined"] = r.predictions_determined;
  out["max_certificate_eps"] = num(r.max_certificate_eps);
  out["n"] = r.n;
  out["d"] = r.d;
  out["rank"] = r.rank;
  out["kappa_C"] = num(r.kappa_C);
  out["rho"] = num(r.rho);
  out["alpha"] = num(r.alpha);
  out["w_hat"] = to_json(r.w_hat);
  if (include_loo_predictors) {
    Json loo = Json::array();
    for (const auto& w : r.w_loo) loo.push_back(to_json(w));
    out["w_loo"] = std::move(loo);
  }
  return out;
}

Json to_json(const InvarianceReport& r) {
  Json out;
  out["label"] = r.label;
  out["delta_original"] = num(r.delta_original);
  out["delta_preconditioned"] = num(r.delta_preconditioned);
  out["abs_diff"] = num(r.abs_diff);
  out["tolerance_used"] = num(r.tolerance_used);
  out["pass"] = r.pass;
  out["kappa_before"] = num(r.kappa_before);
  out["kappa_after"] = num(r.kappa_after);
  out["max_abs_diff_i"] = num(r.max_abs_diff_i);
  out["per_index_checked"] = r.per_index_checked;
  out["per_index_pass"] = r.per_index_pass;
  out["preconditioned"] = to_json(r.preconditioned);
  return out;
}

Json to_json(const TrialRecord& t) {
  Json out;
  out["delta"] = num(t.delta);
  out["gap"] = num(t.gap);
  out["excess"] = num(t.excess);
  out["kappa_C"] = num(t.kappa_C);
  out["rank"] = t.rank;
  out["bound_unpreconditioned"] = num(t.bound_unpreconditioned);
  out["bound_uniform"] = num(t.bound_uniform);
  out["numeric_slack"] = num(t.numeric_slack);
  out["eps"] = num(t.eps);
  out["converged"] = t.converged;
  return out;
}

Json to_json(const McReport& r, bool include_trials) {
  Json out;
  out["trials"] = r.trials;
  out["mean_gap"] = num(r.mean_gap);
  out["se_gap"] = num(r.se_gap);
  out["mean_delta"] = num(r.mean_delta);
  out["se_delta"] = num(r.se_delta);
  out["mean_excess"] = num(r.mean_excess);
  out["se_excess"] = num(r.se_excess);
  out["bound_preconditioned"] = num(r.bound_preconditioned);
  out["bound_unpreconditioned_mean"] = num(r.bound_unpreconditioned_mean);
  out["n"] = r.n;
  out["d"] = r.d;
  out["mean_kappa_C"] = num(r.mean_kappa_C);
  out["mean_numeric_slack"] = num(r.mean_numeric_slack);
  out["bound_violations"] = r.bound_violations;
  out["all_converged"] = r.all_converged;
  out["sample_size_note"] = kSampleSizeNote;
  if (include_trials) {
    Json trials = Json::array();
    for (const auto& t : r.per_trial) trials.push_back(to_json(t));
    out["per_trial"] = std::move(trials);
  }
  return out;
}

Json to_json(const SgdReport& r, bool include_trials) {
  Json out = to_json(r.mc, include_trials);
  out["measured_eps_mean"] = num(r.measured_eps_mean);
  out["measured_eps_max"] = num(r.measured_eps_max);
  out["hardt_style_bound"] = num(r.hardt_style_bound);
  out["preconditioned_bound"] = num(r.preconditioned_bound);
  out["mean_delta_plus_eps"] = num(r.mean_delta_plus_eps);
  out["se_delta_plus_eps"] = num(r.se_delta_plus_eps);
  out["hardt_ratio_mean"] = num(r.hardt_ratio_mean);
  out["min_hardt_ratio_over_kappa"] = num(r.min_hardt_ratio_over_kappa);
  return out;
}

}  // namespace glmstab
