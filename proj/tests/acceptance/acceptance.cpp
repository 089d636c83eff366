// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "glmstab/experiments.hpp"
#include "glmstab/parallel.hpp"
#include "glmstab/solver.hpp"
#include "glmstab/stability.hpp"
#include "glmstab/synth.hpp"
#include "oracles.hpp"

using namespace glmstab;

namespace {

// ---- pinned tolerances -----------------------------------------------------
constexpr double kSolverTol = 1e-10;
constexpr double kMaxInvarianceDiff = 1e-6;
constexpr double kSigmas = 3.0;
constexpr double kRateLo = 0.3;
constexpr double kRateHi = 0.8;
constexpr double kMinGapFactor = 5.0;
constexpr double kMaxSgdEps = 1e-2;
constexpr double kMinHardtOverKappa = 0.25;  // inflation >= kappa / (4 d)
constexpr double kGridStep = 1e-3;
constexpr double kFdRelTol = 1e-5;
constexpr double kFdStep = 1e-6;
constexpr double kVariationalTol = 1e-8;
constexpr double kExpConcavityFloor = -1e-12;
constexpr double kBoundChainSlack = 1e-12;

constexpr double kBudgetC1 = 300.0;
constexpr double kBudgetC3 = 600.0;
constexpr double kBudgetC4 = 900.0;

struct Outcome {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

unsigned workers() { return resolve_threads(0); }

StabilityOptions stability_options() {
  StabilityOptions o;
  o.threads = workers();
  return o;
}

ExperimentOptions experiment_options() {
  ExperimentOptions o;
  o.threads = workers();
  return o;
}

DistributionSpec spiked_spec(Eigen::Index d, double top, double noise, std::optional<std::uint64_t> rotation) {
  DistributionSpec s;
  s.d = d;
  s.spectrum = Vector::Ones(d);
  s.spectrum(0) = top;
  s.w_star_direction = Vector::Unit(d, 0);
  s.w_star_norm = 0.5;
  s.noise_sigma = noise;
  s.rotation_seed = rotation;
  return s;
}

// Everything Delta <= bound_avg + slack and bound_avg <= bound_uniform is checked on.
struct BoundLedger {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max Delta / (bound_avg + slack)

  void add(double delta, double bound_avg, double bound_uniform, double slack) {
    ++checked;
    const bool ok = delta <= bound_avg + slack && bound_avg <= bound_uniform + kBoundChainSlack;
    if (!ok) ++violations;
    if (bound_avg + slack > 0.0) worst_ratio = std::max(worst_ratio, delta / (bound_avg + slack));
  }
  void add(const StabilityReport& r) { add(r.delta, r.bound_avg, r.bound_uniform, r.numeric_slack); }
  void add(const McReport& r) {
    for (const TrialRecord& t : r.per_trial) add(t.delta, t.bound_unpreconditioned, t.bound_uniform, t.numeric_slack);
  }
};

struct InvarianceTally {
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  double max_abs_diff = 0.0;
  double max_tolerance = 0.0;
  double min_kappa = INFINITY;
  double max_kappa = 0.0;
  bool converged = true;

  void add(const StabilityReport& original, const std::vector<InvarianceReport>& reports) {
    min_kappa = std::min(min_kappa, original.kappa_C);
    max_kappa = std::max(max_kappa, original.kappa_C);
    converged = converged && original.converged;
    for (const InvarianceReport& r : reports) {
      ++comparisons;
      const bool ok = r.pass && r.abs_diff <= r.tolerance_used && (!r.per_index_checked || r.per_index_pass) &&
                      r.preconditioned.converged;
      if (!ok) ++failures;
      max_abs_diff = std::max(max_abs_diff, r.abs_diff);
      max_tolerance = std::max(max_tolerance, r.tolerance_used);
      converged = converged && r.preconditioned.converged;
    }
  }
};

// The standard battery: `random_count` random P with condition 10^U(0,4), then P = C_hat.
std::vector<InvarianceReport> battery(const Dataset& ds, const LossFamily& f, const Domain& dom, int random_count,
                                      Stream stream, StabilityReport& original) {
  std::vector<LabeledPreconditioner> list;
  for (int k = 0; k < random_count; ++k) {
    Stream s = stream.child(static_cast<std::uint64_t>(k));
    const double cond = std::pow(10.0, 4.0 * s.uniform01());
    list.push_back({"random[" + std::to_string(k) + "]", inverse_sqrt(random_spd(ds.d(), cond, s.next_u64()))});
  }
  const CovarianceSummary cov = empirical_covariance(ds);
  list.push_back({"optimal", optimal_preconditioner(cov, cov.lambda_max)});
  return invariance_check(ds, f, dom, list, kSolverTol, stability_options(), &original);
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- criteria ----------------------------------------------------------------

Outcome criterion1(BoundLedger& ledger) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes{{2, 20}, {5, 20}, {10, 20},
                                                                  {2, 100}, {5, 100}, {10, 100}};
  const Stream root(1001);
  InvarianceTally tally;
  for (int j = 0; j < 10; ++j) {
    const auto [d, n] = shapes[j % shapes.size()];
    // population kappa = top + d - 1 = K, log-spaced over [10, 1e4]
    const double K = std::pow(10.0, 1.0 + 3.0 * j / 9.0);
    const SyntheticDistribution dist(spiked_spec(d, K - double(d - 1), 0.1, 100 + j));
    const Dataset ds = dist.sample(n, root.child(j).key());
    StabilityReport original;
    const auto reports = battery(ds, dist.family(), dist.domain(), 20, root.child(1000 + j), original);
    tally.add(original, reports);
    ledger.add(original);
    for (const InvarianceReport& r : reports) ledger.add(r.preconditioned);
  }
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = tally.failures == 0 && tally.converged && tally.max_abs_diff <= kMaxInvarianceDiff &&
           tally.comparisons == 210 && o.seconds <= kBudgetC1 && tally.min_kappa <= 20.0 && tally.max_kappa >= 5e3;
  std::ostringstream os;
  os << tally.comparisons - tally.failures << "/" << tally.comparisons << " comparisons within tolerance_used"
     << fmt("; max |diff| %.2e (limit %.0e), max tolerance_used %.2e", tally.max_abs_diff, kMaxInvarianceDiff,
            tally.max_tolerance)
     << fmt("; kappa(C_hat) spans %.3g..%.3g; %.1fs", tally.min_kappa, tally.max_kappa, o.seconds);
  o.detail = os.str();
  return o;
}

Outcome mc_identity(const DistributionSpec& spec, Eigen::Index n, std::uint64_t seed, BoundLedger& ledger,
                    std::string& text) {
  const SyntheticDistribution dist(spec);
  const McReport r = monte_carlo_gap(dist, n, 200, kSolverTol, seed, experiment_options());
  ledger.add(r);
  const double diff = std::abs(r.mean_gap - r.mean_delta);
  const double allowed = kSigmas * (r.se_gap + r.se_delta);
  Outcome o;
  o.pass = diff <= allowed && r.all_converged && r.trials == 200;
  text += fmt("d=%.0f n=%.0f: |gap-delta| %.2e <= %.2e", double(spec.d), double(n), diff, allowed);
  text += fmt(" (gap %.4f, delta %.4f)", r.mean_gap, r.mean_delta);
  return o;
}

Outcome criterion3(BoundLedger& ledger) {
  const auto start = std::chrono::steady_clock::now();
  DistributionSpec small = spiked_spec(2, 1.0, 0.3, std::nullopt);
  small.spectrum(1) = 0.5;
  small.w_star_direction << 0.6, 0.8;
  const DistributionSpec mid = spiked_spec(5, 4.0, 0.3, 7);
  std::string a, b;
  const Outcome x = mc_identity(small, 20, 3001, ledger, a);
  const Outcome y = mc_identity(mid, 50, 3002, ledger, b);
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = x.pass && y.pass && o.seconds <= kBudgetC3;
  o.detail = a + "; " + b + fmt("; %.1fs", o.seconds);
  return o;
}

// Excess-risk bound at every n, plus (optionally) the halving ratio.
bool excess_rows(const std::vector<McReport>& rows, bool check_rate, std::string& text) {
  bool ok = true;
  for (const McReport& r : rows) {
    const double threshold = 4.0 * 1.0 * double(r.d) / double(r.n);  // 4 Y^2 d / n with Y = 1
    const bool pass = r.mean_excess <= threshold + kSigmas * r.se_excess && r.all_converged;
    ok = ok && pass;
    text += fmt(" n=%.0f excess %.2e<=%.2e", double(r.n), r.mean_excess, threshold + kSigmas * r.se_excess);
  }
  if (check_rate) {
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      const double ratio = rows[k + 1].mean_excess / rows[k].mean_excess;
      const bool pass = ratio >= kRateLo && ratio <= kRateHi;
      ok = ok && pass;
      text += fmt(" ratio(%.0f->%.0f)=%.2f", double(rows[k].n), double(rows[k + 1].n), ratio);
    }
  }
  return ok;
}

struct IllRun {
  std::vector<McReport> rows;
};

Outcome criterion4(BoundLedger& ledger, IllRun& ill) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Eigen::Index> grid{50, 100, 200, 400};
  const SyntheticDistribution realizable(spiked_spec(5, 1.0, 0.1, std::nullopt));
  const auto rate_rows = excess_risk_experiment(realizable, grid, 100, kSolverTol, 4001, experiment_options());
  const SyntheticDistribution spiked(spiked_spec(5, 100.0, 0.1, std::nullopt));
  ill.rows = excess_risk_experiment(spiked, grid, 100, kSolverTol, 4002, experiment_options());
  for (const McReport& r : rate_rows) ledger.add(r);
  for (const McReport& r : ill.rows) ledger.add(r);
  std::string a = "isotropic:", b = "spiked:";
  const bool ok_a = excess_rows(rate_rows, true, a);
  const bool ok_b = excess_rows(ill.rows, false, b);
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = ok_a && ok_b && o.seconds <= kBudgetC4;
  o.detail = a + "; " + b + fmt("; %.1fs", o.seconds);
  return o;
}

Outcome criterion5(const IllRun& ill, BoundLedger& ledger) {
  const auto start = std::chrono::steady_clock::now();
  // Per-trial means from the spiked excess-risk run.
  double min_mc_ratio = INFINITY;
  for (const McReport& r : ill.rows)
    min_mc_ratio = std::min(min_mc_ratio, r.bound_unpreconditioned_mean / r.bound_preconditioned);

  // Fresh datasets from the same spec: gap factor and invariance on each.
  const SyntheticDistribution spiked(spiked_spec(5, 100.0, 0.1, std::nullopt));
  const LossFamily f = spiked.family();
  const Stream root(5001);
  InvarianceTally tally;
  double min_ratio = INFINITY;
  int k = 0;
  for (Eigen::Index n : {50, 100, 200, 400}) {
    for (int rep = 0; rep < 3; ++rep, ++k) {
      const Dataset ds = spiked.sample(n, root.child(k).key());
      StabilityReport original;
      const auto reports = battery(ds, f, spiked.domain(), 5, root.child(100 + k), original);
      tally.add(original, reports);
      ledger.add(original);
      min_ratio = std::min(min_ratio, original.bound_avg / preconditioned_bound(f.rho(), f.alpha(), ds.d(), n));
    }
  }
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = min_ratio >= kMinGapFactor && min_mc_ratio >= kMinGapFactor && tally.failures == 0 && tally.converged &&
           tally.max_abs_diff <= kMaxInvarianceDiff;
  std::ostringstream os;
  os << fmt("bound_avg / bound_precond >= %.1f on 12 datasets and >= %.1f on trial means (need %.0f)", min_ratio,
            min_mc_ratio, kMinGapFactor)
     << "; invariance " << tally.comparisons - tally.failures << "/" << tally.comparisons
     << fmt(" (max |diff| %.2e); %.1fs", tally.max_abs_diff, o.seconds);
  o.detail = os.str();
  return o;
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  SgdExperimentConfig cfg;
  cfg.passes = 50;
  cfg.step_rule = StepRule::InverseStrongConvexity;
  cfg.averaging = true;
  const SyntheticDistribution well(spiked_spec(5, 1.0, 0.1, std::nullopt));
  const SgdReport w = sgd_stability_experiment(well, 100, cfg, 50, 6001, experiment_options());
  const SyntheticDistribution spiked(spiked_spec(5, 100.0, 0.1, std::nullopt));
  const SgdReport s = sgd_stability_experiment(spiked, 100, cfg, 50, 6002, experiment_options());

  const double allowed = w.preconditioned_bound + kSigmas * w.se_delta_plus_eps;
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = w.measured_eps_max <= kMaxSgdEps && w.mean_delta_plus_eps <= allowed &&
           s.min_hardt_ratio_over_kappa >= kMinHardtOverKappa;
  o.detail = fmt("eps_max %.2e <= %.0e; delta+eps %.4f <= %.4f", w.measured_eps_max, kMaxSgdEps,
                 w.mean_delta_plus_eps, allowed) +
             fmt("; spiked: hardt/precond %.1f, min (hardt/precond)/(kappa/d) %.2f >= %.2f", s.hardt_ratio_mean,
                 s.min_hardt_ratio_over_kappa, kMinHardtOverKappa) +
             fmt("; %.1fs", o.seconds);
  return o;
}

Outcome criterion7(BoundLedger& ledger) {
  const auto start = std::chrono::steady_clock::now();
  Stream s(7001);
  const LossFamily f = LossFamily::square(1.0);
  int objective_failures = 0, delta_failures = 0, problems = 0;
  double worst_obj = 0.0, worst_delta_ratio = 0.0;
  for (int t = 0; t < 25; ++t) {
    const Eigen::Index d = 1 + t % 2;
    const Eigen::Index n = d + 1 + static_cast<Eigen::Index>(s.index(static_cast<std::uint64_t>(4 - d)));
    Matrix X(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector x(d);
      for (Eigen::Index k = 0; k < d; ++k) x(k) = s.normal();
      X.row(i) = 0.5 * std::sqrt(s.uniform01()) * x.normalized();
      y(i) = 2.0 * s.uniform01() - 1.0;
    }
    const double radius = 0.3 + 0.7 * s.uniform01();
    const Dataset ds(X, y, 1.0);
    const Domain dom = Domain::euclidean_ball(radius);

    const oracle::GridResult g = oracle::grid_erm(
        X, y, oracle::square_loss, [&](const Vector& w) { return w.norm() <= radius; }, radius, kGridStep);
    const double allowed = 2.0 * kSolverTol + f.rho() * kGridStep;
    const SolveResult full = erm_solve(ds, f, dom, kSolverTol);
    std::vector<double> diffs{std::abs(full.objective - g.obj_full)};
    for (Eigen::Index i = 0; i < n; ++i)
      diffs.push_back(std::abs(loo_solve(ds, f, dom, i, kSolverTol, full.w_hat).objective - g.obj_loo[i]));
    for (double diff : diffs) {
      ++problems;
      worst_obj = std::max(worst_obj, diff);
      if (diff > allowed) ++objective_failures;
    }

    const StabilityReport r = average_stability(ds, f, dom, kSolverTol);
    ledger.add(r);
    // a feasible grid point lies within 2 h sqrt(d) of each minimizer
    const double dist = 2.0 * kGridStep * std::sqrt(double(d));
    const double xmax = X.rowwise().norm().maxCoeff();
    const double lam = covariance_of(X).lambda_max * double(n) / double(n - 1);
    const double eps_grid = f.rho() * xmax * dist + f.curvature_max() * lam * dist * dist / 2.0;
    const std::vector<double> eps_loo(n, eps_grid);
    bool determined = true;
    const double slack = stability_slack(X, f.rho(), f.alpha(), eps_grid, eps_loo, &determined) + r.numeric_slack;
    const double gap = std::abs(r.delta - oracle::grid_delta(X, y, oracle::square_loss, g));
    worst_delta_ratio = std::max(worst_delta_ratio, gap / slack);
    if (!(determined && r.converged && gap <= slack)) ++delta_failures;
  }
  Outcome o;
  o.seconds = elapsed(start);
  o.pass = objective_failures == 0 && delta_failures == 0;
  o.detail = fmt("%.0f objectives within 2 tol + rho h = %.2e (worst %.2e)", double(problems),
                 2.0 * kSolverTol + 2.0 * kGridStep, worst_obj) +
             fmt("; 25 Delta comparisons, %.0f outside combined slack (worst |diff|/slack %.2f); %.1fs",
                 double(delta_failures), worst_delta_ratio, o.seconds);
  return o;
}

Outcome criterion8() {
  const auto start = std::chrono::steady_clock::now();
  Stream s(8001);

  // Gradients of the empirical risk at 100 random points.
  double worst_fd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const bool logistic = t % 2 == 1;
    const LossFamily f = logistic ? LossFamily::bounded_logistic(1.0) : LossFamily::square(1.0);
    const Eigen::Index d = 1 + t % 5;
    const Eigen::Index n = 10;
    Matrix X(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) X(i, k) = s.normal();
      X.row(i) *= s.uniform01() / X.row(i).norm();
      y(i) = logistic ? (s.uniform01() < 0.5 ? -1.0 : 1.0) : 2.0 * s.uniform01() - 1.0;
    }
    Vector w(d);
    for (Eigen::Index k = 0; k < d; ++k) w(k) = s.normal();
    w *= 0.9 * s.uniform01() / w.norm();
    const Vector g = empirical_risk(X, y, f, w).gradient;
    Vector fd(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      fd(k) = oracle::central_difference(
          [&](double h) {
            Vector v = w;
            v(k) += h;
            return empirical_risk(X, y, f, v).value;
          },
          0.0, kFdStep);
    }
    worst_fd = std::max(worst_fd, (g - fd).norm() / g.norm());
  }

  // Variational inequality (z - p)^T (w - p) <= tol for feasible w.
  double worst_vi = -INFINITY;
  int projections = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + t % 6;
    const Matrix A = random_spd(d, std::pow(10.0, 4.0 * s.uniform01()), s.next_u64());
    const double r = 0.1 + s.uniform01();
    for (const Domain& dom : {Domain::euclidean_ball(r), Domain::l1_ball(r), Domain::box(r), Domain::quad_ball(A, r)}) {
      Vector z(d);
      for (Eigen::Index k = 0; k < d; ++k) z(k) = 3.0 * s.normal();
      const Vector p = project(dom, z);
      ++projections;
      if (!dom.contains(p)) worst_vi = INFINITY;
      for (int probe = 0; probe < 200; ++probe) {
        Vector w(d);
        for (Eigen::Index k = 0; k < d; ++k) w(k) = s.normal();
        w *= r * std::pow(s.uniform01(), 0.25) / dom.gauge(w);
        worst_vi = std::max(worst_vi, (z - p).dot(w - p));
      }
    }
  }

  const ExpConcavityReport ec = exp_concavity_margin(LossFamily::square(1.0), 100, 0.25);  // 100 x 100 grid

  Outcome o;
  o.seconds = elapsed(start);
  o.pass = worst_fd <= kFdRelTol && worst_vi <= kVariationalTol && ec.min_margin >= kExpConcavityFloor;
  o.detail = fmt("max gradient rel err %.2e <= %.0e; max (z-p)^T(w-p) %.2e over ", worst_fd, kFdRelTol, worst_vi) +
             std::to_string(projections) + " projections" +
             fmt("; exp-concavity margin %.2e >= %.0e (alpha_bar 1/4, 10^4 points); %.1fs", ec.min_margin,
                 kExpConcavityFloor, o.seconds);
  return o;
}

Outcome criterion2(const BoundLedger& ledger) {
  Outcome o;
  o.pass = ledger.violations == 0 && ledger.checked > 0;
  o.detail = std::to_string(ledger.checked - ledger.violations) + "/" + std::to_string(ledger.checked) +
             " datasets satisfy Delta <= bound_avg + slack and bound_avg <= bound_uniform" +
             fmt(" (max Delta / (bound_avg + slack) = %.3f)", ledger.worst_ratio);
  return o;
}

}  // namespace

int main() {
  BoundLedger ledger;
  IllRun ill;
  std::map<int, std::pair<std::string, Outcome>> results;
  auto run = [&](int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    std::fprintf(stderr, "[criterion %d done]\n", id);
    results[id] = {name, o};
  };
  run(1, "invariance", [&] { return criterion1(ledger); });
  run(3, "expectation identity", [&] { return criterion3(ledger); });
  run(4, "fast-rate bound", [&] { return criterion4(ledger, ill); });
  run(5, "conditioning gap", [&] { return criterion5(ill, ledger); });
  run(6, "sgd", [] { return criterion6(); });
  run(7, "oracle equivalence", [&] { return criterion7(ledger); });
  run(8, "numerical hygiene", [] { return criterion8(); });
  run(2, "per-sample bound", [&] { return criterion2(ledger); });

  bool all = true;
  for (const auto& [id, entry] : results) {
    const auto& [name, o] = entry;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
