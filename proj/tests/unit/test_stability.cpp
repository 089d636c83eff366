#include <cmath>
#include <vector>

#include "doctest.h"
#include "glmstab/rng.hpp"
#include "glmstab/stability.hpp"
#include "glmstab/synth.hpp"
#include "oracles.hpp"

using namespace glmstab;

namespace {

constexpr double kTol = 1e-10;

Dataset unit_ball_sample(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double stretch = 1.0) {
  Stream s(seed);
  Matrix X(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) X(i, k) = s.normal();
    X(i, 0) *= stretch;
    X.row(i) *= s.uniform01() / X.row(i).norm();
    y(i) = 2.0 * s.uniform01() - 1.0;
  }
  return Dataset(X, y, 1.0);
}

}  // namespace

TEST_CASE("two-point dataset") {
  Matrix X(2, 1);
  X << 1.0, 1.0;
  Vector y(2);
  y << 1.0, -1.0;
  const StabilityReport r =
      average_stability(Dataset(X, y, 1.0), LossFamily::square(1.0), Domain::euclidean_ball(1.0), kTol);
  CHECK(r.converged);
  CHECK(std::abs(r.delta - 1.5) <= r.numeric_slack + 1e-12);
  CHECK(r.bound_avg == doctest::Approx(4.0));
  CHECK(r.delta <= r.bound_avg + r.numeric_slack);
}

TEST_CASE("duplicated points are more stable") {
  // w_hat = 0; dropping a +1 label gives w = -1/3, so each term is (4/3)^2/2 - 1/2.
  Matrix X(4, 1);
  X << 1.0, 1.0, 1.0, 1.0;
  Vector y(4);
  y << 1.0, 1.0, -1.0, -1.0;
  const LossFamily f = LossFamily::square(1.0);
  const StabilityReport r = average_stability(Dataset(X, y, 1.0), f, Domain::euclidean_ball(1.0), kTol);
  CHECK(std::abs(r.delta - 7.0 / 18.0) <= r.numeric_slack + 1e-12);
  const oracle::GridResult g = oracle::grid_erm(
      X, y, oracle::square_loss, [](const Vector& w) { return w.norm() <= 1.0; }, 1.0, 1.0 / 3000.0);
  CHECK(oracle::grid_delta(X, y, oracle::square_loss, g) == doctest::Approx(7.0 / 18.0).epsilon(1e-9));
  CHECK(r.delta < 1.5);
}

TEST_CASE("all-zero instances are perfectly stable") {
  const Dataset ds(Matrix::Zero(5, 3), Vector::LinSpaced(5, -1.0, 1.0), 1.0);
  const StabilityReport r = average_stability(ds, LossFamily::square(1.0), Domain::euclidean_ball(1.0), kTol);
  CHECK(r.delta == 0.0);
  CHECK(r.rank == 0);
  CHECK(r.bound_avg == 0.0);
}

TEST_CASE("bound formulas") {
  CHECK(preconditioned_bound(2.0, 1.0, 5, 100) == doctest::Approx(0.4));
  CHECK(preconditioned_bound(1.0, 0.25, 3, 60) == doctest::Approx(0.4));
  Matrix X(4, 2);
  X << 1, 0, 1, 0, 0, 0.5, 0, 0.5;
  const CovarianceSummary cov = covariance_of(X);
  // C = diag(1/2, 1/8): kappa = (5/8) / (1/8) = 5
  CHECK(cov.kappa_C == doctest::Approx(5.0));
  CHECK(stability_bound(cov, 2.0, 1.0, 4) == doctest::Approx(2.0 * 4.0 * 5.0 / 4.0));
  // max |x|^2 = 1, lambda_min = 1/8
  CHECK(uniform_stability_bound(cov, 2.0, 1.0, 4) == doctest::Approx(2.0 * 4.0 * 1.0 / (4.0 * 0.125)));
  CHECK(uniform_stability_bound(Dataset(X, Vector::Zero(4), 1.0), 2.0, 1.0) ==
        doctest::Approx(uniform_stability_bound(cov, 2.0, 1.0, 4)));
}

TEST_CASE("stability against a brute-force grid") {
  Stream s(61);
  const LossFamily f = LossFamily::square(1.0);
  const double h = 2e-3;
  for (int t = 0; t < 4; ++t) {
    const Eigen::Index n = 3 + t % 2;
    Matrix X(n, 2);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X(i, 0) = 0.5 * (2.0 * s.uniform01() - 1.0);
      X(i, 1) = 0.5 * (2.0 * s.uniform01() - 1.0);
      y(i) = 2.0 * s.uniform01() - 1.0;
    }
    const double radius = 0.8;
    const Dataset ds(X, y, 1.0);
    const StabilityReport r = average_stability(ds, f, Domain::euclidean_ball(radius), kTol);
    REQUIRE(r.converged);
    REQUIRE(r.predictions_determined);
    const oracle::GridResult g = oracle::grid_erm(
        X, y, oracle::square_loss, [&](const Vector& w) { return w.norm() <= radius; }, radius, h);
    const double grid = oracle::grid_delta(X, y, oracle::square_loss, g);
    // a feasible grid point lies within 2 h sqrt(d) of each minimizer
    const double dist = 2.0 * h * std::sqrt(2.0);
    const double xmax = X.rowwise().norm().maxCoeff();
    const double lam = covariance_of(X).lambda_max * double(n) / double(n - 1);
    const double eps_grid = f.rho() * xmax * dist + f.curvature_max() * lam * dist * dist / 2.0;
    const std::vector<double> eps_loo(n, eps_grid);
    const double grid_slack = stability_slack(X, f.rho(), f.alpha(), eps_grid, eps_loo);
    CHECK(std::abs(r.delta - grid) <= grid_slack + r.numeric_slack);
  }
}

TEST_CASE("the bound chain holds on random data") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset ds = unit_ball_sample(30, 3, seed, 10.0);
    for (const LossFamily& f : {LossFamily::square(1.0), LossFamily::bounded_logistic(1.0)}) {
      Vector y = ds.y();
      if (f.kind() == LossKind::BoundedLogistic) y = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
      const StabilityReport r = average_stability(Dataset(ds.X(), y, 1.0), f, Domain::euclidean_ball(1.0), kTol);
      CHECK(r.converged);
      CHECK(r.delta <= r.bound_avg + r.numeric_slack);
      CHECK(r.bound_avg <= r.bound_uniform + 1e-12);
      CHECK(r.kappa_C >= double(r.rank) - 1e-9);
      CHECK(r.delta_i.size() == 30);
    }
  }
}

TEST_CASE("identity preconditioner reproduces the original run") {
  const Dataset ds = unit_ball_sample(15, 2, 7);
  const LossFamily f = LossFamily::square(1.0);
  const Domain dom = Domain::euclidean_ball(1.0);
  const StabilityReport a = average_stability(ds, f, dom, kTol);
  const StabilityReport b = preconditioned_stability(ds, f, dom, inverse_sqrt(Matrix::Identity(2, 2)), kTol);
  CHECK(a.delta == b.delta);
  CHECK(a.delta_i == b.delta_i);
}

TEST_CASE("whitening by C_hat yields the dimension-only bound") {
  const Dataset ds = unit_ball_sample(40, 4, 8, 30.0);
  const LossFamily f = LossFamily::square(1.0);
  const Domain dom = Domain::euclidean_ball(1.0);
  const CovarianceSummary cov = empirical_covariance(ds);
  const StabilityReport r = preconditioned_stability(ds, f, dom, optimal_preconditioner(cov, cov.lambda_max), kTol);
  CHECK(r.kappa_C == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.bound_avg == doctest::Approx(preconditioned_bound(f.rho(), f.alpha(), 4, 40)).epsilon(1e-9));
  CHECK(cov.kappa_C > 10.0);
}

TEST_CASE("stability is invariant under random preconditioners") {
  Stream s(71);
  const Dataset ds = unit_ball_sample(20, 3, 9, 5.0);
  const Matrix A = random_spd(3, 20.0, 5);
  for (const LossFamily& f : {LossFamily::square(1.0), LossFamily::bounded_logistic(1.0)}) {
    Vector y = ds.y();
    if (f.kind() == LossKind::BoundedLogistic) y = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    const Dataset data(ds.X(), y, 1.0);
    std::vector<Matrix> Ps;
    for (int k = 0; k < 5; ++k) Ps.push_back(random_spd(3, std::pow(10.0, 4.0 * s.uniform01()), s.next_u64()));
    for (const Domain& dom : {Domain::euclidean_ball(0.9), Domain::quad_ball(A, 0.9)}) {
      const std::vector<InvarianceReport> reports = invariance_check(data, f, dom, Ps, kTol);
      REQUIRE(reports.size() == Ps.size());
      for (const InvarianceReport& rep : reports) {
        CHECK(rep.pass);
        CHECK(rep.abs_diff <= rep.tolerance_used);
        if (rep.per_index_checked) CHECK(rep.per_index_pass);
      }
    }
  }
}

TEST_CASE("slack grows with the solver tolerance") {
  const Dataset ds = unit_ball_sample(10, 2, 10);
  const std::vector<double> small(10, 1e-12), large(10, 1e-6);
  const double a = stability_slack(ds.X(), 2.0, 1.0, 1e-12, small);
  const double b = stability_slack(ds.X(), 2.0, 1.0, 1e-6, large);
  CHECK(a > 0.0);
  CHECK(b == doctest::Approx(a * 1000.0).epsilon(1e-9));
}

TEST_CASE("threads do not change the result") {
  const Dataset ds = unit_ball_sample(25, 3, 11, 3.0);
  StabilityOptions one, four;
  four.threads = 4;
  const StabilityReport a = average_stability(ds, LossFamily::square(1.0), Domain::euclidean_ball(1.0), kTol, one);
  const StabilityReport b = average_stability(ds, LossFamily::square(1.0), Domain::euclidean_ball(1.0), kTol, four);
  CHECK(a.delta == b.delta);
  CHECK(a.delta_i == b.delta_i);
}
