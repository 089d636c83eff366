#include <cmath>

#include "doctest.h"
#include "glmstab/covariance.hpp"
#include "glmstab/error.hpp"
#include "glmstab/rng.hpp"
#include "glmstab/synth.hpp"
#include "oracles.hpp"

using namespace glmstab;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index d, Stream& s) {
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) X(i, k) = s.normal();
  return X;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Argument;
}

}  // namespace

TEST_CASE("empirical covariance matches the direct sum and a Jacobi eigen oracle") {
  Stream s(1);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = 1 + t % 6;
    const Matrix X = random_matrix(3 + t, d, s);
    const CovarianceSummary cov = covariance_of(X);
    CHECK((cov.C_hat - oracle::second_moment(X)).norm() <= 1e-14 * std::max(1.0, cov.C_hat.norm()));
    const Vector ev = oracle::jacobi_eigenvalues(cov.C_hat);
    CHECK((cov.eigenvalues - ev.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-12 * ev(0));
    CHECK(std::abs(cov.trace - ev.sum()) <= 1e-10 * cov.trace);
    CHECK(cov.kappa_C >= static_cast<double>(cov.rank) * (1.0 - 1e-12));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      CHECK(cov.per_point_norms_sq(i) == doctest::Approx(X.row(i).squaredNorm()).epsilon(1e-14));
  }
}

TEST_CASE("rank and smallest nonzero eigenvalue on rank-deficient data") {
  Matrix X(4, 3);
  X << 1, 0, 0, 2, 0, 0, 0, 1, 0, 0, 3, 0;
  const CovarianceSummary cov = covariance_of(X);
  CHECK(cov.rank == 2);
  // C = diag(5/4, 10/4, 0)
  CHECK(cov.lambda_max == doctest::Approx(2.5));
  CHECK(cov.lambda_min_nonzero == doctest::Approx(1.25));
  CHECK(cov.kappa_C == doctest::Approx(3.0));
  const Matrix pinv = cov.pseudo_inverse();
  CHECK((cov.C_hat * pinv * cov.C_hat - cov.C_hat).norm() < 1e-12);
}

TEST_CASE("rank-one data has kappa one") {
  Matrix X(3, 2);
  X << 1, 1, 2, 2, -1, -1;
  const CovarianceSummary cov = covariance_of(X);
  CHECK(cov.rank == 1);
  CHECK(cov.kappa_C == doctest::Approx(1.0));
}

TEST_CASE("all-zero instances give rank zero") {
  const CovarianceSummary cov = covariance_of(Matrix::Zero(3, 2));
  CHECK(cov.rank == 0);
  CHECK(cov.kappa_C == 0.0);
}

TEST_CASE("inverse square root invariants") {
  Stream s(4);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = 1 + t % 5;
    const Matrix P = random_spd(d, std::pow(10.0, 4.0 * s.uniform01()), s.next_u64());
    const Preconditioner pre = inverse_sqrt(P);
    const Matrix I = Matrix::Identity(d, d);
    CHECK((pre.P_inv_sqrt * P * pre.P_inv_sqrt - I).norm() <= 1e-8 * d);
    CHECK((pre.P_sqrt * pre.P_inv_sqrt - I).norm() <= 1e-8 * d);
    CHECK((pre.P_sqrt * pre.P_sqrt - P).norm() <= 1e-10 * P.norm());
  }
}

TEST_CASE("inverse square root of the identity is exact") {
  const Preconditioner pre = inverse_sqrt(Matrix::Identity(3, 3));
  CHECK(pre.is_identity());
  CHECK(pre.P_inv_sqrt == Matrix::Identity(3, 3));
}

TEST_CASE("non positive definite preconditioners are rejected") {
  Matrix P(2, 2);
  P << 1, 0, 0, 0;
  CHECK(code_of([&] { inverse_sqrt(P); }) == ErrorCode::NotPositiveDefinite);
  P << 1, 2, 2, 1;
  CHECK(code_of([&] { inverse_sqrt(P); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("optimal preconditioner whitens the sample") {
  Stream s(8);
  Matrix X = random_matrix(30, 4, s);
  X.col(0) *= 30.0;
  const CovarianceSummary cov = covariance_of(X);
  const Preconditioner pre = optimal_preconditioner(cov, 1.0);
  const CovarianceSummary after = covariance_of(X * pre.P_inv_sqrt);
  CHECK((after.C_hat - Matrix::Identity(4, 4)).norm() < 1e-10);
  CHECK(after.kappa_C == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("completion fills the null space") {
  Matrix X(3, 3);
  X << 1, 1, 0, 1, -1, 0, 2, 0, 0;
  const CovarianceSummary cov = covariance_of(X);
  REQUIRE(cov.rank == 2);
  const Preconditioner pre = optimal_preconditioner(cov, 0.7);
  Vector e3 = Vector::Unit(3, 2);
  CHECK((pre.P * e3 - 0.7 * e3).norm() < 1e-14);
  const CovarianceSummary after = covariance_of(X * pre.P_inv_sqrt);
  CHECK(after.kappa_C == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(optimal_preconditioner(cov, 0.0), Error);
}

TEST_CASE("preconditioning preserves every prediction") {
  Stream s(9);
  const Matrix X = random_matrix(10, 3, s);
  const Dataset ds(X, Vector::Zero(10), 1.0);
  const Matrix P = random_spd(3, 100.0, 77);
  const Preconditioner pre = inverse_sqrt(P);
  Matrix A = random_spd(3, 10.0, 78);
  for (const Domain& dom : {Domain::euclidean_ball(0.8), Domain::quad_ball(A, 0.8)}) {
    const PreconditionedProblem pp = precondition(ds, dom, pre);
    for (int t = 0; t < 50; ++t) {
      Vector w(3);
      for (int k = 0; k < 3; ++k) w(k) = s.normal();
      w *= 0.8 * s.uniform01() / dom.gauge(w);
      const Vector u = pre.P_sqrt * w;
      CHECK(pp.domain.contains(u));
      CHECK((pp.dataset.X() * u - X * w).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(std::abs(pp.domain.gauge(u) - dom.gauge(w)) < 1e-10);
    }
  }
}

TEST_CASE("identity preconditioning returns the inputs bit for bit") {
  Stream s(10);
  const Dataset ds(random_matrix(5, 2, s), Vector::Zero(5), 1.0);
  const Domain dom = Domain::l1_ball(1.0);
  const PreconditionedProblem pp = precondition(ds, dom, inverse_sqrt(Matrix::Identity(2, 2)));
  CHECK(pp.dataset == ds);
  CHECK(pp.domain.kind() == DomainKind::L1Ball);
}

TEST_CASE("l1 and box domains cannot be preconditioned by a non-identity map") {
  Stream s(12);
  const Dataset ds(random_matrix(5, 2, s), Vector::Zero(5), 1.0);
  const Preconditioner pre = inverse_sqrt(2.0 * Matrix::Identity(2, 2));
  CHECK(code_of([&] { precondition(ds, Domain::l1_ball(1.0), pre); }) == ErrorCode::UnsupportedDomainTransform);
  CHECK(code_of([&] { precondition(ds, Domain::box(1.0), pre); }) == ErrorCode::UnsupportedDomainTransform);
}

TEST_CASE("random_spd has the requested condition number") {
  for (double cond : {1.0, 10.0, 1e4}) {
    const Matrix P = random_spd(5, cond, 3);
    const Vector ev = oracle::jacobi_eigenvalues(P);
    CHECK(ev(0) / ev(4) == doctest::Approx(cond).epsilon(1e-8));
  }
}
