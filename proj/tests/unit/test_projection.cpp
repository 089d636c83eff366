#include <cmath>

#include "doctest.h"
#include "glmstab/rng.hpp"
#include "glmstab/solver.hpp"
#include "glmstab/synth.hpp"
#include "oracles.hpp"

using namespace glmstab;

namespace {

Vector gaussian(Eigen::Index d, Stream& s, double scale = 1.0) {
  Vector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v(k) = scale * s.normal();
  return v;
}

// (z - p)^T (w - p) <= tol for feasible w characterizes p = Pi(z).
double worst_variational(const Domain& dom, const Vector& z, const Vector& p, Stream& s, int probes) {
  double worst = -1.0;
  for (int t = 0; t < probes; ++t) {
    Vector w = gaussian(z.size(), s);
    w *= dom.radius() * s.uniform01() / std::max(dom.gauge(w), 1e-300);
    worst = std::max(worst, (z - p).dot(w - p));
  }
  // vertices and boundary points along coordinate axes
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      Vector w = Vector::Zero(z.size());
      w(k) = sign;
      w *= dom.radius() / dom.gauge(w);
      worst = std::max(worst, (z - p).dot(w - p));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("projection satisfies the variational inequality on every domain") {
  Stream s(31);
  for (int t = 0; t < 60; ++t) {
    const Eigen::Index d = 1 + t % 5;
    const Matrix A = random_spd(d, std::pow(10.0, 3.0 * s.uniform01()), s.next_u64());
    const double r = 0.2 + s.uniform01();
    for (const Domain& dom : {Domain::euclidean_ball(r), Domain::l1_ball(r), Domain::box(r), Domain::quad_ball(A, r)}) {
      const Vector z = gaussian(d, s, 2.0);
      const Vector p = project(dom, z);
      REQUIRE(dom.contains(p, 1e-12));
      CHECK(worst_variational(dom, z, p, s, 300) <= 1e-8);
    }
  }
}

TEST_CASE("interior points are returned unchanged") {
  Vector z(3);
  z << 0.1, -0.2, 0.05;
  const Matrix A = random_spd(3, 50.0, 4);
  for (const Domain& dom : {Domain::euclidean_ball(1), Domain::l1_ball(1), Domain::box(1), Domain::quad_ball(A, 10)})
    CHECK(project(dom, z) == z);
}

TEST_CASE("closed forms") {
  Vector z(2);
  z << 3.0, 4.0;
  CHECK((project(Domain::euclidean_ball(1.0), z) - Vector(Eigen::Vector2d(0.6, 0.8))).norm() < 1e-15);
  CHECK((project(Domain::box(1.0), z) - Vector(Eigen::Vector2d(1.0, 1.0))).norm() == 0.0);
  // l1: threshold tau with (3 - tau) + (4 - tau) = 1 gives tau = 3
  CHECK((project(Domain::l1_ball(1.0), z) - Vector(Eigen::Vector2d(0.0, 1.0))).norm() < 1e-15);
  z << 2.0, 2.5;
  CHECK((project(Domain::l1_ball(1.0), z) - Vector(Eigen::Vector2d(0.25, 0.75))).norm() < 1e-15);
}

TEST_CASE("ellipsoid projection agrees with a bisection oracle") {
  Stream s(37);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index d = 1 + t % 6;
    const Matrix A = random_spd(d, std::pow(10.0, 6.0 * s.uniform01()), s.next_u64());
    const double r = 0.1 + s.uniform01();
    const Vector z = gaussian(d, s, 3.0);
    const Vector p = project(Domain::quad_ball(A, r), z);
    const Vector q = oracle::project_ellipsoid_bisect(A, r, z);
    CHECK((p - q).norm() <= 1e-7 * std::max(1.0, z.norm()));
    // the quadratic form itself carries cond(A) * eps rounding
    CHECK(Domain::quad_ball(A, r).contains(p));
    CHECK(std::sqrt(p.dot(A * p)) <= r * (1.0 + 1e-10));
  }
}
