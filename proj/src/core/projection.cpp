#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "glmstab/error.hpp"
#include "glmstab/solver.hpp"

namespace glmstab {

namespace {

Vector project_l1(const Vector& p, double r) {
  if (p.lpNorm<1>() <= r) return p;
  std::vector<double> u(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) u[k] = std::abs(p(k));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - r) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double mag = std::max(std::abs(p(k)) - theta, 0.0);
    out(k) = std::copysign(mag, p(k));
  }
  return out;
}

Vector project_quad(const QuadBall& q, const Vector& p) {
  if (p.size() != q.A.rows()) fail(ErrorCode::Argument, "projection point does not match the quad ball dimension");
  const double r2 = q.radius * q.radius;
  if (p.dot(q.A * p) <= r2) return p;

  const Vector& lam = q.eig->values;
  const Vector z = q.eig->vectors.transpose() * p;
  auto g = [&](double theta, double* dg) {
    double value = 0.0;
    double slope = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      const double s = 1.0 + theta * lam(k);
      const double t = lam(k) * z(k) * z(k) / (s * s);
      value += t;
      slope -= 2.0 * t * lam(k) / s;
    }
    if (dg) *dg = slope;
    return value;
  };

  // g is decreasing and convex in theta; Newton on h = 1/sqrt(g) - 1/r is
  // nearly linear, bisection keeps it inside [lo, hi].
  double lo = 0.0;
  double hi = z.norm() / (q.radius * std::sqrt(lam(lam.size() - 1)));
  double theta = 0.0;
  for (int it = 0; it < 200; ++it) {
    double dg = 0.0;
    const double gv = g(theta, &dg);
    if (std::abs(gv - r2) <= 1e-14 * r2) break;
    if (gv > r2) lo = theta; else hi = theta;
    if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    const double h = 1.0 / std::sqrt(gv) - 1.0 / q.radius;
    const double dh = -0.5 * dg / (gv * std::sqrt(gv));
    double next = dh > 0.0 ? theta - h / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    theta = next;
  }
  // A theta a rounding error short of the root is fixed by the rescale below.
  Vector rotated(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) rotated(k) = z(k) / (1.0 + theta * lam(k));
  Vector out = q.eig->vectors * rotated;
  const double gauge = std::sqrt(out.dot(q.A * out));
  if (gauge > q.radius) out *= q.radius / gauge;
  return out;
}

}  // namespace

Vector project(const Domain& domain, const Vector& point) {
  if (!point.allFinite()) fail(ErrorCode::Argument, "cannot project a non-finite point");
  switch (domain.kind()) {
    case DomainKind::EuclideanBall: {
      const double r = domain.radius();
      const double norm = point.norm();
      if (norm <= r) return point;
      Vector out = point * (r / norm);
      // guard against the scaled norm rounding above r
      const double check = out.norm();
      if (check > r) out *= r / check;
      return out;
    }
    case DomainKind::Box: {
      const double r = domain.radius();
      return point.cwiseMax(-r).cwiseMin(r);
    }
    case DomainKind::L1Ball:
      return project_l1(point, domain.radius());
    case DomainKind::QuadBall:
      return project_quad(std::get<QuadBall>(domain.shape()), point);
  }
  return point;
}

}  // namespace glmstab
