#include "glmstab/domain.hpp"

#include <cmath>
#include <sstream>

#include "glmstab/error.hpp"

namespace glmstab {

namespace {

void require_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::Argument, "domain radius must be positive and finite");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dim(const QuadBall& q, const Vector& v) {
  if (v.size() != q.A.rows()) {
    std::ostringstream os;
    os << "vector of dimension " << v.size() << " used with a quadratic-form ball of dimension " << q.A.rows();
    fail(ErrorCode::Argument, os.str());
  }
}

}  // namespace

const char* to_string(DomainKind kind) noexcept {
  switch (kind) {
    case DomainKind::EuclideanBall: return "euclidean_ball";
    case DomainKind::QuadBall: return "quad_ball";
    case DomainKind::L1Ball: return "l1_ball";
    case DomainKind::Box: return "box";
  }
  return "unknown";
}

const char* to_string(InstanceNorm norm) noexcept { return norm == InstanceNorm::L2 ? "L2" : "Linf"; }

InstanceNorm instance_norm_from_string(const std::string& name) {
  if (name == "L2" || name == "l2") return InstanceNorm::L2;
  if (name == "Linf" || name == "linf") return InstanceNorm::Linf;
  fail(ErrorCode::Argument, "unsupported instance norm '" + name + "' (expected L2 or Linf)");
}

Domain Domain::euclidean_ball(double radius) {
  require_radius(radius);
  return Domain(EuclideanBall{radius});
}

Domain Domain::quad_ball(Matrix A, double radius) {
  require_radius(radius);
  if (A.rows() != A.cols() || A.rows() == 0) fail(ErrorCode::Argument, "quadratic-form matrix must be square");
  if (!A.allFinite()) fail(ErrorCode::Argument, "quadratic-form matrix has non-finite entries");
  if (asymmetry(A) > 1e-10) fail(ErrorCode::Argument, "quadratic-form matrix is not symmetric");
  A = 0.5 * (A + A.transpose()).eval();
  auto eig = std::make_shared<const SymmetricEigen>(symmetric_eigen(A));
  if (!(eig->values(eig->values.size() - 1) > 0.0))
    fail(ErrorCode::NotPositiveDefinite, "quadratic-form matrix must have all eigenvalues > 0");
  return Domain(QuadBall{std::move(A), radius, std::move(eig)});
}

Domain Domain::l1_ball(double radius) {
  require_radius(radius);
  return Domain(L1Ball{radius});
}

Domain Domain::box(double radius) {
  require_radius(radius);
  return Domain(Box{radius});
}

DomainKind Domain::kind() const noexcept { return static_cast<DomainKind>(shape_.index()); }

double Domain::radius() const noexcept {
  return std::visit([](const auto& s) { return s.radius; }, shape_);
}

std::optional<Eigen::Index> Domain::dimension() const noexcept {
  if (const auto* q = std::get_if<QuadBall>(&shape_)) return q->A.rows();
  return std::nullopt;
}

double Domain::gauge(const Vector& w) const {
  return std::visit(overloaded{
                        [&](const EuclideanBall&) { return w.norm(); },
                        [&](const QuadBall& q) {
                          require_dim(q, w);
                          return std::sqrt(std::max(0.0, w.dot(q.A * w)));
                        },
                        [&](const L1Ball&) { return w.lpNorm<1>(); },
                        [&](const Box&) { return w.size() == 0 ? 0.0 : w.lpNorm<Eigen::Infinity>(); },
                    },
                    shape_);
}

bool Domain::contains(const Vector& w, double slack) const {
  if (!w.allFinite()) return false;
  const double r = radius();
  return gauge(w) <= r * (1.0 + slack) + slack;
}

double Domain::support(const Vector& x) const {
  return std::visit(overloaded{
                        [&](const EuclideanBall& b) { return b.radius * x.norm(); },
                        [&](const QuadBall& q) {
                          require_dim(q, x);
                          const Vector rotated = q.eig->vectors.transpose() * x;
                          double s = 0.0;
                          for (Eigen::Index k = 0; k < rotated.size(); ++k)
                            s += rotated(k) * rotated(k) / q.eig->values(k);
                          return q.radius * std::sqrt(s);
                        },
                        [&](const L1Ball& b) { return x.size() == 0 ? 0.0 : b.radius * x.lpNorm<Eigen::Infinity>(); },
                        [&](const Box& b) { return b.radius * x.lpNorm<1>(); },
                    },
                    shape_);
}

bool Domain::preconditionable() const noexcept {
  return kind() == DomainKind::EuclideanBall || kind() == DomainKind::QuadBall;
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind()) << "(r=" << radius();
  if (const auto* q = std::get_if<QuadBall>(&shape_)) os << ", d=" << q->A.rows();
  os << ")";
  return os.str();
}

Domain dual_domain(InstanceNorm instance_norm, double cap_Y, double instance_radius) {
  if (!(cap_Y > 0.0)) fail(ErrorCode::Argument, "dual_domain needs Y > 0");
  if (!(instance_radius > 0.0)) fail(ErrorCode::Argument, "dual_domain needs a positive instance radius");
  switch (instance_norm) {
    case InstanceNorm::L2: return Domain::euclidean_ball(cap_Y / instance_radius);
    case InstanceNorm::Linf: return Domain::l1_ball(cap_Y / instance_radius);
  }
  fail(ErrorCode::Argument, "unsupported instance norm tag");
}

}  // namespace glmstab
