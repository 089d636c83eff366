#ifndef GLMSTAB_DOMAIN_HPP
#define GLMSTAB_DOMAIN_HPP

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "glmstab/linalg.hpp"

namespace glmstab {

struct EuclideanBall {
  double radius;
};

// { w : w^T A w <= radius^2 } with A symmetric positive definite.
struct QuadBall {
  Matrix A;
  double radius;
  std::shared_ptr<const SymmetricEigen> eig;  // of A, shared across copies
};

struct L1Ball {
  double radius;
};

struct Box {
  double radius;
};

enum class DomainKind { EuclideanBall, QuadBall, L1Ball, Box };

const char* to_string(DomainKind kind) noexcept;

// Membership slack applied to the defining inequality.
inline constexpr double kMembershipSlack = 1e-10;

// Compact convex constraint set W containing the origin.
class Domain {
 public:
  using Shape = std::variant<EuclideanBall, QuadBall, L1Ball, Box>;

  static Domain euclidean_ball(double radius);
  static Domain quad_ball(Matrix A, double radius);
  static Domain l1_ball(double radius);
  static Domain box(double radius);

  const Shape& shape() const noexcept { return shape_; }
  DomainKind kind() const noexcept;
  double radius() const noexcept;
  // Dimension fixed by the shape (QuadBall only).
  std::optional<Eigen::Index> dimension() const noexcept;

  bool contains(const Vector& w, double slack = kMembershipSlack) const;
  // Value of the defining functional: ||w||_2, sqrt(w^T A w), ||w||_1, ||w||_inf.
  double gauge(const Vector& w) const;
  // Support function max_{w in W} w^T x.
  double support(const Vector& x) const;
  // Closed under congruence by a preconditioner (EuclideanBall, QuadBall).
  bool preconditionable() const noexcept;

  std::string describe() const;

 private:
  explicit Domain(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

enum class InstanceNorm { L2, Linf };

const char* to_string(InstanceNorm norm) noexcept;
InstanceNorm instance_norm_from_string(const std::string& name);

// Dual-norm domain for an instance ball of the given norm and radius R:
// L2 -> EuclideanBall(Y / R), Linf -> L1Ball(Y / R). Guarantees |w^T x| <= Y.
Domain dual_domain(InstanceNorm instance_norm, double cap_Y, double instance_radius);

}  // namespace glmstab

#endif  // GLMSTAB_DOMAIN_HPP
