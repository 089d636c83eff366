#ifndef GLMSTAB_LOSS_HPP
#define GLMSTAB_LOSS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace glmstab {

enum class LossKind { Square, BoundedLogistic, Custom };

const char* to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(const std::string& name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double z, double slack = 0.0) const noexcept {
    return z >= lo - slack && z <= hi + slack;
  }
  double width() const noexcept { return hi - lo; }
};

// Value and first two derivatives of phi_y at z.
struct LossValue {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

// (rho, alpha): |phi_y'| <= rho and phi_y'' >= alpha over the prediction
// interval, uniformly in y.
struct LossConstants {
  double rho = 0.0;
  double alpha = 0.0;
};

// Slack applied to the prediction interval before declaring z out of range.
inline constexpr double kPredictionSlack = 1e-9;

// A scalar loss phi_y(z) together with certified constants over a prediction
// interval. Square: phi_y(z) = (z - y)^2 / 2 on [-Y, Y]. BoundedLogistic:
// phi_y(z) = log(1 + exp(-y z)), y in {-1, +1}, z in [-Y, Y].
class LossFamily {
 public:
  using Evaluator = std::function<LossValue(double y, double z)>;

  static LossFamily square(double cap_Y);
  static LossFamily bounded_logistic(double cap_Y);
  // curvature_max bounds phi'' from above; the solver uses it for its
  // initial step.
  static LossFamily custom(std::string name, Evaluator evaluator, Interval label_range,
                           Interval prediction_interval, LossConstants constants,
                           double curvature_max);

  LossKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double cap_Y() const noexcept { return cap_Y_; }
  Interval label_range() const noexcept { return labels_; }
  Interval prediction_interval() const noexcept { return predictions_; }
  double rho() const noexcept { return constants_.rho; }
  double alpha() const noexcept { return constants_.alpha; }
  LossConstants constants() const noexcept { return constants_; }
  double curvature_max() const noexcept { return curvature_max_; }

  // Checked evaluation; throws OutOfRange when z leaves the widened interval.
  LossValue eval(double y, double z) const;
  // Same formulas with no range check.
  LossValue eval_unchecked(double y, double z) const;

  // Labels used by grid checks: the two classes for the logistic loss,
  // `count` evenly spaced points of the label range otherwise.
  std::vector<double> label_grid(std::size_t count) const;
  bool valid_label(double y) const noexcept;

 private:
  LossFamily() = default;

  LossKind kind_ = LossKind::Square;
  std::string name_;
  double cap_Y_ = 0.0;
  Interval labels_;
  Interval predictions_;
  LossConstants constants_;
  double curvature_max_ = 0.0;
  Evaluator custom_;
};

LossFamily make_loss(LossKind kind, double cap_Y);

LossValue loss_eval(const LossFamily& family, double y, double z);

// Certified (rho, alpha) for the built-in kinds. Custom has no built-in
// constants and throws MissingConstants.
LossConstants loss_constants(LossKind kind, double cap_Y);

// kappa(phi) = rho^2 / alpha.
double functional_condition(double rho, double alpha);

double logistic_sigmoid(double t) noexcept;

struct ExpConcavityReport {
  double alpha_bar = 0.0;
  double min_margin = 0.0;
  bool pass = false;
};

// Scalar form of the exp-concavity inequality for rank-one Hessians:
// min over a grid_size x grid_size grid (prediction interval x labels) of
// phi''(z) - alpha_bar * phi'(z)^2. alpha_bar defaults to alpha / rho^2.
ExpConcavityReport exp_concavity_margin(const LossFamily& family, std::size_t grid_size,
                                        std::optional<double> alpha_bar = std::nullopt);

}  // namespace glmstab

#endif  // GLMSTAB_LOSS_HPP
