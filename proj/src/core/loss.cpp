#include "glmstab/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "glmstab/error.hpp"

namespace glmstab {

namespace {

std::string format_interval(Interval iv) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << iv.lo << ", " << iv.hi << "]";
  return os.str();
}

void require_cap(double cap_Y) {
  if (!(cap_Y > 0.0) || !std::isfinite(cap_Y)) {
    std::ostringstream os;
    os << "cap_Y must be positive and finite (got " << cap_Y
       << "); the prediction interval would have empty interior";
    fail(ErrorCode::Argument, os.str());
  }
}

}  // namespace

const char* to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::Square: return "square";
    case LossKind::BoundedLogistic: return "bounded_logistic";
    case LossKind::Custom: return "custom";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "square") return LossKind::Square;
  if (name == "bounded_logistic" || name == "logistic") return LossKind::BoundedLogistic;
  if (name == "custom") return LossKind::Custom;
  fail(ErrorCode::Argument, "unknown loss family '" + name + "'");
}

double logistic_sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

LossConstants loss_constants(LossKind kind, double cap_Y) {
  switch (kind) {
    case LossKind::Square:
      require_cap(cap_Y);
      return {2.0 * cap_Y, 1.0};
    case LossKind::BoundedLogistic: {
      require_cap(cap_Y);
      const double s = logistic_sigmoid(cap_Y);
      return {1.0, s * (1.0 - s)};
    }
    case LossKind::Custom:
      fail(ErrorCode::MissingConstants, "custom loss families must supply (rho, alpha) explicitly");
  }
  fail(ErrorCode::Argument, "unknown loss kind");
}

LossFamily LossFamily::square(double cap_Y) {
  const LossConstants c = loss_constants(LossKind::Square, cap_Y);
  LossFamily f;
  f.kind_ = LossKind::Square;
  f.name_ = "square";
  f.cap_Y_ = cap_Y;
  f.labels_ = {-cap_Y, cap_Y};
  f.predictions_ = {-cap_Y, cap_Y};
  f.constants_ = c;
  f.curvature_max_ = 1.0;
  return f;
}

LossFamily LossFamily::bounded_logistic(double cap_Y) {
  const LossConstants c = loss_constants(LossKind::BoundedLogistic, cap_Y);
  LossFamily f;
  f.kind_ = LossKind::BoundedLogistic;
  f.name_ = "bounded_logistic";
  f.cap_Y_ = cap_Y;
  f.labels_ = {-1.0, 1.0};
  f.predictions_ = {-cap_Y, cap_Y};
  f.constants_ = c;
  f.curvature_max_ = 0.25;
  return f;
}

LossFamily LossFamily::custom(std::string name, Evaluator evaluator, Interval label_range,
                              Interval prediction_interval, LossConstants constants,
                              double curvature_max) {
  if (!evaluator) fail(ErrorCode::Argument, "custom loss needs an evaluator");
  if (!(constants.rho > 0.0) || !(constants.alpha > 0.0))
    fail(ErrorCode::MissingConstants, "custom loss '" + name + "' needs positive rho and alpha");
  if (!(prediction_interval.hi > prediction_interval.lo))
    fail(ErrorCode::Argument, "custom loss prediction interval has empty interior");
  if (!(label_range.hi >= label_range.lo)) fail(ErrorCode::Argument, "custom loss label range is empty");
  if (!(curvature_max >= constants.alpha))
    fail(ErrorCode::Argument, "custom loss curvature_max must be at least alpha");
  LossFamily f;
  f.kind_ = LossKind::Custom;
  f.name_ = std::move(name);
  f.cap_Y_ = std::max(std::abs(prediction_interval.lo), std::abs(prediction_interval.hi));
  f.labels_ = label_range;
  f.predictions_ = prediction_interval;
  f.constants_ = constants;
  f.curvature_max_ = curvature_max;
  f.custom_ = std::move(evaluator);
  return f;
}

LossFamily make_loss(LossKind kind, double cap_Y) {
  switch (kind) {
    case LossKind::Square: return LossFamily::square(cap_Y);
    case LossKind::BoundedLogistic: return LossFamily::bounded_logistic(cap_Y);
    case LossKind::Custom: break;
  }
  fail(ErrorCode::MissingConstants, "custom loss families must be built with LossFamily::custom");
}

bool LossFamily::valid_label(double y) const noexcept {
  if (kind_ == LossKind::BoundedLogistic) return y == 1.0 || y == -1.0;
  return labels_.contains(y, kPredictionSlack);
}

LossValue LossFamily::eval_unchecked(double y, double z) const {
  switch (kind_) {
    case LossKind::Square: {
      const double r = z - y;
      return {0.5 * r * r, r, 1.0};
    }
    case LossKind::BoundedLogistic: {
      const double t = y * z;
      // log(1 + exp(-t)) without overflow
      const double value = t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
      const double s_neg = logistic_sigmoid(-t);
      return {value, -y * s_neg, s_neg * (1.0 - s_neg)};
    }
    case LossKind::Custom:
      return custom_(y, z);
  }
  return {};
}

LossValue LossFamily::eval(double y, double z) const {
  if (!predictions_.contains(z, kPredictionSlack) || !std::isfinite(z)) {
    std::ostringstream os;
    os.precision(17);
    os << "prediction z = " << z << " lies outside the prediction interval "
       << format_interval(predictions_) << " of the " << name_ << " loss";
    fail(ErrorCode::OutOfRange, os.str());
  }
  if (!valid_label(y)) {
    std::ostringstream os;
    os.precision(17);
    os << "label y = " << y << " is not admissible for the " << name_ << " loss (label range "
       << format_interval(labels_) << ")";
    fail(ErrorCode::OutOfRange, os.str());
  }
  return eval_unchecked(y, z);
}

LossValue loss_eval(const LossFamily& family, double y, double z) { return family.eval(y, z); }

std::vector<double> LossFamily::label_grid(std::size_t count) const {
  if (kind_ == LossKind::BoundedLogistic) return {-1.0, 1.0};
  std::vector<double> out;
  if (count <= 1 || labels_.width() == 0.0) {
    out.push_back(labels_.lo);
    return out;
  }
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(labels_.lo + labels_.width() * static_cast<double>(k) / static_cast<double>(count - 1));
  out.back() = labels_.hi;
  return out;
}

double functional_condition(double rho, double alpha) {
  if (!(rho > 0.0) || !(alpha > 0.0)) {
    std::ostringstream os;
    os << "functional condition needs rho > 0 and alpha > 0 (got rho = " << rho << ", alpha = " << alpha << ")";
    fail(ErrorCode::Argument, os.str());
  }
  return rho * rho / alpha;
}

ExpConcavityReport exp_concavity_margin(const LossFamily& family, std::size_t grid_size,
                                        std::optional<double> alpha_bar) {
  if (grid_size < 100) fail(ErrorCode::Argument, "exp-concavity grid needs at least 100 points per axis");
  ExpConcavityReport report;
  report.alpha_bar = alpha_bar.value_or(family.alpha() / (family.rho() * family.rho()));
  if (!(report.alpha_bar >= 0.0)) fail(ErrorCode::Argument, "alpha_bar must be nonnegative");

  const Interval iv = family.prediction_interval();
  const std::vector<double> labels = family.label_grid(grid_size);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid_size; ++k) {
    double z = iv.lo + iv.width() * static_cast<double>(k) / static_cast<double>(grid_size - 1);
    if (k + 1 == grid_size) z = iv.hi;
    for (double y : labels) {
      const LossValue v = family.eval(y, z);
      margin = std::min(margin, v.second - report.alpha_bar * v.first * v.first);
    }
  }
  report.min_margin = margin;
  report.pass = margin >= -1e-12;
  return report;
}

}  // namespace glmstab
