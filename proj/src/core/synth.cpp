#include "glmstab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glmstab/error.hpp"

namespace glmstab {

namespace {

void check_feasible(const Sampler& sampler, const LossFamily& family, const Vector& w) {
  const double sup = sampler.max_abs_prediction(w);
  const Interval iv = family.prediction_interval();
  const double cap = std::min(-iv.lo, iv.hi);
  if (sup > cap * (1.0 + 1e-12) + kPredictionSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "predictor reaches |w^T x| = " << sup << " on the instance set, beyond the prediction interval [" << iv.lo
       << ", " << iv.hi << "]";
    fail(ErrorCode::InfeasiblePrediction, os.str());
  }
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

// Running mean and sum of squared deviations, accumulated in index order.
class Welford {
 public:
  void add(double v) {
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }
  Moments finish() const {
    Moments m{mean_, 0.0};
    if (count_ > 1) m.se = std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_));
    return m;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

Dataset Sampler::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 2) fail(ErrorCode::Argument, "sample size must be at least 2");
  Stream stream(seed);
  const Eigen::Index d = dimension();
  Matrix X(n, d);
  Vector y(n);
  Vector x(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    double label = 0.0;
    draw(stream, x, label);
    X.row(i) = x.transpose();
    y(i) = label;
  }
  return Dataset(std::move(X), std::move(y), dataset_cap());
}

void DistributionSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::Spec, what); };
  if (d < 1) bad("d must be at least 1");
  if (spectrum.size() != d) bad("spectrum must have d entries");
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(spectrum(k) > 0.0) || !std::isfinite(spectrum(k))) bad("spectrum entries must be positive and finite");
    if (k > 0 && spectrum(k) > spectrum(k - 1)) bad("spectrum must be sorted in descending order");
  }
  if (w_star_direction.size() != d) bad("w_star_direction must have d entries");
  if (!w_star_direction.allFinite() || std::abs(w_star_direction.norm() - 1.0) > 1e-9)
    bad("w_star_direction must be a unit vector");
  if (!(w_star_norm >= 0.0) || !std::isfinite(w_star_norm)) bad("w_star_norm must be nonnegative");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) bad("noise_sigma must be nonnegative");
  if (!(cap_Y > 0.0) || !std::isfinite(cap_Y)) bad("cap_Y must be positive");
  if (!(instance_radius > 0.0) || !std::isfinite(instance_radius)) bad("instance_radius must be positive");
  if (family_kind == LossKind::Custom) bad("synthetic distributions support the square and bounded_logistic losses");

  const double dual = instance_norm == InstanceNorm::L2 ? w_star_direction.norm() : w_star_direction.lpNorm<1>();
  const double reach = instance_radius * w_star_norm * dual;
  if (reach > cap_Y) {
    std::ostringstream os;
    os.precision(6);
    os << "w* reaches |w*^T x| = " << reach << " > cap_Y = " << cap_Y
       << " over the instance set; use a smaller w* scale (w_star_norm <= " << cap_Y / (instance_radius * dual) << ")";
    bad(os.str());
  }
}

Vector DistributionSpec::w_star() const { return w_star_norm * w_star_direction; }

Matrix haar_rotation(Eigen::Index d, std::uint64_t seed) {
  Stream stream(seed);
  Matrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = stream.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k)
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  return q;
}

Matrix random_spd(Eigen::Index d, double condition, std::uint64_t seed) {
  if (d < 1) fail(ErrorCode::Argument, "random_spd needs d >= 1");
  if (!(condition >= 1.0) || !std::isfinite(condition))
    fail(ErrorCode::Argument, "random_spd needs a finite condition number >= 1");
  Stream stream(seed);
  const double log_c = std::log(condition);
  Vector lambda(d);
  for (Eigen::Index k = 0; k < d; ++k) lambda(k) = std::exp(log_c * stream.uniform01());
  lambda(0) = 1.0;
  if (d >= 2) lambda(d - 1) = condition;
  const Matrix Q = haar_rotation(d, stream.child(0).key());
  Matrix P = Q * lambda.asDiagonal() * Q.transpose();
  return 0.5 * (P + P.transpose());
}

Matrix DistributionSpec::rotation() const {
  return rotation_seed ? haar_rotation(d, *rotation_seed) : Matrix::Identity(d, d);
}

Matrix DistributionSpec::second_moment() const {
  const Matrix U = rotation();
  const Vector scaled = spectrum / spectrum(0);
  return (instance_radius * instance_radius / static_cast<double>(d)) * U * scaled.asDiagonal() * U.transpose();
}

SyntheticDistribution::SyntheticDistribution(DistributionSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const Vector shape = (spec_.spectrum / spec_.spectrum(0)).cwiseSqrt();
  transform_ = spec_.instance_radius * spec_.rotation() * shape.asDiagonal();
  w_star_ = spec_.w_star();
}

LossFamily SyntheticDistribution::family() const { return make_loss(spec_.family_kind, spec_.cap_Y); }

Domain SyntheticDistribution::domain() const {
  return dual_domain(spec_.instance_norm, spec_.cap_Y, spec_.instance_radius);
}

double SyntheticDistribution::dataset_cap() const {
  return spec_.family_kind == LossKind::BoundedLogistic ? std::max(spec_.cap_Y, 1.0) : spec_.cap_Y;
}

double SyntheticDistribution::max_abs_prediction(const Vector& w) const {
  const double dual = spec_.instance_norm == InstanceNorm::L2 ? w.norm() : w.lpNorm<1>();
  return spec_.instance_radius * dual;
}

void SyntheticDistribution::draw(Stream& stream, Vector& x, double& y) const {
  Vector g(spec_.d);
  for (Eigen::Index k = 0; k < spec_.d; ++k) g(k) = stream.normal();
  const double norm = g.norm();
  if (norm > 0.0) g /= norm;
  x = transform_ * g;
  const double reach = x.norm();
  if (reach > spec_.instance_radius) x *= spec_.instance_radius / reach;
  const double noise = stream.normal();
  const double signal = w_star_.dot(x) + spec_.noise_sigma * noise;
  if (spec_.family_kind == LossKind::BoundedLogistic) {
    y = signal >= 0.0 ? 1.0 : -1.0;
  } else {
    y = std::clamp(signal, -spec_.cap_Y, spec_.cap_Y);
  }
}

Dataset synth_regression(const DistributionSpec& spec, Eigen::Index n, std::uint64_t seed) {
  return SyntheticDistribution(spec).sample(n, seed);
}

RiskEstimate estimate_risk(const Sampler& sampler, const LossFamily& family, const Vector& w, std::size_t m_test,
                           std::uint64_t seed) {
  if (m_test < 1000) fail(ErrorCode::Argument, "risk estimation needs m_test >= 1000");
  if (w.size() != sampler.dimension()) fail(ErrorCode::Argument, "predictor dimension does not match the distribution");
  check_feasible(sampler, family, w);
  Stream stream(seed);
  Vector x(sampler.dimension());
  Welford acc;
  for (std::size_t j = 0; j < m_test; ++j) {
    double y = 0.0;
    sampler.draw(stream, x, y);
    acc.add(family.eval(y, x.dot(w)).value);
  }
  const Moments m = acc.finish();
  return {m.mean, m.se};
}

RiskEstimate estimate_risk(const DistributionSpec& spec, const LossFamily& family, const Vector& w,
                           std::size_t m_test, std::uint64_t seed) {
  return estimate_risk(SyntheticDistribution(spec), family, w, m_test, seed);
}

PairedRiskEstimate estimate_risk_paired(const Sampler& sampler, const LossFamily& family, const Vector& w,
                                        const Vector& w_ref, std::size_t m_test, std::uint64_t seed) {
  if (m_test < 1000) fail(ErrorCode::Argument, "risk estimation needs m_test >= 1000");
  if (w.size() != sampler.dimension() || w_ref.size() != sampler.dimension())
    fail(ErrorCode::Argument, "predictor dimension does not match the distribution");
  check_feasible(sampler, family, w);
  check_feasible(sampler, family, w_ref);
  Stream stream(seed);
  Vector x(sampler.dimension());
  Welford risk;
  Welford diff;
  for (std::size_t j = 0; j < m_test; ++j) {
    double y = 0.0;
    sampler.draw(stream, x, y);
    const double a = family.eval(y, x.dot(w)).value;
    const double b = family.eval(y, x.dot(w_ref)).value;
    risk.add(a);
    diff.add(a - b);
  }
  const Moments r = risk.finish();
  const Moments dd = diff.finish();
  return {{r.mean, r.se}, {dd.mean, dd.se}};
}

}  // namespace glmstab
