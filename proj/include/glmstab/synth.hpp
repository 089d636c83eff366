#ifndef GLMSTAB_SYNTH_HPP
#define GLMSTAB_SYNTH_HPP

#include <cstdint>
#include <optional>

#include "glmstab/dataset.hpp"
#include "glmstab/domain.hpp"
#include "glmstab/loss.hpp"
#include "glmstab/rng.hpp"

namespace glmstab {

// A distribution D over instance x label pairs, plus the learning problem
// posed on it (loss family and constraint set).
class Sampler {
 public:
  virtual ~Sampler() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual LossFamily family() const = 0;
  virtual Domain domain() const = 0;
  // Label cap recorded on sampled datasets.
  virtual double dataset_cap() const = 0;
  // sup over the instance set of |w^T x|.
  virtual double max_abs_prediction(const Vector& w) const = 0;
  // Fills x (length dimension()) and y from the stream.
  virtual void draw(Stream& stream, Vector& x, double& y) const = 0;

  // n i.i.d. pairs from one stream keyed by seed, in index order.
  Dataset sample(Eigen::Index n, std::uint64_t seed) const;
};

struct DistributionSpec {
  Eigen::Index d = 0;
  Vector spectrum;           // descending, positive: shape of E[x x^T]
  Vector w_star_direction;   // unit vector
  double w_star_norm = 0.0;  // |w*|_2
  double noise_sigma = 0.0;
  double cap_Y = 1.0;
  InstanceNorm instance_norm = InstanceNorm::L2;
  double instance_radius = 1.0;
  LossKind family_kind = LossKind::Square;
  // Haar rotation U applied to the instances; identity when absent.
  std::optional<std::uint64_t> rotation_seed;

  // Throws Spec on malformed fields or when |w*^T x| can exceed cap_Y.
  void validate() const;
  Vector w_star() const;
  Matrix rotation() const;
  // Population second moment E[x x^T] = R^2 / (s_max d) U diag(s) U^T.
  Matrix second_moment() const;
};

// x = R U diag(sqrt(s / s_max)) g with g uniform on the unit sphere, so
// |x|_2 <= R always. Square loss: y = clamp(w*^T x + sigma N(0,1), -Y, Y).
// Logistic loss: y = +1 if w*^T x + sigma N(0,1) >= 0 else -1.
// Per sample the stream yields d normals for g, then one normal for noise.
class SyntheticDistribution final : public Sampler {
 public:
  explicit SyntheticDistribution(DistributionSpec spec);

  const DistributionSpec& spec() const noexcept { return spec_; }
  Eigen::Index dimension() const override { return spec_.d; }
  LossFamily family() const override;
  Domain domain() const override;
  double dataset_cap() const override;
  double max_abs_prediction(const Vector& w) const override;
  void draw(Stream& stream, Vector& x, double& y) const override;

 private:
  DistributionSpec spec_;
  Matrix transform_;  // R U diag(sqrt(s / s_max))
  Vector w_star_;
};

Dataset synth_regression(const DistributionSpec& spec, Eigen::Index n, std::uint64_t seed);

// Uniformly random rotation (QR of a Gaussian matrix with sign fix).
Matrix haar_rotation(Eigen::Index d, std::uint64_t seed);

// Q diag(lambda) Q^T with Q = haar_rotation(d, seed') and eigenvalues
// log-spaced at random in [1, condition]; the extremes are pinned so the
// condition number is exactly `condition` when d >= 2.
Matrix random_spd(Eigen::Index d, double condition, std::uint64_t seed);

struct RiskEstimate {
  double risk = 0.0;
  double standard_error = 0.0;
};

inline constexpr std::size_t kDefaultTestSize = 100000;

// Fresh-sample Monte Carlo estimate of L(w) = E phi_y(w^T x). Requires
// m_test >= 1000 and sup |w^T x| over the instance set within the loss's
// prediction interval.
RiskEstimate estimate_risk(const Sampler& sampler, const LossFamily& family, const Vector& w, std::size_t m_test,
                           std::uint64_t seed);
RiskEstimate estimate_risk(const DistributionSpec& spec, const LossFamily& family, const Vector& w,
                           std::size_t m_test, std::uint64_t seed);

// L(w) and L(w) - L(w_ref) estimated on one shared test sample; the
// difference's standard error is that of the paired per-point differences.
struct PairedRiskEstimate {
  RiskEstimate risk;
  RiskEstimate difference;
};
PairedRiskEstimate estimate_risk_paired(const Sampler& sampler, const LossFamily& family, const Vector& w,
                                        const Vector& w_ref, std::size_t m_test, std::uint64_t seed);

}  // namespace glmstab

#endif  // GLMSTAB_SYNTH_HPP
