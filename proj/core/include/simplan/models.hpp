#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "simplan/belief.hpp"
#include "simplan/rng.hpp"

namespace simplan {

using Mat2 = Eigen::Matrix2d;

class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual Vec2 sample(const Vec2& x, const Vec2& action, RngStream& rng) const = 0;
  virtual double density(const Vec2& x_next, const Vec2& x, const Vec2& action) const = 0;
  /// Supremum of the density over all arguments.
  virtual double peak_density() const = 0;
};

class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual Vec2 sample(const Vec2& x, RngStream& rng) const = 0;
  virtual double density(const Vec2& z, const Vec2& x) const = 0;
  virtual double peak_density() const = 0;
};

/// x' = x + a + N(0, sigma^2 I).
class GaussianTransitionModel final : public TransitionModel {
 public:
  explicit GaussianTransitionModel(double sigma);

  Vec2 sample(const Vec2& x, const Vec2& action, RngStream& rng) const override;
  double density(const Vec2& x_next, const Vec2& x, const Vec2& action) const override;
  double peak_density() const override;

  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Relative-displacement observation of the nearest beacon,
/// z = x - b* + N(0, s(x)^2 I) with s(x) = sigma * max(r, range_floor),
/// where b* is the nearest beacon (ties go to the lowest index) and r is the
/// distance to it. Noise grows with range; the peak density is attained at
/// r <= range_floor.
class BeaconObservationModel final : public ObservationModel {
 public:
  BeaconObservationModel(std::vector<Vec2> beacons, double sigma,
                         double range_floor);

  Vec2 sample(const Vec2& x, RngStream& rng) const override;
  double density(const Vec2& z, const Vec2& x) const override;
  double peak_density() const override;

  int nearest_beacon(const Vec2& x) const;
  double noise_sigma(const Vec2& x) const;
  const std::vector<Vec2>& beacons() const { return beacons_; }
  double sigma() const { return sigma_; }
  double range_floor() const { return range_floor_; }

 private:
  std::vector<Vec2> beacons_;
  double sigma_;
  double range_floor_;
};

/// Density-evaluation tallies. The planners report these so speedup claims
/// can be verified without relying on wall time.
struct DensityCounters {
  std::uint64_t transition = 0;
  std::uint64_t observation = 0;

  std::uint64_t total() const { return transition + observation; }
};

/// Transition + observation model pair with an optional counter attached.
/// Density evaluations are counted; sampling is not.
class ModelSet {
 public:
  ModelSet(const TransitionModel& transition, const ObservationModel& observation,
           DensityCounters* counters = nullptr)
      : transition_(&transition), observation_(&observation), counters_(counters) {}

  double transition_density(const Vec2& x_next, const Vec2& x, const Vec2& action) const {
    if (counters_) ++counters_->transition;
    return transition_->density(x_next, x, action);
  }
  double observation_density(const Vec2& z, const Vec2& x) const {
    if (counters_) ++counters_->observation;
    return observation_->density(z, x);
  }
  Vec2 sample_transition(const Vec2& x, const Vec2& action, RngStream& rng) const {
    return transition_->sample(x, action, rng);
  }
  Vec2 sample_observation(const Vec2& x, RngStream& rng) const {
    return observation_->sample(x, rng);
  }

  double transition_peak() const { return transition_->peak_density(); }
  double observation_peak() const { return observation_->peak_density(); }

  ModelSet with_counters(DensityCounters* counters) const {
    return ModelSet(*transition_, *observation_, counters);
  }

  const TransitionModel& transition() const { return *transition_; }
  const ObservationModel& observation() const { return *observation_; }
  DensityCounters* counters() const { return counters_; }

 private:
  const TransitionModel* transition_;
  const ObservationModel* observation_;
  DensityCounters* counters_;
};

struct PeakConstants {
  double transition;   // sup over the transition density
  double observation;  // sup over the observation density
};
PeakConstants model_peak_constants(const TransitionModel& transition,
                                   const ObservationModel& observation);

/// Sum of w_i * |x_i - goal|_1.
double expected_distance_to_goal(const ParticleBelief& belief, const Vec2& goal);

struct GaussianState {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

/// Predict step: mean shifts by the action, covariance grows by sigma^2 I.
GaussianState kalman_predict(const GaussianState& state, const Vec2& action,
                             const GaussianTransitionModel& transition);

/// Update step against the displacement observation. The range-dependent
/// noise is frozen at the predicted mean's range so the posterior stays
/// exactly Gaussian.
GaussianState kalman_update(const GaussianState& state, const Vec2& z,
                            const BeaconObservationModel& observation);

GaussianState kalman_step(const GaussianState& state, const Vec2& action,
                          const Vec2& z, const GaussianTransitionModel& transition,
                          const BeaconObservationModel& observation);

/// 0.5 * log((2 pi e)^d det(cov)). Throws on a non-SPD covariance.
double gaussian_entropy(const GaussianState& state);

/// Scenario description for the 2-D beacon world. Values come from config
/// files; the library hard-codes none of them.
struct BeaconWorldConfig {
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  double prior_sigma = 1.0;
  double sigma_transition = 0.1;
  double sigma_observation = 0.1;
  double range_floor = 1.0;
  std::vector<Vec2> beacons;
  std::vector<Vec2> actions;
  std::vector<std::string> action_names;
  double step_length = 1.0;
  int horizon = 1;
  int particles = 100;
  int obs_branching = 1;
  std::uint64_t seed = 0;
};

}  // namespace simplan
