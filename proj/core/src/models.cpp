#include "simplan/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace simplan {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Isotropic 2-D Gaussian density with standard deviation sigma per axis.
double isotropic_gaussian_density(const Vec2& diff, double sigma) {
  const double var = sigma * sigma;
  return std::exp(-0.5 * diff.squaredNorm() / var) / (kTwoPi * var);
}

}  // namespace

GaussianTransitionModel::GaussianTransitionModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("transition sigma must be > 0");
}

Vec2 GaussianTransitionModel::sample(const Vec2& x, const Vec2& action,
                                     RngStream& rng) const {
  return Vec2(x.x() + action.x() + sigma_ * rng.gaussian(),
              x.y() + action.y() + sigma_ * rng.gaussian());
}

double GaussianTransitionModel::density(const Vec2& x_next, const Vec2& x,
                                        const Vec2& action) const {
  return isotropic_gaussian_density(x_next - (x + action), sigma_);
}

double GaussianTransitionModel::peak_density() const {
  return 1.0 / (kTwoPi * sigma_ * sigma_);
}

BeaconObservationModel::BeaconObservationModel(std::vector<Vec2> beacons,
                                               double sigma, double range_floor)
    : beacons_(std::move(beacons)), sigma_(sigma), range_floor_(range_floor) {
  if (beacons_.empty()) throw std::invalid_argument("at least one beacon required");
  if (!(sigma > 0.0)) throw std::invalid_argument("observation sigma must be > 0");
  if (!(range_floor > 0.0)) throw std::invalid_argument("range floor must be > 0");
}

int BeaconObservationModel::nearest_beacon(const Vec2& x) const {
  int best = 0;
  double best_sq = (x - beacons_[0]).squaredNorm();
  for (int i = 1; i < static_cast<int>(beacons_.size()); ++i) {
    const double sq = (x - beacons_[i]).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return best;
}

double BeaconObservationModel::noise_sigma(const Vec2& x) const {
  const double r = (x - beacons_[nearest_beacon(x)]).norm();
  return sigma_ * std::max(r, range_floor_);
}

Vec2 BeaconObservationModel::sample(const Vec2& x, RngStream& rng) const {
  const Vec2 offset = x - beacons_[nearest_beacon(x)];
  const double s = noise_sigma(x);
  return Vec2(offset.x() + s * rng.gaussian(), offset.y() + s * rng.gaussian());
}

double BeaconObservationModel::density(const Vec2& z, const Vec2& x) const {
  const Vec2 offset = x - beacons_[nearest_beacon(x)];
  return isotropic_gaussian_density(z - offset, noise_sigma(x));
}

double BeaconObservationModel::peak_density() const {
  const double s = sigma_ * range_floor_;
  return 1.0 / (kTwoPi * s * s);
}

PeakConstants model_peak_constants(const TransitionModel& transition,
                                   const ObservationModel& observation) {
  return {transition.peak_density(), observation.peak_density()};
}

double expected_distance_to_goal(const ParticleBelief& belief, const Vec2& goal) {
  double total = 0.0;
  for (int i = 0; i < belief.size(); ++i)
    total += belief.weights[i] * (belief.particles[i] - goal).lpNorm<1>();
  return total;
}

GaussianState kalman_predict(const GaussianState& state, const Vec2& action,
                             const GaussianTransitionModel& transition) {
  GaussianState out;
  out.mean = state.mean + action;
  const double var = transition.sigma() * transition.sigma();
  out.covariance = state.covariance + var * Mat2::Identity();
  return out;
}

GaussianState kalman_update(const GaussianState& state, const Vec2& z,
                            const BeaconObservationModel& observation) {
  const Vec2 beacon =
      observation.beacons()[observation.nearest_beacon(state.mean)];
  const double s = observation.noise_sigma(state.mean);
  const Mat2 noise = s * s * Mat2::Identity();

  const Vec2 innovation = z - (state.mean - beacon);
  const Mat2 innovation_cov = state.covariance + noise;
  const Mat2 gain = state.covariance * innovation_cov.inverse();

  GaussianState out;
  out.mean = state.mean + gain * innovation;
  out.covariance = (Mat2::Identity() - gain) * state.covariance;
  // Guard symmetry against round-off before downstream SPD checks.
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

GaussianState kalman_step(const GaussianState& state, const Vec2& action,
                          const Vec2& z, const GaussianTransitionModel& transition,
                          const BeaconObservationModel& observation) {
  return kalman_update(kalman_predict(state, action, transition), z, observation);
}

double gaussian_entropy(const GaussianState& state) {
  const Mat2& cov = state.covariance;
  if (std::abs(cov(0, 1) - cov(1, 0)) > 1e-9)
    throw std::invalid_argument("covariance must be symmetric");
  const double det = cov.determinant();
  if (!(det > 0.0) || !(cov(0, 0) > 0.0))
    throw std::invalid_argument("covariance must be positive definite");
  return 0.5 * std::log(std::pow(kTwoPi * std::numbers::e, 2) * det);
}

}  // namespace simplan
