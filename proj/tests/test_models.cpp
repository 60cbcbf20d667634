#include <doctest.h>

#include <cmath>
#include <numbers>

#include "simplan/models.hpp"
#include "test_support.hpp"

using namespace simplan;
using namespace simplan::test;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("transition density peaks at the displaced state") {
  GaussianTransitionModel model(1.0);
  const Vec2 x(0.5, -0.5), a(1.0, 2.0);
  CHECK(model.density(x + a, x, a) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
  CHECK(model.peak_density() == doctest::Approx(1.0 / kTwoPi));
  // Off-peak is strictly below the peak.
  CHECK(model.density(x + a + Vec2(0.1, 0), x, a) < model.peak_density());
}

TEST_CASE("transition sampling mean matches the displaced state") {
  GaussianTransitionModel model(0.7);
  const Vec2 x(1.0, 2.0), a(-0.5, 0.25);
  RngStream rng(13);
  const int n = 100000;
  Vec2 mean = Vec2::Zero();
  for (int i = 0; i < n; ++i) mean += model.sample(x, a, rng);
  mean /= n;
  const double tol = 4.0 * 0.7 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean.x() - (x + a).x()) < tol);
  CHECK(std::abs(mean.y() - (x + a).y()) < tol);
}

TEST_CASE("observation noise scale saturates at the range floor") {
  BeaconObservationModel model({Vec2(1, 1), Vec2(4, 4)}, 0.1, 1.0);
  CHECK(model.noise_sigma(Vec2(1, 1)) == doctest::Approx(0.1 * 1.0));
  CHECK(model.noise_sigma(Vec2(1, 3)) == doctest::Approx(0.1 * 2.0));
}

TEST_CASE("observation density peaks at the exact displacement") {
  BeaconObservationModel model({Vec2(2, 0)}, 0.2, 0.5);
  const Vec2 x(3.5, 0.0);  // range 1.5 to the beacon
  const double s = 0.2 * 1.5;
  const Vec2 z = x - Vec2(2, 0);
  CHECK(model.density(z, x) == doctest::Approx(1.0 / (kTwoPi * s * s)).epsilon(1e-12));
}

TEST_CASE("observation density at zero innovation decreases with range") {
  BeaconObservationModel model({Vec2(0, 0)}, 0.1, 1.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double r : {1.0, 2.0, 4.0}) {
    const Vec2 x(r, 0.0);
    const double at_peak = model.density(x - Vec2(0, 0), x);
    CHECK(at_peak < previous);
    previous = at_peak;
  }
}

TEST_CASE("observation density is continuous along a ray off the cell border") {
  BeaconObservationModel model({Vec2(0, 0), Vec2(10, 0)}, 0.15, 0.5);
  const Vec2 z(0.3, -0.2);
  // Ray well inside the first beacon's cell.
  for (double t = 0.5; t < 4.0; t += 0.01) {
    const Vec2 x(t, 1.0);
    const Vec2 x_eps(t + 1e-6, 1.0);
    CHECK(std::abs(model.density(z, x) - model.density(z, x_eps)) < 1e-4);
  }
}

TEST_CASE("nearest beacon ties break to the lowest index") {
  BeaconObservationModel model({Vec2(-1, 0), Vec2(1, 0)}, 0.1, 1.0);
  CHECK(model.nearest_beacon(Vec2(0, 0)) == 0);
  CHECK(model.nearest_beacon(Vec2(0.5, 0)) == 1);
}

TEST_CASE("peak constants dominate a brute-force grid scan") {
  GaussianTransitionModel transition(0.8);
  BeaconObservationModel observation({Vec2(1, 1)}, 0.1, 1.0);
  const auto peaks = model_peak_constants(transition, observation);
  CHECK(peaks.transition == doctest::Approx(1.0 / (kTwoPi * 0.64)));
  CHECK(peaks.observation == doctest::Approx(1.0 / (kTwoPi * 0.01)));

  double max_transition = 0.0;
  double max_observation = 0.0;
  const Vec2 x(0.2, -0.3), a(0.5, 0.5);
  for (double dx = -2.0; dx <= 2.0; dx += 0.05) {
    for (double dy = -2.0; dy <= 2.0; dy += 0.05) {
      max_transition =
          std::max(max_transition, transition.density(x + a + Vec2(dx, dy), x, a));
      const Vec2 agent = Vec2(1, 1) + Vec2(dx, dy);
      max_observation = std::max(
          max_observation, observation.density(agent - Vec2(1, 1), agent));
    }
  }
  CHECK(max_transition <= peaks.transition + 1e-12);
  CHECK(max_observation <= peaks.observation + 1e-12);
}

TEST_CASE("densities never exceed their peak constants (randomized)") {
  GaussianTransitionModel transition(0.3);
  BeaconObservationModel observation({Vec2(0, 0), Vec2(3, 2)}, 0.2, 0.7);
  RngStream rng(91);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 x(8 * rng.uniform() - 4, 8 * rng.uniform() - 4);
    const Vec2 y(8 * rng.uniform() - 4, 8 * rng.uniform() - 4);
    const Vec2 a(rng.gaussian(), rng.gaussian());
    CHECK(transition.density(y, x, a) <= transition.peak_density() + 1e-15);
    CHECK(observation.density(y, x) <= observation.peak_density() + 1e-15);
  }
}

TEST_CASE("expected distance to goal") {
  ParticleBelief point;
  point.particles = {Vec2(2, 3)};
  point.weights = {1.0};
  CHECK(expected_distance_to_goal(point, Vec2(2, 3)) == 0.0);

  ParticleBelief pair;
  pair.particles = {Vec2(1, 1), Vec2(2, 2)};  // L1 distances 2 and 4 from origin
  pair.weights = {0.5, 0.5};
  CHECK(expected_distance_to_goal(pair, Vec2(0, 0)) == doctest::Approx(3.0));

  WorldFixture world;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto instance = random_instance(world, seed, 30);
    const Vec2 goal(4.0, 0.5);
    CHECK(expected_distance_to_goal(instance.next, goal) ==
          doctest::Approx(reference_expected_distance(instance.next, goal))
              .epsilon(1e-12));
  }
}

TEST_CASE("kalman predict doubles an identity covariance for unit noise") {
  GaussianTransitionModel transition(1.0);
  GaussianState state{Vec2(0, 0), Mat2::Identity()};
  const auto predicted = kalman_predict(state, Vec2(1, 0), transition);
  CHECK(same_vec(predicted.mean, Vec2(1, 0)));
  CHECK(predicted.covariance(0, 0) == doctest::Approx(2.0));
  CHECK(predicted.covariance(1, 1) == doctest::Approx(2.0));
  CHECK(predicted.covariance(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("kalman posterior collapses toward the measurement as noise vanishes") {
  GaussianTransitionModel transition(1e-6);
  BeaconObservationModel observation({Vec2(5, 5)}, 1e-6, 1.0);
  GaussianState state{Vec2(0, 0), Mat2::Identity()};
  const Vec2 z(1.5, -0.5);  // implies agent at beacon + z
  const auto posterior = kalman_step(state, Vec2(0.5, 0.5), z, transition, observation);
  CHECK((posterior.mean - (Vec2(5, 5) + z)).norm() < 1e-3);
  CHECK(posterior.covariance(0, 0) < 1e-3);
}

TEST_CASE("kalman filter tracks ground truth within the 3-sigma envelope") {
  // Linear regime so the filter is exact: constant observation noise.
  GaussianTransitionModel transition(0.3);
  BeaconObservationModel observation({Vec2(0, 0)}, 0.002, 100.0);
  ModelSet models(transition, observation);
  const Vec2 action(0.4, 0.2);

  int inside = 0;
  int total = 0;
  for (std::uint64_t run = 0; run < 500; ++run) {
    RngStream rng(run);
    RngStream prior_rng = rng.substream("prior");
    Vec2 truth(1.0 + 0.5 * prior_rng.gaussian(), 1.0 + 0.5 * prior_rng.gaussian());
    GaussianState state{Vec2(1, 1), 0.25 * Mat2::Identity()};
    RngStream sim = rng.substream("sim");
    for (int step = 0; step < 10; ++step) {
      truth = models.sample_transition(truth, action, sim);
      const Vec2 z = models.sample_observation(truth, sim);
      state = kalman_step(state, action, z, transition, observation);
      for (int k = 0; k < 2; ++k) {
        ++total;
        if (std::abs(state.mean[k] - truth[k]) <=
            3.0 * std::sqrt(state.covariance(k, k)))
          ++inside;
      }
    }
  }
  CHECK(static_cast<double>(inside) / total >= 0.95);
}

TEST_CASE("kalman posterior agrees with a large particle filter") {
  GaussianTransitionModel transition(0.3);
  BeaconObservationModel observation({Vec2(0, 0)}, 0.002, 100.0);
  ModelSet models(transition, observation);

  const Vec2 center(1.0, -0.5);
  const double prior_sigma = 0.4;
  const Vec2 action(0.3, 0.6);
  const int n = 20000;

  RngStream rng(2024);
  RngStream sim = rng.substream("sim");
  const Vec2 truth = models.sample_transition(center, action, sim);
  const Vec2 z = models.sample_observation(truth, sim);

  GaussianState kf{center, prior_sigma * prior_sigma * Mat2::Identity()};
  kf = kalman_step(kf, action, z, transition, observation);

  RngStream prior_rng = rng.substream("prior");
  auto belief = sample_gaussian_belief(center, prior_sigma, n, prior_rng);
  RngStream filter_rng = rng.substream("filter");
  const auto posterior =
      propagate_and_reweight(belief, action, z, models, filter_rng);

  const Vec2 pf_mean = posterior.mean();
  Mat2 pf_cov = Mat2::Zero();
  for (int i = 0; i < posterior.size(); ++i) {
    const Vec2 d = posterior.particles[i] - pf_mean;
    pf_cov += posterior.weights[i] * d * d.transpose();
  }

  const double sigma_post = std::sqrt(kf.covariance(0, 0));
  const double mean_tol = 4.0 * sigma_post / std::sqrt(static_cast<double>(n) / 4.0);
  CHECK((pf_mean - kf.mean).norm() < mean_tol);
  CHECK(std::abs(pf_cov(0, 0) - kf.covariance(0, 0)) < 0.1 * kf.covariance(0, 0));
  CHECK(std::abs(pf_cov(1, 1) - kf.covariance(1, 1)) < 0.1 * kf.covariance(1, 1));
}

TEST_CASE("gaussian entropy closed form") {
  GaussianState unit{Vec2(0, 0), Mat2::Identity()};
  const double expected = std::log(kTwoPi * std::numbers::e);
  CHECK(gaussian_entropy(unit) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(gaussian_entropy(unit) == doctest::Approx(2.83787707).epsilon(1e-7));

  GaussianState scaled{Vec2(0, 0), 4.0 * Mat2::Identity()};
  CHECK(gaussian_entropy(scaled) ==
        doctest::Approx(expected + std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("gaussian entropy matches grid quadrature") {
  GaussianState state{Vec2(0.5, -1.0), Mat2::Zero()};
  state.covariance << 0.8, 0.2, 0.2, 1.1;

  const double h = 0.02;
  double integral = 0.0;
  const Mat2 inv = state.covariance.inverse();
  const double norm = 1.0 / (kTwoPi * std::sqrt(state.covariance.determinant()));
  for (double x = -10.0; x <= 11.0; x += h) {
    for (double y = -10.0; y <= 11.0; y += h) {
      const Vec2 d = Vec2(x, y) - state.mean;
      const double p = norm * std::exp(-0.5 * d.dot(inv * d));
      if (p > 1e-300) integral -= p * std::log(p) * h * h;
    }
  }
  CHECK(gaussian_entropy(state) == doctest::Approx(integral).epsilon(1e-3));
}

TEST_CASE("gaussian entropy rejects invalid covariances") {
  GaussianState asym{Vec2(0, 0), Mat2::Zero()};
  asym.covariance << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(gaussian_entropy(asym), std::invalid_argument);

  GaussianState indefinite{Vec2(0, 0), Mat2::Zero()};
  indefinite.covariance << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(gaussian_entropy(indefinite), std::invalid_argument);
}
