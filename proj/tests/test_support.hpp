#pragma once

// Shared fixtures and independent reference implementations. The reference
// code here is written straight from the defining formulas with plain loops,
// so it stays decoupled from the library's evaluation paths.

#include <cmath>
#include <functional>
#include <vector>

#include "simplan/belief.hpp"
#include "simplan/models.hpp"
#include "simplan/rng.hpp"

namespace simplan::test {

inline bool same_vec(const Vec2& a, const Vec2& b) {
  return a.x() == b.x() && a.y() == b.y();
}

// ---------------------------------------------------------------------------
// Stub models with injectable densities.

class StubTransition final : public TransitionModel {
 public:
  std::function<double(const Vec2&, const Vec2&, const Vec2&)> density_fn;
  double peak = 1.0;

  Vec2 sample(const Vec2& x, const Vec2& action, RngStream&) const override {
    return x + action;
  }
  double density(const Vec2& x_next, const Vec2& x,
                 const Vec2& action) const override {
    return density_fn ? density_fn(x_next, x, action) : peak;
  }
  double peak_density() const override { return peak; }
};

class StubObservation final : public ObservationModel {
 public:
  std::function<double(const Vec2&, const Vec2&)> density_fn;
  double peak = 1.0;

  Vec2 sample(const Vec2& x, RngStream&) const override { return x; }
  double density(const Vec2& z, const Vec2& x) const override {
    return density_fn ? density_fn(z, x) : peak;
  }
  double peak_density() const override { return peak; }
};

// ---------------------------------------------------------------------------
// Beacon-world fixture shared by the randomized suites.

struct WorldFixture {
  GaussianTransitionModel transition{0.2};
  BeaconObservationModel observation{
      std::vector<Vec2>{Vec2(2.0, 1.0), Vec2(4.0, -1.0)}, 0.15, 0.5};
  ModelSet models{transition, observation};
};

struct TransitionInstance {
  ParticleBelief prev;
  ParticleBelief next;
  Vec2 action;
  Vec2 observation;
};

/// Random ancestrally-aligned belief pair: random prior (optionally with
/// non-uniform weights), one filter step against an observation sampled from
/// a random true state.
inline TransitionInstance random_instance(const WorldFixture& world,
                                          std::uint64_t seed, int n,
                                          bool uniform_weights = false) {
  RngStream rng(seed);
  RngStream prior_rng = rng.substream("prior");
  const Vec2 center(1.0 + 3.0 * rng.uniform(), -1.0 + 3.0 * rng.uniform());

  TransitionInstance instance;
  instance.prev = sample_gaussian_belief(center, 0.8, n, prior_rng);
  if (!uniform_weights) {
    double total = 0.0;
    for (double& w : instance.prev.weights) {
      w = 0.05 + rng.uniform();
      total += w;
    }
    for (double& w : instance.prev.weights) w /= total;
  }

  const double angle = 2.0 * 3.14159265358979323846 * rng.uniform();
  instance.action = Vec2(std::cos(angle), std::sin(angle));

  RngStream sim_rng = rng.substream("sim");
  const Vec2 true_state =
      world.models.sample_transition(center, instance.action, sim_rng);
  instance.observation = world.models.sample_observation(true_state, sim_rng);

  RngStream filter_rng = rng.substream("filter");
  instance.next =
      propagate_and_reweight(instance.prev, instance.action,
                             instance.observation, world.models, filter_rng,
                             1e-300);
  return instance;
}

// ---------------------------------------------------------------------------
// Reference evaluations (plain-loop oracles).

inline double ref_log(double x) { return std::log(std::max(x, 1e-300)); }

/// Two-term estimator evaluated directly from its formula.
inline double reference_entropy(const ParticleBelief& prev,
                                const ParticleBelief& next, const Vec2& action,
                                const Vec2& z, const TransitionModel& trans,
                                const ObservationModel& obs) {
  const int n = prev.size();
  double evidence = 0.0;
  for (int i = 0; i < n; ++i)
    evidence += obs.density(z, next.particles[i]) * prev.weights[i];

  double mixture = 0.0;
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j = 0; j < n; ++j)
      inner += trans.density(next.particles[i], prev.particles[j], action) *
               prev.weights[j];
    mixture +=
        next.weights[i] * ref_log(obs.density(z, next.particles[i]) * inner);
  }
  return ref_log(evidence) - mixture;
}

/// The two estimator terms separately (same clamping convention).
inline double reference_term_a(const ParticleBelief& prev,
                               const ParticleBelief& next, const Vec2& z,
                               const ObservationModel& obs) {
  double evidence = 0.0;
  for (int i = 0; i < prev.size(); ++i)
    evidence += obs.density(z, next.particles[i]) * prev.weights[i];
  return ref_log(evidence);
}

inline double reference_term_b(const ParticleBelief& prev,
                               const ParticleBelief& next, const Vec2& action,
                               const Vec2& z, const TransitionModel& trans,
                               const ObservationModel& obs) {
  const int n = prev.size();
  double mixture = 0.0;
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j = 0; j < n; ++j)
      inner += trans.density(next.particles[i], prev.particles[j], action) *
               prev.weights[j];
    mixture +=
        next.weights[i] * ref_log(obs.density(z, next.particles[i]) * inner);
  }
  return -mixture;
}

inline double reference_expected_distance(const ParticleBelief& belief,
                                          const Vec2& goal) {
  double total = 0.0;
  for (int i = 0; i < belief.size(); ++i) {
    total += belief.weights[i] * (std::abs(belief.particles[i].x() - goal.x()) +
                                  std::abs(belief.particles[i].y() - goal.y()));
  }
  return total;
}

}  // namespace simplan::test
