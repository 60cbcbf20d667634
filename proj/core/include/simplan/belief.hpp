#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "simplan/rng.hpp"

namespace simplan {

using Vec2 = Eigen::Vector2d;
inline constexpr int kStateDim = 2;

class ModelSet;

/// Raised when a reweighting step leaves the belief with zero total mass,
/// i.e. the observation is incompatible with every particle.
struct DegenerateBeliefError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Weighted particle set over 2-D states. Every operation that returns a
/// belief leaves the weights normalized to unit mass.
struct ParticleBelief {
  std::vector<Vec2> particles;
  std::vector<double> weights;

  int size() const { return static_cast<int>(particles.size()); }
  Vec2 mean() const;
  bool is_normalized(double tol = 1e-9) const;
  void normalize();  // throws DegenerateBeliefError on zero total mass
};

/// N particles drawn from an isotropic Gaussian prior, uniform weights.
ParticleBelief sample_gaussian_belief(const Vec2& mean, double sigma, int n,
                                      RngStream& rng);

/// 1 / sum(w_i^2); ranges over [1, N] for normalized weights.
double effective_sample_size(const ParticleBelief& belief);

/// Systematic (low-variance) resampling to N equally weighted particles.
/// Expected multiplicity of particle i is N * w_i. Consumes one uniform.
ParticleBelief systematic_resample(const ParticleBelief& belief, RngStream& rng);

/// One Bayes step: draw each particle through the transition model for the
/// given action, then reweight by the observation likelihood and normalize.
/// Particle i of the result descends from particle i of the input, so
/// weights stay ancestrally aligned across the step. `likelihood_floor`
/// clamps each likelihood from below (0 disables the clamp).
ParticleBelief propagate_and_reweight(const ParticleBelief& belief,
                                      const Vec2& action,
                                      const Vec2& observation,
                                      const ModelSet& models, RngStream& rng,
                                      double likelihood_floor = 0.0);

// Split phases of the step above. Tree builders propagate once per action
// edge and reweight the shared propagated set once per observation branch.
std::vector<Vec2> propagate_particles(const ParticleBelief& belief,
                                      const Vec2& action,
                                      const ModelSet& models, RngStream& rng);
ParticleBelief reweight_propagated(const ParticleBelief& belief,
                                   const std::vector<Vec2>& propagated,
                                   const Vec2& observation,
                                   const ModelSet& models,
                                   double likelihood_floor = 0.0);

/// Ascending subset fractions; the last entry must be exactly 1.0.
class SimplificationSchedule {
 public:
  explicit SimplificationSchedule(std::vector<double> fractions);

  int finest_level() const { return static_cast<int>(fractions_.size()) - 1; }
  double fraction(int level) const;
  /// ceil(fraction * n), clamped to [1, n].
  int subset_size(int level, int n) const;
  const std::vector<double>& fractions() const { return fractions_; }

 private:
  std::vector<double> fractions_;
};

/// Index subset of a belief's particles at one schedule level. The indices
/// are stored ascending. Weights seen through a view are the original belief
/// weights; they are only renormalized by view_as_belief.
struct SimplifiedView {
  std::vector<int> indices;
  int level = 0;
  double fraction = 1.0;

  int size() const { return static_cast<int>(indices.size()); }
};

/// Subset selection by weighted sampling without replacement, drawn from the
/// "simplify" substream of `rng`. For a fixed (belief, rng) the selection
/// order is a fixed priority permutation, so views at increasing levels are
/// nested prefixes of one another and refine() can replay it.
SimplifiedView simplify(const ParticleBelief& belief,
                        const SimplificationSchedule& schedule, int level,
                        const RngStream& rng);

struct RefineStep {
  SimplifiedView view;       // level + 1
  std::vector<int> added;    // disjoint from the input view, ascending
};

/// Advance a view one level, returning the refined view and the indices that
/// entered it. Replays the same priority permutation as simplify(), so
/// refining from level s yields exactly simplify(..., s + 1, rng).
RefineStep refine(const SimplifiedView& view, const ParticleBelief& belief,
                  const SimplificationSchedule& schedule, const RngStream& rng);

/// Materialize a view as a standalone belief; renormalizes by default.
ParticleBelief view_as_belief(const ParticleBelief& belief,
                              const SimplifiedView& view,
                              bool renormalize = true);

}  // namespace simplan
