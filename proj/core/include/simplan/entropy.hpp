#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simplan/belief.hpp"
#include "simplan/models.hpp"

namespace simplan {

/// Floor applied inside every log so far-field likelihoods cannot produce
/// -inf; keeps estimates and bounds finite.
inline constexpr double kLikelihoodFloor = 1e-300;

struct EntropyEstimate {
  double value = 0.0;  // nats
};

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
  int level = 0;  // simplification level that produced the pair

  double width() const { return upper - lower; }
};

/// Differential-entropy estimate of `next` from the consecutive belief pair
/// (prev, next) produced by one propagate/reweight step with (action,
/// observation). Particle i of `next` must descend from particle i of
/// `prev`. Costs N observation-density and N^2 transition-density
/// evaluations.
EntropyEstimate boers_entropy(const ParticleBelief& prev,
                              const ParticleBelief& next, const Vec2& action,
                              const Vec2& observation, const ModelSet& models);

/// Bounds on the log-evidence term of the estimator, using only the
/// particles in `next_view`. The excluded probability mass is charged at the
/// observation peak density in the upper bound. View weights are the
/// original (un-renormalized) predecessor weights.
BoundPair term_a_bounds(const SimplifiedView& next_view,
                        const ParticleBelief& prev, const ParticleBelief& next,
                        const Vec2& observation, const ModelSet& models);

/// Bounds on the weighted log-mixture term. The lower bound keeps the full
/// transition mixture for particles inside `next_view` and relaxes excluded
/// particles to the transition peak density; the upper bound restricts the
/// mixture to `prev_view` for every particle.
BoundPair term_b_bounds(const SimplifiedView& prev_view,
                        const SimplifiedView& next_view,
                        const ParticleBelief& prev, const ParticleBelief& next,
                        const Vec2& action, const Vec2& observation,
                        const ModelSet& models);

/// Partial sums for one belief transition, reusable across refinement
/// levels: moving a view up one level only pays for the particles that
/// entered it.
class EntropyBoundCache {
 public:
  EntropyBoundCache() = default;

  /// Bounds at the cache's current levels. O(N) arithmetic, no density work.
  BoundPair bounds() const;

  int prev_level() const { return prev_level_; }
  int next_level() const { return next_level_; }
  int particle_count() const { return n_; }

  /// Density evaluations consumed by this cache since construction.
  std::uint64_t evals_used() const { return evals_used_; }

  const Vec2& action() const { return action_; }
  const Vec2& observation() const { return observation_; }

 private:
  friend EntropyBoundCache make_entropy_bound_cache(
      const SimplifiedView&, const SimplifiedView&, const ParticleBelief&,
      const ParticleBelief&, const Vec2&, const Vec2&, const ModelSet&);
  friend BoundPair refine_entropy_bounds(EntropyBoundCache&,
                                         std::span<const int>,
                                         std::span<const int>,
                                         const ParticleBelief&,
                                         const ParticleBelief&,
                                         const ModelSet&);

  Vec2 action_ = Vec2::Zero();
  Vec2 observation_ = Vec2::Zero();
  int n_ = 0;
  int prev_level_ = 0;
  int next_level_ = 0;
  double observation_peak_ = 0.0;
  double transition_peak_ = 0.0;
  std::uint64_t evals_used_ = 0;

  std::vector<double> obs_likelihood;  // p(z | x'_i) for every successor i
  std::vector<double> inner_partial;   // per i: sum over prev-view j of T_ij w_j
  std::vector<double> inner_full;      // full-j sums, valid where in_next
  std::vector<char> in_prev;           // membership of the predecessor view
  std::vector<char> in_next;           // membership of the successor view
  std::vector<double> next_weights_;   // successor weights, for bound assembly

  double term_a_partial = 0.0;         // sum over next view of p(z|x'_i) w_prev_i
  double term_a_in_mass = 0.0;         // sum over next view of w_prev_i
  int next_in_count_ = 0;              // |successor view|
  double term_b_lower_in = 0.0;        // sum_in w_next_i log(p_z_i * inner_full_i)
  double term_b_lower_out = 0.0;       // sum_out w_next_i log(peak * p_z_i)
};

/// Build the cache and its initial bounds from scratch at the views' levels.
/// Costs N observation evaluations plus one transition evaluation per
/// (successor, prev-view) pair and per (next-view, out-of-prev-view) pair.
EntropyBoundCache make_entropy_bound_cache(
    const SimplifiedView& prev_view, const SimplifiedView& next_view,
    const ParticleBelief& prev, const ParticleBelief& next, const Vec2& action,
    const Vec2& observation, const ModelSet& models);

/// Combined bounds (both terms) at the views' levels.
BoundPair entropy_bounds(const SimplifiedView& prev_view,
                         const SimplifiedView& next_view,
                         const ParticleBelief& prev, const ParticleBelief& next,
                         const Vec2& action, const Vec2& observation,
                         const ModelSet& models);

/// Advance the cache one level with the index batches that entered each
/// view. Work is proportional to the batch sizes, not the view sizes, and
/// the result matches a from-scratch evaluation at the new level.
BoundPair refine_entropy_bounds(EntropyBoundCache& cache,
                                std::span<const int> added_prev,
                                std::span<const int> added_next,
                                const ParticleBelief& prev,
                                const ParticleBelief& next,
                                const ModelSet& models);

/// Discrete entropy of the weights, -sum w_i log w_i.
double naive_weight_entropy(const ParticleBelief& belief);

/// Weighted resubstitution KDE estimate with a Gaussian product kernel and
/// Silverman's per-dimension bandwidth. Requires N >= 2; degenerate spreads
/// fall back to a bandwidth floor.
double kde_entropy(const ParticleBelief& belief);

}  // namespace simplan
