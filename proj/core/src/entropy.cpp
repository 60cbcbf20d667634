#include "simplan/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace simplan {
namespace {

double clamped_log(double x) { return std::log(std::max(x, kLikelihoodFloor)); }

void check_pair(const ParticleBelief& prev, const ParticleBelief& next) {
  if (prev.size() != next.size())
    throw std::invalid_argument("consecutive beliefs must have equal particle counts");
  if (prev.size() < 1) throw std::invalid_argument("empty belief");
}

}  // namespace

EntropyEstimate boers_entropy(const ParticleBelief& prev,
                              const ParticleBelief& next, const Vec2& action,
                              const Vec2& observation, const ModelSet& models) {
  check_pair(prev, next);
  const int n = prev.size();

  double evidence = 0.0;
  std::vector<double> obs_likelihood(n);
  for (int i = 0; i < n; ++i) {
    obs_likelihood[i] = models.observation_density(observation, next.particles[i]);
    evidence += obs_likelihood[i] * prev.weights[i];
  }

  double mixture_term = 0.0;
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j = 0; j < n; ++j) {
      inner += models.transition_density(next.particles[i], prev.particles[j],
                                         action) *
               prev.weights[j];
    }
    mixture_term += next.weights[i] * clamped_log(obs_likelihood[i] * inner);
  }

  return {clamped_log(evidence) - mixture_term};
}

BoundPair term_a_bounds(const SimplifiedView& next_view,
                        const ParticleBelief& prev, const ParticleBelief& next,
                        const Vec2& observation, const ModelSet& models) {
  check_pair(prev, next);
  double partial = 0.0;
  double in_mass = 0.0;
  for (int i : next_view.indices) {
    partial += models.observation_density(observation, next.particles[i]) *
               prev.weights[i];
    in_mass += prev.weights[i];
  }
  // An empty excluded set carries exactly zero mass; round-off in 1 - sum(w)
  // must not reopen the interval at the finest level.
  const double excluded = next_view.size() == prev.size()
                              ? 0.0
                              : std::max(0.0, 1.0 - in_mass);
  BoundPair out;
  out.lower = clamped_log(partial);
  out.upper = clamped_log(partial + models.observation_peak() * excluded);
  out.level = next_view.level;
  return out;
}

BoundPair term_b_bounds(const SimplifiedView& prev_view,
                        const SimplifiedView& next_view,
                        const ParticleBelief& prev, const ParticleBelief& next,
                        const Vec2& action, const Vec2& observation,
                        const ModelSet& models) {
  check_pair(prev, next);
  const int n = prev.size();
  const double transition_peak = models.transition_peak();

  std::vector<double> obs_likelihood(n);
  for (int i = 0; i < n; ++i)
    obs_likelihood[i] = models.observation_density(observation, next.particles[i]);

  std::vector<char> in_next(n, 0);
  for (int i : next_view.indices) in_next[i] = 1;

  // Upper bound: restrict the transition mixture to the predecessor view.
  double upper = 0.0;
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j : prev_view.indices) {
      inner += models.transition_density(next.particles[i], prev.particles[j],
                                         action) *
               prev.weights[j];
    }
    upper -= next.weights[i] * clamped_log(obs_likelihood[i] * inner);
  }

  // Lower bound: full mixture inside the successor view, peak-density
  // relaxation outside it.
  double lower = 0.0;
  for (int i = 0; i < n; ++i) {
    if (in_next[i]) {
      double inner = 0.0;
      for (int j = 0; j < n; ++j) {
        inner += models.transition_density(next.particles[i],
                                           prev.particles[j], action) *
                 prev.weights[j];
      }
      lower -= next.weights[i] * clamped_log(obs_likelihood[i] * inner);
    } else {
      lower -= next.weights[i] * clamped_log(transition_peak * obs_likelihood[i]);
    }
  }

  BoundPair out;
  out.lower = lower;
  out.upper = upper;
  out.level = std::min(prev_view.level, next_view.level);
  return out;
}

BoundPair EntropyBoundCache::bounds() const {
  BoundPair out;
  out.level = std::min(prev_level_, next_level_);

  const double excluded =
      next_in_count_ == n_ ? 0.0 : std::max(0.0, 1.0 - term_a_in_mass);
  const double a_lower = clamped_log(term_a_partial);
  const double a_upper = clamped_log(term_a_partial + observation_peak_ * excluded);

  double b_upper = 0.0;
  for (int i = 0; i < n_; ++i)
    b_upper -= next_weights_[i] * clamped_log(obs_likelihood[i] * inner_partial[i]);
  const double b_lower = -term_b_lower_out - term_b_lower_in;

  out.lower = a_lower + b_lower;
  out.upper = a_upper + b_upper;
  return out;
}

EntropyBoundCache make_entropy_bound_cache(
    const SimplifiedView& prev_view, const SimplifiedView& next_view,
    const ParticleBelief& prev, const ParticleBelief& next, const Vec2& action,
    const Vec2& observation, const ModelSet& models) {
  check_pair(prev, next);
  const int n = prev.size();

  EntropyBoundCache cache;
  cache.action_ = action;
  cache.observation_ = observation;
  cache.n_ = n;
  cache.prev_level_ = prev_view.level;
  cache.next_level_ = next_view.level;
  cache.observation_peak_ = models.observation_peak();
  cache.transition_peak_ = models.transition_peak();
  cache.next_weights_ = next.weights;

  cache.obs_likelihood.resize(n);
  for (int i = 0; i < n; ++i) {
    cache.obs_likelihood[i] =
        models.observation_density(observation, next.particles[i]);
  }
  cache.evals_used_ += static_cast<std::uint64_t>(n);

  cache.in_prev.assign(n, 0);
  for (int j : prev_view.indices) cache.in_prev[j] = 1;
  cache.in_next.assign(n, 0);
  for (int i : next_view.indices) cache.in_next[i] = 1;
  cache.next_in_count_ = next_view.size();

  cache.inner_partial.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int j : prev_view.indices) {
      inner += models.transition_density(next.particles[i], prev.particles[j],
                                         action) *
               prev.weights[j];
    }
    cache.inner_partial[i] = inner;
  }
  cache.evals_used_ +=
      static_cast<std::uint64_t>(n) * prev_view.indices.size();

  cache.inner_full.assign(n, 0.0);
  for (int i : next_view.indices) {
    double tail = 0.0;
    for (int j = 0; j < n; ++j) {
      if (cache.in_prev[j]) continue;
      tail += models.transition_density(next.particles[i], prev.particles[j],
                                        action) *
              prev.weights[j];
      ++cache.evals_used_;
    }
    cache.inner_full[i] = cache.inner_partial[i] + tail;
  }

  for (int i : next_view.indices) {
    cache.term_a_partial += cache.obs_likelihood[i] * prev.weights[i];
    cache.term_a_in_mass += prev.weights[i];
    cache.term_b_lower_in +=
        next.weights[i] *
        clamped_log(cache.obs_likelihood[i] * cache.inner_full[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (cache.in_next[i]) continue;
    cache.term_b_lower_out +=
        next.weights[i] *
        clamped_log(cache.transition_peak_ * cache.obs_likelihood[i]);
  }
  return cache;
}

BoundPair entropy_bounds(const SimplifiedView& prev_view,
                         const SimplifiedView& next_view,
                         const ParticleBelief& prev, const ParticleBelief& next,
                         const Vec2& action, const Vec2& observation,
                         const ModelSet& models) {
  return make_entropy_bound_cache(prev_view, next_view, prev, next, action,
                                  observation, models)
      .bounds();
}

BoundPair refine_entropy_bounds(EntropyBoundCache& cache,
                                std::span<const int> added_prev,
                                std::span<const int> added_next,
                                const ParticleBelief& prev,
                                const ParticleBelief& next,
                                const ModelSet& models) {
  const int n = cache.n_;
  if (prev.size() != n || next.size() != n)
    throw std::invalid_argument("belief size does not match the cache");
  for (int j : added_prev)
    if (cache.in_prev[j])
      throw std::invalid_argument("refined predecessor index already in view");
  for (int i : added_next)
    if (cache.in_next[i])
      throw std::invalid_argument("refined successor index already in view");

  // Extend the per-particle mixture sums with the new predecessor batch.
  if (!added_prev.empty()) {
    for (int i = 0; i < n; ++i) {
      double add = 0.0;
      for (int j : added_prev) {
        add += models.transition_density(next.particles[i], prev.particles[j],
                                         cache.action_) *
               prev.weights[j];
      }
      cache.inner_partial[i] += add;
    }
    cache.evals_used_ +=
        static_cast<std::uint64_t>(n) * added_prev.size();
    for (int j : added_prev) cache.in_prev[j] = 1;
  }
  ++cache.prev_level_;

  // New successor-view particles need their full mixture; everything in the
  // current predecessor view is already summed in inner_partial.
  for (int i : added_next) {
    double tail = 0.0;
    for (int j = 0; j < n; ++j) {
      if (cache.in_prev[j]) continue;
      tail += models.transition_density(next.particles[i], prev.particles[j],
                                        cache.action_) *
              prev.weights[j];
      ++cache.evals_used_;
    }
    cache.inner_full[i] = cache.inner_partial[i] + tail;

    cache.term_a_partial += cache.obs_likelihood[i] * prev.weights[i];
    cache.term_a_in_mass += prev.weights[i];
    cache.term_b_lower_in +=
        next.weights[i] *
        clamped_log(cache.obs_likelihood[i] * cache.inner_full[i]);
    cache.term_b_lower_out -=
        next.weights[i] *
        clamped_log(cache.transition_peak_ * cache.obs_likelihood[i]);
    cache.in_next[i] = 1;
    ++cache.next_in_count_;
  }
  ++cache.next_level_;

  return cache.bounds();
}

double naive_weight_entropy(const ParticleBelief& belief) {
  double h = 0.0;
  for (double w : belief.weights)
    if (w > 0.0) h -= w * std::log(w);
  return h;
}

double kde_entropy(const ParticleBelief& belief) {
  const int n = belief.size();
  if (n < 2) throw std::invalid_argument("kde_entropy requires at least 2 particles");
  constexpr double kBandwidthFloor = 1e-9;
  constexpr int d = kStateDim;

  const Vec2 mean = belief.mean();
  Vec2 variance = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec2 diff = belief.particles[i] - mean;
    variance += belief.weights[i] * diff.cwiseProduct(diff);
  }

  // Silverman's rule per dimension, with a floor for degenerate spreads.
  const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
  Vec2 bandwidth;
  for (int k = 0; k < d; ++k)
    bandwidth[k] = std::max(std::sqrt(variance[k]) * factor, kBandwidthFloor);

  const double norm =
      1.0 / (2.0 * std::numbers::pi * bandwidth[0] * bandwidth[1]);
  double h = 0.0;
  for (int i = 0; i < n; ++i) {
    double density = 0.0;
    for (int j = 0; j < n; ++j) {
      const Vec2 diff = belief.particles[i] - belief.particles[j];
      const double quad = (diff[0] * diff[0]) / (bandwidth[0] * bandwidth[0]) +
                          (diff[1] * diff[1]) / (bandwidth[1] * bandwidth[1]);
      density += belief.weights[j] * norm * std::exp(-0.5 * quad);
    }
    h -= belief.weights[i] * std::log(std::max(density, kLikelihoodFloor));
  }
  return h;
}

}  // namespace simplan
