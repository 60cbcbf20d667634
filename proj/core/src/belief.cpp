#include "simplan/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "simplan/models.hpp"

namespace simplan {

Vec2 ParticleBelief::mean() const {
  Vec2 m = Vec2::Zero();
  for (int i = 0; i < size(); ++i) m += weights[i] * particles[i];
  return m;
}

bool ParticleBelief::is_normalized(double tol) const {
  if (particles.empty() || particles.size() != weights.size()) return false;
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) return false;
    total += w;
  }
  return std::abs(total - 1.0) <= tol;
}

void ParticleBelief::normalize() {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateBeliefError("belief has zero total mass");
  for (double& w : weights) w /= total;
}

ParticleBelief sample_gaussian_belief(const Vec2& mean, double sigma, int n,
                                      RngStream& rng) {
  if (n < 1) throw std::invalid_argument("particle count must be >= 1");
  ParticleBelief belief;
  belief.particles.reserve(n);
  belief.weights.assign(n, 1.0 / n);
  for (int i = 0; i < n; ++i) {
    belief.particles.emplace_back(mean.x() + sigma * rng.gaussian(),
                                  mean.y() + sigma * rng.gaussian());
  }
  return belief;
}

double effective_sample_size(const ParticleBelief& belief) {
  double sum_sq = 0.0;
  for (double w : belief.weights) sum_sq += w * w;
  return 1.0 / sum_sq;
}

ParticleBelief systematic_resample(const ParticleBelief& belief,
                                   RngStream& rng) {
  const int n = belief.size();
  if (n < 1) throw std::invalid_argument("empty belief");
  const double offset = rng.uniform();

  ParticleBelief out;
  out.particles.reserve(n);
  out.weights.assign(n, 1.0 / n);

  double cumulative = belief.weights[0];
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double point = (i + offset) / n;
    while (point > cumulative && j + 1 < n) {
      ++j;
      cumulative += belief.weights[j];
    }
    out.particles.push_back(belief.particles[j]);
  }
  return out;
}

std::vector<Vec2> propagate_particles(const ParticleBelief& belief,
                                      const Vec2& action,
                                      const ModelSet& models, RngStream& rng) {
  std::vector<Vec2> propagated;
  propagated.reserve(belief.size());
  for (const Vec2& x : belief.particles)
    propagated.push_back(models.sample_transition(x, action, rng));
  return propagated;
}

ParticleBelief reweight_propagated(const ParticleBelief& belief,
                                   const std::vector<Vec2>& propagated,
                                   const Vec2& observation,
                                   const ModelSet& models,
                                   double likelihood_floor) {
  const int n = belief.size();
  ParticleBelief out;
  out.particles = propagated;
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double lik = models.observation_density(observation, propagated[i]);
    if (likelihood_floor > 0.0) lik = std::max(lik, likelihood_floor);
    out.weights[i] = belief.weights[i] * lik;
  }
  out.normalize();
  return out;
}

ParticleBelief propagate_and_reweight(const ParticleBelief& belief,
                                      const Vec2& action,
                                      const Vec2& observation,
                                      const ModelSet& models, RngStream& rng,
                                      double likelihood_floor) {
  const auto propagated = propagate_particles(belief, action, models, rng);
  return reweight_propagated(belief, propagated, observation, models,
                             likelihood_floor);
}

SimplificationSchedule::SimplificationSchedule(std::vector<double> fractions)
    : fractions_(std::move(fractions)) {
  if (fractions_.empty())
    throw std::invalid_argument("schedule must not be empty");
  double prev = 0.0;
  for (double f : fractions_) {
    if (!(f > prev))
      throw std::invalid_argument("schedule fractions must be strictly increasing");
    if (f > 1.0) throw std::invalid_argument("schedule fractions must be <= 1");
    prev = f;
  }
  if (fractions_.back() != 1.0)
    throw std::invalid_argument("schedule must end at exactly 1.0");
}

double SimplificationSchedule::fraction(int level) const {
  if (level < 0 || level > finest_level())
    throw std::out_of_range("simplification level out of range");
  return fractions_[level];
}

int SimplificationSchedule::subset_size(int level, int n) const {
  const double f = fraction(level);
  // Nudge below the product so 0.2 * 100 -> 20, not 21, under FP noise.
  const int k = static_cast<int>(std::ceil(f * n - 1e-9));
  return std::clamp(k, 1, n);
}

namespace {

// Priority permutation for weighted sampling without replacement: index i
// gets key log(u_i) / w_i and indices are taken in descending key order.
// Zero-weight particles sort last, ties broken by index.
std::vector<int> selection_order(const ParticleBelief& belief,
                                 const RngStream& rng) {
  const int n = belief.size();
  RngStream stream = rng.substream("simplify");
  std::vector<double> keys(n);
  for (int i = 0; i < n; ++i) {
    const double u = stream.uniform();
    keys[i] = belief.weights[i] > 0.0
                  ? std::log(u) / belief.weights[i]
                  : -std::numeric_limits<double>::infinity();
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&keys](int a, int b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return a < b;
  });
  return order;
}

}  // namespace

SimplifiedView simplify(const ParticleBelief& belief,
                        const SimplificationSchedule& schedule, int level,
                        const RngStream& rng) {
  const int n = belief.size();
  const int k = schedule.subset_size(level, n);

  SimplifiedView view;
  view.level = level;
  view.fraction = schedule.fraction(level);
  if (k == n) {
    view.indices.resize(n);
    std::iota(view.indices.begin(), view.indices.end(), 0);
    return view;
  }
  const auto order = selection_order(belief, rng);
  view.indices.assign(order.begin(), order.begin() + k);
  std::sort(view.indices.begin(), view.indices.end());
  return view;
}

RefineStep refine(const SimplifiedView& view, const ParticleBelief& belief,
                  const SimplificationSchedule& schedule,
                  const RngStream& rng) {
  if (view.level >= schedule.finest_level())
    throw std::out_of_range("view is already at the finest level");

  const int n = belief.size();
  const int next_level = view.level + 1;
  const int k_now = schedule.subset_size(view.level, n);
  const int k_next = schedule.subset_size(next_level, n);

  RefineStep step;
  step.view.level = next_level;
  step.view.fraction = schedule.fraction(next_level);

  if (k_next == k_now) {
    step.view.indices = view.indices;
    return step;
  }

  const auto order = selection_order(belief, rng);
  step.added.assign(order.begin() + k_now, order.begin() + k_next);
  std::sort(step.added.begin(), step.added.end());

  step.view.indices.resize(k_next);
  std::merge(view.indices.begin(), view.indices.end(), step.added.begin(),
             step.added.end(), step.view.indices.begin());
  return step;
}

ParticleBelief view_as_belief(const ParticleBelief& belief,
                              const SimplifiedView& view, bool renormalize) {
  ParticleBelief out;
  out.particles.reserve(view.indices.size());
  out.weights.reserve(view.indices.size());
  for (int i : view.indices) {
    out.particles.push_back(belief.particles[i]);
    out.weights.push_back(belief.weights[i]);
  }
  if (renormalize) out.normalize();
  return out;
}

}  // namespace simplan
