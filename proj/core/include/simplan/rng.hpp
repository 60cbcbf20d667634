#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace simplan {

/// Deterministic random stream (xoshiro256++) with named substream
/// derivation. A substream depends only on the parent's seed and the label,
/// never on how many values the parent has already produced, so any consumer
/// that knows the seed and the label can replay the exact same draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Child stream derived from (seed, label). Independent of stream state.
  RngStream substream(std::string_view label) const;
  RngStream substream(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform double in the open interval (0, 1).
  double uniform();

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double gaussian();

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace simplan
