#pragma once

#include <array>
#include <stdexcept>

#include "viewopt/env.hpp"

namespace viewopt {

struct NoSuccessViewpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Moves to the nearest lattice viewpoint with psi(target) > delta, counted in
// lattice moves (azimuth wraps, elevation clamps). Unreachable entries hold
// kUnreachable.
inline constexpr int kUnreachable = 1 << 20;
std::array<int, kLatticeSize> goal_distances(const VisibilityTable& table, int target_id, double delta);

// Grasp when already above the threshold, otherwise the first action of a
// shortest path to the nearest above-threshold viewpoint. Ties between
// equally short first moves break in the fixed order L < R < U < D.
Action oracle_policy(const VisibilityTable& table, int target_id, ViewpointIndex vp, double delta);

// Floor baseline: uniform over the five actions.
class RandomPolicy {
  public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(Rng::fork(seed, 0x7a11d)) {}
    Action act() { return static_cast<Action>(rng_.next_below(kActionCount)); }

  private:
    Rng rng_;
};

}  // namespace viewopt
