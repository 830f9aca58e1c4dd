#pragma once

// Quenched walk simulation. One uniform per step, turned into a direction by
// inverse CDF over the direction order e_1..e_{2d}: the step is e_i exactly
// when U falls in the half-open cell [sum_{j<i} w(e_j), sum_{j<=i} w(e_j)).
// Driving the walk through an explicit uniform stream is what makes the
// coupling construction (and its restart property) possible.

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"
#include "rwre/types.hpp"

namespace rwre::walk {

// Inverse-CDF step pick; u in [0,1). The final cell absorbs any floating-point
// shortfall so a valid simplex vector always yields a valid direction.
inline int pick_step(const double* probs, int twod, double u) {
  double acc = 0;
  for (int i = 0; i < twod - 1; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return twod - 1;
}

struct GeometricTruncation {
  double rho;  // P(tau = k) = rho (1-rho)^{k-1}, k >= 1
};

struct WalkRecord {
  Coord start{};
  Coord end{};
  std::int64_t horizon = 0;      // requested number of steps
  std::int64_t steps_taken = 0;  // < horizon only if the walk left the domain
  bool killed = false;           // stepped outside a bounded environment
  // Truncated local times N_x = #{0 <= n <= steps_taken : X_n = x} and first
  // hitting times H_x, over visited sites only.
  std::unordered_map<Coord, std::int64_t, CoordHash> local_times;
  std::unordered_map<Coord, std::int64_t, CoordHash> first_hits;

  Coord displacement() const { return end - start; }
  // Number of fresh-site steps among steps 1..steps_taken. Every visited site
  // other than the start contributes exactly one fresh arrival.
  std::int64_t fresh_site_count() const {
    return static_cast<std::int64_t>(first_hits.size()) - 1;
  }
};

// Full-record reference walk: T steps (or until leaving a bounded domain),
// consuming one uniform per step from `us`.
template <class Env>
WalkRecord run_walk(const Env& e, const Coord& start, std::int64_t T,
                    UniformStream& us) {
  WalkRecord rec;
  rec.start = start;
  rec.end = start;
  rec.horizon = T;
  int d = e.dim(), twod = 2 * d;
  Coord pos = start;
  rec.local_times[pos] = 1;
  rec.first_hits[pos] = 0;
  for (std::int64_t t = 0; t < T; ++t) {
    SiteView sv = e.at(pos);
    pos += direction_vector(pick_step(sv.probs, twod, us.next()), d);
    if constexpr (Env::kBounded) {
      if (!e.in_domain(pos)) {
        // Leaving the window kills the walk: the exit site contributes nothing.
        rec.killed = true;
        break;
      }
    }
    rec.steps_taken = t + 1;
    rec.local_times[pos] += 1;
    rec.first_hits.try_emplace(pos, t + 1);
    rec.end = pos;
  }
  return rec;
}

// The uniform walk map: runs the walk from `start` in environment `e`,
// consuming uniforms from `us`, until `stop(position, time)` returns true or
// `max_steps` uniforms have been spent. Returns the trajectory including both
// endpoints. The stop predicate is evaluated at times >= 1 (so a walk started
// on its target still takes at least one step, giving the positive hitting
// time H-tilde semantics when start == target).
template <class Env, class Stop>
std::vector<Coord> uniform_walk_map(const Env& e, const Coord& start,
                                    UniformStream& us, Stop&& stop,
                                    std::int64_t max_steps) {
  std::vector<Coord> path{start};
  int d = e.dim(), twod = 2 * d;
  Coord pos = start;
  for (std::int64_t t = 1; t <= max_steps; ++t) {
    SiteView sv = e.at(pos);
    pos += direction_vector(pick_step(sv.probs, twod, us.next()), d);
    path.push_back(pos);
    if (stop(pos, t)) break;
  }
  return path;
}

}  // namespace rwre::walk
