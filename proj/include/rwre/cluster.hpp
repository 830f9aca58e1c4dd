#pragma once

// Directed red clusters and their boundary combinatorics.
//
// The step set S (2d steps) is built so that every step strictly increases
// the height order (e_d-coordinate first, then the e_{2d-1}-coordinate):
//   S = {e_{2d-1}} u {e_d} u {e_d + e_i : 1 <= i <= 2d, i not in {d, 2d}}.
// This is the canonical form with the red-elliptic pair relabeled to
// (eta, theta) = (2d-1, 2d); for a model with another valid pair the steps
// are carried through a signed axis permutation.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"

namespace rwre::cluster {

struct StepSet {
  int d = 0;
  int eta = 0, theta = 0;        // the pair the set was built for (1-based)
  std::vector<Coord> steps;      // |steps| == 2d
};

// Canonical step set (eta = 2d-1, theta = 2d). Throws InvalidDimension for
// d < 2.
StepSet step_set(int d);

// Step set for a model's (eta, theta): the canonical set pushed through the
// signed permutation that maps direction eta -> 2d-1 and theta -> 2d.
// Requires |eta - theta| not in {0, d}.
StepSet step_set_for(int d, int eta, int theta);

struct ClusterResult {
  Coord origin{};
  bool origin_red = false;
  std::vector<Coord> members;   // sorted; empty iff origin is blue
  std::vector<Coord> boundary;  // (C + S) \ C, sorted; empty iff members empty
  bool truncated = false;       // growth stopped at size_cap
};

// Smallest S-closed red set containing x (empty if x is blue): BFS over red
// S-successors. Stops at size_cap members and flags truncation.
template <class Env>
ClusterResult compute_cluster(const Env& e, const Coord& x, const StepSet& S,
                              std::int64_t size_cap = 1 << 20);

// Is {cluster of origin == C}? Per the set characterization this holds iff
// every member is red and every boundary site is blue; the origin membership
// and S-connectivity-from-origin of C are preconditions (NotSConnected).
template <class Env>
bool characterize_event(const Env& e, const Coord& origin,
                        const std::vector<Coord>& C, const StepSet& S);

// Boundary (C + S) \ C, sorted.
std::vector<Coord> boundary_of(const std::vector<Coord>& C, const StepSet& S);

// All S-connected-from-origin n-sets containing the origin ("directed lattice
// animals"), the sets counted by the (7d)^n bound. counts[k] = #animals of
// size k+1, k = 0..n_max-1. Throws FeasibilityExceeded past max_count.
std::vector<std::int64_t> count_animals(int d, int n_max,
                                        std::int64_t max_count = 10'000'000);

// Enumerates the animals themselves (sorted members per animal) for small n.
std::vector<std::vector<Coord>> enumerate_animals(int d, int n,
                                                  std::int64_t max_count = 10'000'000);

// ---- template implementations -------------------------------------------

namespace detail {
// Sorted-unique insertion order does not matter for correctness; helpers work
// on sorted vectors to keep results canonical and JSON-stable.
bool sorted_contains(const std::vector<Coord>& v, const Coord& c);
}  // namespace detail

template <class Env>
ClusterResult compute_cluster(const Env& e, const Coord& x, const StepSet& S,
                              std::int64_t size_cap) {
  ClusterResult res;
  res.origin = x;
  res.origin_red = e.at(x).color == Color::Red;
  if (!res.origin_red) return res;

  std::vector<Coord> frontier{x};
  std::vector<Coord> members{x};  // kept sorted
  while (!frontier.empty()) {
    std::vector<Coord> next;
    for (const Coord& y : frontier) {
      for (const Coord& s : S.steps) {
        Coord z = y + s;
        if (detail::sorted_contains(members, z)) continue;
        if (e.at(z).color != Color::Red) continue;
        members.insert(std::lower_bound(members.begin(), members.end(), z), z);
        next.push_back(z);
        if (static_cast<std::int64_t>(members.size()) >= size_cap) {
          res.truncated = true;
          res.members = std::move(members);
          res.boundary = boundary_of(res.members, S);
          return res;
        }
      }
    }
    frontier = std::move(next);
  }
  res.members = std::move(members);
  res.boundary = boundary_of(res.members, S);
  return res;
}

template <class Env>
bool characterize_event(const Env& e, const Coord& origin,
                        const std::vector<Coord>& C, const StepSet& S) {
  if (C.empty()) throw NotSConnected("cluster candidate must be nonempty");
  std::vector<Coord> sorted = C;
  std::sort(sorted.begin(), sorted.end());
  if (!detail::sorted_contains(sorted, origin))
    throw NotSConnected("candidate set does not contain its origin");
  // Reachability from the origin inside C via S-steps.
  std::vector<Coord> reached{origin};
  std::vector<Coord> frontier{origin};
  while (!frontier.empty()) {
    std::vector<Coord> next;
    for (const Coord& y : frontier)
      for (const Coord& s : S.steps) {
        Coord z = y + s;
        if (!detail::sorted_contains(sorted, z) ||
            detail::sorted_contains(reached, z))
          continue;
        reached.insert(std::lower_bound(reached.begin(), reached.end(), z), z);
        next.push_back(z);
      }
    frontier = std::move(next);
  }
  if (reached.size() != sorted.size())
    throw NotSConnected("candidate set is not S-connected from its origin");

  for (const Coord& y : sorted)
    if (e.at(y).color != Color::Red) return false;
  for (const Coord& b : boundary_of(sorted, S))
    if (e.at(b).color != Color::Blue) return false;
  return true;
}

}  // namespace rwre::cluster
