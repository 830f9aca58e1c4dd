#pragma once

// Coupling of two walks in environments that differ at a single vertex y
// (blue in omega2, red in omega3). Both walks read the same uniform stream U;
// they separate exactly when the path visits y. At the k-th visit (time tau_k
// on walk 2's clock), walk 3 replaces walk 2's single step away from y by an
// excursion in omega3, run on an independent stream V, that ends on first
// arrival at y_k := X^2_{tau_k + 1}; from there the walks read the same
// uniforms again. The spliced path has the quenched law of omega3, and its
// local time at y is controlled by walk 2's.

#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/lattice.hpp"
#include "rwre/types.hpp"
#include "rwre/walk.hpp"

namespace rwre::coupling {

struct CoupledPair {
  const env::TaggedEnvironment* base = nullptr;  // the shared backdrop
  Coord y{};
  TransitionVector at_y_blue;  // omega2's vector at y (drawn from mu_b)
  TransitionVector at_y_red;   // omega3's vector at y (drawn from mu_r)
  bool identical = false;      // environments coincide at y: no decoupling
};

// Draws the forced vectors at y from the model's class laws.
CoupledPair make_pair(const env::TaggedEnvironment& base, const Coord& y,
                      std::uint64_t seed);

// A pair member as an environment: the backdrop everywhere except y.
template <Color AtY>
class PairEnv {
 public:
  explicit PairEnv(const CoupledPair& pair) : pair_(&pair) {}
  static constexpr bool kBounded = false;
  bool in_domain(const Coord&) const { return true; }
  int dim() const { return pair_->base->dim(); }
  SiteView at(const Coord& x) const {
    if (x == pair_->y)
      return {AtY, AtY == Color::Blue ? pair_->at_y_blue.data()
                                      : pair_->at_y_red.data()};
    return pair_->base->at(x);
  }

 private:
  const CoupledPair* pair_;
};

using Omega2 = PairEnv<Color::Blue>;
using Omega3 = PairEnv<Color::Red>;

struct Excursion {
  std::int64_t tau = 0;      // walk 2's clock at the decoupling visit
  std::int64_t length = 0;   // steps walked in omega3 before recoupling
  bool recoupled = false;    // false only when the horizon cut it short
};

struct CouplingTrace {
  std::vector<Coord> path2, path3;  // positions 0..T on each walk's own clock
  std::vector<Excursion> excursions;
  bool censored = false;  // last excursion still open at the horizon
  std::int64_t n2_at_y = 0, n3_at_y = 0;  // truncated local times at y
};

// Runs the coupled pair for T steps on each clock. Walk 2 consumes
// U = stream(seed, walk-salt); excursions consume V = stream(seed,
// excursion-salt) sequentially across decoupling epochs.
CouplingTrace run_coupled(const CoupledPair& pair, std::int64_t T,
                          std::uint64_t seed);

// Path-free variant for replicate-heavy runs: same streams, same walks, but
// only the local times at y, the excursion count and the endpoints are kept.
// Tests assert it reproduces run_coupled's numbers exactly.
struct CoupleCounts {
  std::int64_t n2 = 0, n3 = 0;  // truncated local times at y
  std::int64_t excursions = 0;
  bool censored = false;
  Coord end2{}, end3{};  // positions at time T on each walk's own clock
};

CoupleCounts run_coupled_counts(const CoupledPair& pair, std::int64_t T,
                                std::uint64_t seed);

struct ExcursionStats {
  std::int64_t completed = 0;
  std::int64_t censored_replicates = 0;
  double mean_length = 0;
  double max_length = 0;
  double censor_rate = 0;
  std::vector<std::int64_t> histogram;  // log2-binned completed lengths
};

ExcursionStats excursion_length_stats(const CoupledPair& pair, std::int64_t T,
                                      std::int64_t n, std::uint64_t seed);

// Explicit detour paths from y to each neighbor b, staying inside
// {y} u (y + S) u {b}: a direct step for b = y + e_{2d-1} or y + e_{2d},
// a 3-step path for b = y + e_d, and a 5-step path otherwise. Asserted
// lower bounds are kappa, kappa^4 (conservative) and kappa^5; the quenched
// path product is computed from the environment's actual vectors.
struct DetourCase {
  Coord b{};
  std::vector<Coord> path;  // from y to b inclusive
  double path_product = 0;  // product of the quenched step probabilities
  double asserted_bound = 0;
  bool ok = false;  // path_product >= asserted_bound
};

struct DetourReport {
  std::vector<DetourCase> cases;
  bool all_ok = false;
  double kappa5 = 0;
};

namespace detail {
// All sites of y + S blue? (precondition of the detour construction)
template <class Env>
bool surroundings_blue(const Env& e, const Coord& y, const std::vector<Coord>& S) {
  for (const Coord& s : S) {
    Coord z = y;
    z += s;
    if (e.at(z).color != Color::Blue) return false;
  }
  return true;
}

double path_probability(const std::vector<Coord>& path,
                        const std::vector<const double*>& site_probs, int d);
}  // namespace detail

// Builds the per-neighbor detour report. Throws PreconditionViolated if some
// site of y + S is red. The environment's (eta, theta) are taken canonical
// (2d-1, 2d), matching the step-set orientation used by the callers.
template <class Env>
DetourReport detour_probability_check(const Env& e, const Coord& y, double kappa) {
  const int d = e.dim(), twod = 2 * d;
  std::vector<Coord> S;
  {
    // canonical steps, written out locally to avoid a cluster dependency
    auto dir = [d](int i) { return direction_vector(i - 1, d); };
    S.push_back(dir(2 * d - 1));
    S.push_back(dir(d));
    for (int j = 1; j <= twod; ++j)
      if (j != d && j != 2 * d) S.push_back(dir(d) + dir(j));
  }
  if (!detail::surroundings_blue(e, y, S))
    throw PreconditionViolated("detour check needs every site of y + S blue");

  DetourReport rep;
  rep.kappa5 = kappa * kappa * kappa * kappa * kappa;
  auto dir = [d](int i) { return direction_vector(i - 1, d); };
  const Coord e_eta = dir(2 * d - 1), e_up = dir(d);

  for (int i = 1; i <= twod; ++i) {
    DetourCase dc;
    Coord step_i = dir(i);
    dc.b = y + step_i;
    if (i == 2 * d - 1 || i == 2 * d) {
      dc.path = {y, dc.b};  // red-elliptic directions: direct step
      dc.asserted_bound = kappa;
    } else if (i == d) {
      dc.path = {y, y + e_eta, y + e_eta + e_up, dc.b};
      dc.asserted_bound = kappa * kappa * kappa * kappa;
    } else {
      dc.path = {y,          y + e_eta, y + e_eta + e_up,
                 y + e_up,   y + e_up + step_i, dc.b};
      dc.asserted_bound = rep.kappa5;
    }
    std::vector<const double*> probs;
    for (std::size_t k = 0; k + 1 < dc.path.size(); ++k)
      probs.push_back(e.at(dc.path[k]).probs);
    dc.path_product = detail::path_probability(dc.path, probs, d);
    dc.ok = dc.path_product >= dc.asserted_bound;
    rep.cases.push_back(std::move(dc));
  }
  rep.all_ok = true;
  for (const auto& c : rep.cases) rep.all_ok = rep.all_ok && c.ok;
  return rep;
}

}  // namespace rwre::coupling
