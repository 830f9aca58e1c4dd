#pragma once

// Exact finite-window computations used to pin Monte Carlo estimates:
// truncated local times by occupation-vector iteration, hitting probabilities
// by absorption equations, and small annealed quantities by exhaustive
// enumeration of colorings x mixture atoms. A walk stepping outside the
// window is killed and contributes nothing further, so every value here is
// exact for the killed chain (and a lower bound for the free one).

#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/lattice.hpp"
#include "rwre/types.hpp"

namespace rwre::oracle {

struct WindowSite {
  Color color = Color::Blue;
  TransitionVector tv;
};

class FiniteWindow {
 public:
  FiniteWindow(Coord lo, Coord hi, int d, WindowSite fill);

  static constexpr bool kBounded = true;
  int dim() const { return d_; }
  const Coord& lo() const { return lo_; }
  const Coord& hi() const { return hi_; }
  std::int64_t size() const { return static_cast<std::int64_t>(sites_.size()); }

  bool in_domain(const Coord& x) const {
    for (int i = 0; i < d_; ++i)
      if (x.v[i] < lo_.v[i] || x.v[i] > hi_.v[i]) return false;
    return true;
  }
  std::int64_t index(const Coord& x) const;  // throws OutOfWindow
  Coord coord(std::int64_t idx) const;

  WindowSite& cell(const Coord& x) { return sites_[static_cast<std::size_t>(index(x))]; }
  const WindowSite& cell(const Coord& x) const {
    return sites_[static_cast<std::size_t>(index(x))];
  }
  SiteView at(const Coord& x) const {
    const WindowSite& s = sites_[static_cast<std::size_t>(index(x))];
    return {s.color, s.tv.data()};
  }

  // Copies the box [lo, hi] out of any environment.
  template <class Env>
  static FiniteWindow sample(const Env& e, Coord lo, Coord hi) {
    int d = e.dim();
    FiniteWindow w(lo, hi, d, WindowSite{});
    for (std::int64_t i = 0; i < w.size(); ++i) {
      Coord x = w.coord(i);
      SiteView sv = e.at(x);
      WindowSite& cell = w.sites_[static_cast<std::size_t>(i)];
      cell.color = sv.color;
      cell.tv = TransitionVector(
          std::vector<double>(sv.probs, sv.probs + 2 * d));
    }
    return w;
  }

 private:
  Coord lo_{}, hi_{};
  int d_ = 0;
  std::vector<std::int64_t> strides_;
  std::vector<WindowSite> sites_;
};

struct LocalTimeResult {
  double value = 0;      // E[N_x^T] for the killed chain
  double mass_left = 0;  // surviving probability mass at time T
  double absorbed = 0;   // mass killed at the boundary by time T
};

LocalTimeResult exact_local_time(const FiniteWindow& w, const Coord& start,
                                 const Coord& x, std::int64_t T);

// L[k] = E[N_x^k] for k = 0..K in one sweep (for mixing over horizons).
std::vector<double> local_time_curve(const FiniteWindow& w, const Coord& start,
                                     const Coord& x, std::int64_t K);

// P(walk from `from` hits `target` before returning to `taboo` and before
// leaving the window). `taboo` blocks only revisits: a walk started at the
// taboo site is not absorbed at time 0 (the H-tilde convention); from ==
// target returns 1 immediately.
double exact_hitting(const FiniteWindow& w, const Coord& from, const Coord& target,
                     const Coord& taboo, double tol = 1e-13,
                     std::int64_t max_iter = 1'000'000);

struct AnnealedLocalTime {
  double total = 0;
  double blue = 0, red = 0;  // split by the class of x
  std::int64_t terms = 0;    // enumerated (coloring x atoms) assignments
};

// Exhaustive annealed E[N_x^T 1{class of x}] over the box [lo, hi]: sites that
// can influence the first T steps (L1 distance <= T-1 from start, plus x
// itself) are enumerated over class and mixture atom; the rest are irrelevant
// and pinned. Throws FeasibilityExceeded past max_terms assignments.
AnnealedLocalTime exact_annealed_local_time(const env::ModelSpec& spec, Coord lo,
                                            Coord hi, const Coord& start,
                                            const Coord& x, std::int64_t T,
                                            std::int64_t max_terms = 10'000'000);

struct AnnealedGeometric {
  double blue = 0, red = 0;  // E[N_x^tau 1{class}] mixed over tau, k <= K
  std::int64_t K = 0;        // horizon where the geometric tail was cut
  double tail = 0;           // sum_{k > K} P(tau = k) (k + 1), scale for bounds
  std::int64_t terms = 0;
};

// Geometric-truncation version: mixes the per-horizon curve against
// P(tau = k) = rho (1-rho)^{k-1} with K chosen so (1-rho)^K < tail_cut, and
// reports the analytic tail envelope from N_x^k <= k + 1.
AnnealedGeometric exact_annealed_geometric(const env::ModelSpec& spec, Coord lo,
                                           Coord hi, const Coord& start,
                                           const Coord& x, double rho,
                                           double tail_cut = 1e-10,
                                           std::int64_t max_terms = 10'000'000);

}  // namespace rwre::oracle
