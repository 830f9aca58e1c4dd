#pragma once

// Site-level types shared by the environment, walk and oracle code.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rwre/errors.hpp"

namespace rwre {

enum class Color : std::uint8_t { Blue = 0, Red = 1 };

inline const char* color_name(Color c) { return c == Color::Blue ? "blue" : "red"; }

// Probability vector over the 2d nearest-neighbor directions, ordered
// e_1..e_{2d} (so entries i and i+d are opposite directions).
struct TransitionVector {
  std::vector<double> p;

  TransitionVector() = default;
  explicit TransitionVector(std::vector<double> probs) : p(std::move(probs)) {}

  int dim() const { return static_cast<int>(p.size()) / 2; }
  int num_dirs() const { return static_cast<int>(p.size()); }
  const double* data() const { return p.data(); }

  double min_entry() const {
    double m = 1.0;
    for (double x : p) m = x < m ? x : m;
    return m;
  }

  friend bool operator==(const TransitionVector& a, const TransitionVector& b) {
    return a.p == b.p;
  }
};

// Checks simplex membership (entries >= 0, sum within tol of 1) and even size.
void check_transition_vector(const TransitionVector& tv, int expect_d,
                             double tol = 1e-12);

// Finite-support law over transition vectors: Dirac or finite mixture.
struct SiteDistribution {
  std::vector<double> weights;             // sums to 1
  std::vector<TransitionVector> support;   // same length as weights

  static SiteDistribution dirac(TransitionVector tv) {
    SiteDistribution s;
    s.weights = {1.0};
    s.support.push_back(std::move(tv));
    return s;
  }
  static SiteDistribution mixture(
      std::vector<std::pair<double, TransitionVector>> atoms) {
    SiteDistribution s;
    for (auto& [w, tv] : atoms) {
      s.weights.push_back(w);
      s.support.push_back(std::move(tv));
    }
    return s;
  }

  bool is_dirac() const { return support.size() == 1; }
  std::size_t num_atoms() const { return support.size(); }

  // Inverse-CDF atom pick; returns the atom index for uniform u in [0,1).
  int pick_atom(double u) const {
    double acc = 0;
    int last = static_cast<int>(weights.size()) - 1;
    for (int i = 0; i < last; ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return last;
  }

  // Mean of a linear functional f over the support.
  template <class F>
  double mean(F&& f) const {
    double s = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * f(support[i]);
    return s;
  }
};

void check_site_distribution(const SiteDistribution& mu, int expect_d,
                             double tol = 1e-12);

// Lightweight view of one site: its class and a pointer to 2d step
// probabilities owned by the environment/model (valid while that is alive).
struct SiteView {
  Color color;
  const double* probs;
};

}  // namespace rwre
