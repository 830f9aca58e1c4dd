#pragma once

// I.i.d. two-class random environments on Z^d.
//
// Every vertex independently gets a class tag (blue with probability p, red
// otherwise) and a transition vector drawn from the class law (mu_b or mu_r).
// Environments are lazy and deterministic: the tagged pair at a site is a pure
// function of (seed, coordinate), so arbitrarily far sites can be queried
// without materializing anything and query order is irrelevant.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"
#include "rwre/types.hpp"

namespace rwre::env {

struct ModelSpec {
  int d = 2;
  double p = 1.0;            // P(site is blue)
  SiteDistribution mu_b;     // law of the vector at blue sites
  SiteDistribution mu_r;     // law of the vector at red sites
  double kappa = 0.0;        // claimed ellipticity constant
  int eta = 0, theta = 0;    // 1-based direction indices in {1..2d}, red-elliptic pair
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  // Largest admissible kappa per class: min over mu_b support of the full
  // vector minimum, and min over mu_r support restricted to directions
  // eta/theta. NaN when the corresponding structure is invalid.
  double max_kappa_blue = 0.0;
  double max_kappa_red = 0.0;
  // p > 1 - 1/(2d) is sufficient for red clusters to be finite a.s.
  bool p_above_cluster_threshold = false;
  // Set when the caller supplies a site-percolation threshold estimate and
  // p exceeds it; records that the blue-reachability condition is assumed.
  bool condition_c_assumed = false;
};

// Structural validation. Never throws: problems come back in the report.
// pc_estimate, if supplied, is a site-percolation threshold estimate for Z^d.
ValidationReport validate_model(const ModelSpec& spec,
                                std::optional<double> pc_estimate = std::nullopt);

// The tagged environment (class tag + vector per site) for a given seed.
// omega(x) is the vector; the tag is carried explicitly alongside it.
class TaggedEnvironment {
 public:
  TaggedEnvironment(const ModelSpec& spec, std::uint64_t seed)
      : spec_(&spec), seed_(mix64(seed ^ salt::kEnv)) {}

  static constexpr bool kBounded = false;
  bool in_domain(const Coord&) const { return true; }
  int dim() const { return spec_->d; }
  std::uint64_t seed() const { return seed_; }
  const ModelSpec& spec() const { return *spec_; }

  SiteView at(const Coord& x) const {
    std::uint64_t h = site_hash(seed_, x, spec_->d);
    bool blue = unit_double(mix64(h ^ salt::kColor)) < spec_->p;
    const SiteDistribution& mu = blue ? spec_->mu_b : spec_->mu_r;
    int atom = 0;
    if (!mu.is_dirac()) atom = mu.pick_atom(unit_double(mix64(h ^ salt::kAtom)));
    return {blue ? Color::Blue : Color::Red, mu.support[atom].data()};
  }

 private:
  const ModelSpec* spec_;  // non-owning; caller keeps the spec alive
  std::uint64_t seed_;
};

// Anisotropic counterexample environment on Z^2: i.i.d. per-site uniforms
// U_x; the marker above x = (a,b) is x* = (a,b*) with
// b* = min{b' >= b : U_{(a,b')} < epsilon}, and x is red iff U_{x*} <
// epsilon^2. Columns are i.i.d., but within a column every site below a bad
// marker turns red, producing red walls of mean height 1/epsilon while the
// marginal red probability is only epsilon.
struct CounterexampleConfig {
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  std::int64_t scan_cap = 0;  // 0 -> default ceil(50/epsilon)
};

class CounterexampleEnv {
 public:
  // Vectors: blue (0.3, 0.25, 0.2, 0.25); red (delta, 0.25, 0.5-delta, 0.25)
  // with delta = epsilon^2, in direction order right/up/left/down.
  explicit CounterexampleEnv(const CounterexampleConfig& cfg);

  static constexpr bool kBounded = false;
  bool in_domain(const Coord&) const { return true; }
  int dim() const { return 2; }
  double epsilon() const { return eps_; }
  double delta() const { return eps_ * eps_; }
  std::int64_t scan_cap() const { return scan_cap_; }

  // The i.i.d. uniform attached to a site (injected value if present).
  double uniform_at(const Coord& x) const {
    if (injected_ && !injected_->empty()) {
      auto it = injected_->find(x);
      if (it != injected_->end()) return it->second;
    }
    return unit_double(mix64(site_hash(seed_, x, 2) ^ salt::kColor));
  }

  // Throws ScanCapExceeded if no marker is found within scan_cap sites.
  Color color_at(const Coord& x) const;

  SiteView at(const Coord& x) const {
    return color_at(x) == Color::Blue ? SiteView{Color::Blue, blue_.data()}
                                      : SiteView{Color::Red, red_.data()};
  }

  // Test hook: overrides the per-site uniforms at selected sites.
  void inject_uniforms(const std::unordered_map<Coord, double, CoordHash>* table) {
    injected_ = table;
  }

 private:
  double eps_;
  std::uint64_t seed_;
  std::int64_t scan_cap_;
  TransitionVector blue_, red_;
  const std::unordered_map<Coord, double, CoordHash>* injected_ = nullptr;
};

// JSON (de)serialization. Model schema:
//   {"d":2,"p":0.999,"mu_b":{"dirac":[...]},"mu_r":{"mixture":[{"weight":w,
//    "probs":[...]},...]},"kappa":...,"eta":2,"theta":3}
// Counterexample schema: {"epsilon":0.05,"seed":42,"scan_cap":1000}
// Parse errors throw ConfigError.
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const SiteDistribution& mu);
SiteDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CounterexampleConfig& cfg);
CounterexampleConfig counterexample_from_json(const nlohmann::json& j);

// Canonical model builders used across tests and experiments.
ModelSpec kalikow_default_spec();                       // d=2, p=0.999 two-vertex
ModelSpec opposed_drift_spec(double delta, double p);  // b=(.3,.25,.2,.25), r=(d,.25,.5-d,.25)
ModelSpec all_blue_spec(TransitionVector tv);        // p=1 homogeneous-law model

}  // namespace rwre::env
