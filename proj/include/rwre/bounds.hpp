#pragma once

// Closed-form drift and velocity analysis for the two-vertex model on Z^2
// (direction order right/up/left/down), occupation-ratio velocity bounds,
// the perturbation threshold p*(epsilon), and the classical 1-d velocity
// formula used as an external cross-check.

#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/env.hpp"
#include "rwre/types.hpp"

namespace rwre::bounds {

struct TwoVertexParams {
  double p = 1.0;        // P(blue)
  TransitionVector b;    // blue vector (b1..b4)
  TransitionVector r;    // red vector (r1..r4)
};

// Extracts the two-vertex parameters from a d=2 Dirac/Dirac model.
TwoVertexParams two_vertex_from_model(const env::ModelSpec& spec);

// M = max_i b_i / r_i. A vanishing r_i with b_i > 0 gives +infinity (the
// criterion then never holds); 0/0 entries contribute nothing.
double kalikow_M(const TwoVertexParams& tv);

struct CriterionReport {
  double M = 0;
  double lhs = 0;  // p (b1 - b3) / ((1-p) (r3 - r1))
  bool holds = false;
};

// Ballisticity criterion. Requires the drift-sign hypotheses b1 > b3 and
// r3 > r1 (throws HypothesisViolated otherwise); p = 1 makes the left side
// +infinity and the criterion holds whenever M is finite.
CriterionReport kalikow_criterion(const TwoVertexParams& tv);

struct VelocityBounds {
  double lower = 0;  // (p(b1-b3) - (1-p) M (r3-r1)) / (p + (1-p) M)
  double upper = 0;  // (b1-b3) / (1 + (1-p)((b1-b3) + (r3-r1)))
};

// Valid when the criterion holds (same hypotheses; throws otherwise).
VelocityBounds velocity_bounds(const TwoVertexParams& tv);

// Occupation-ratio velocity bound: if blue local-time mass dominates
// alpha times red mass, the limiting velocity is at least
// alpha/(alpha+1) v1b + 1/(alpha+1) v1r.
double prop_bound_velocity(double alpha, double v1b, double v1r);

// Perturbation threshold: p*(kappa, eps, d) = 1 - kappa^6 eps / (13 d), and
// its inverse eps(p) = 13 d (1-p) / kappa^6. The guarantee depends on eps
// only (not on the blue drift), which the report string records.
double p_star(double kappa, double eps, int d);
double epsilon_for_p(double p, double kappa, int d);
inline constexpr const char* kPStarNote =
    "speed guarantee v1b - eps uses the epsilon-only threshold formula; no "
    "dependence on the blue drift enters p*";

// Local drift of a transition vector: component i is xi(e_i) - xi(e_{i+d}).
std::vector<double> v_of_xi(const TransitionVector& xi);
double drift(const TransitionVector& xi, const double* u);
// p E_mu_b[drift . u] + (1-p) E_mu_r[drift . u]
double annealed_drift(const env::ModelSpec& spec, const double* u);

// 1-d velocity for an i.i.d. nearest-neighbor environment with finite-support
// law mu over (omega(e1), omega(-e1)): with rho-hat = omega(-e1)/omega(e1),
//   E[log rho-hat] < 0 and E[rho-hat] < 1  ->  (1 - E[rho-hat]) / (1 + E[rho-hat])
//   E[log rho-hat] > 0 and E[1/rho-hat] < 1 -> -(1 - E[1/rho-hat]) / (1 + E[1/rho-hat])
//   otherwise 0.
// Throws DegenerateSupport if some support vector has a zero component.
double solomon_velocity_1d(const SiteDistribution& mu);

// Full analytic report for the CLI `bounds` subcommand.
nlohmann::json bound_report_json(const TwoVertexParams& tv);

}  // namespace rwre::bounds
