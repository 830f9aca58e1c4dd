#include "rwre/bounds.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "rwre/errors.hpp"

namespace rwre::bounds {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TwoVertexParams two_vertex_from_model(const env::ModelSpec& spec) {
  if (spec.d != 2) {
    throw InvalidDimension("two-vertex analysis requires d = 2, got d = " +
                           std::to_string(spec.d));
  }
  if (!spec.mu_b.is_dirac() || !spec.mu_r.is_dirac()) {
    throw PreconditionViolated(
        "two-vertex analysis requires Dirac class laws");
  }
  return TwoVertexParams{spec.p, spec.mu_b.support[0], spec.mu_r.support[0]};
}

double kalikow_M(const TwoVertexParams& tv) {
  double m = 0;
  for (std::size_t i = 0; i < tv.b.p.size(); ++i) {
    double bi = tv.b.p[i];
    double ri = tv.r.p[i];
    if (ri == 0.0) {
      if (bi > 0.0) return kInf;
      continue;  // 0/0: direction unused by both classes
    }
    m = std::max(m, bi / ri);
  }
  return m;
}

namespace {

// Shared hypothesis check: blue drifts right, red drifts left.
void require_drift_signs(const TwoVertexParams& tv) {
  double db = tv.b.p[0] - tv.b.p[2];
  double dr = tv.r.p[2] - tv.r.p[0];
  if (!(db > 0.0)) {
    throw HypothesisViolated("blue vector must satisfy b1 > b3");
  }
  if (!(dr > 0.0)) {
    throw HypothesisViolated("red vector must satisfy r3 > r1");
  }
  if (!(tv.p > 0.0) || tv.p > 1.0) {
    throw HypothesisViolated("p must lie in (0, 1]");
  }
}

}  // namespace

CriterionReport kalikow_criterion(const TwoVertexParams& tv) {
  require_drift_signs(tv);
  CriterionReport rep;
  rep.M = kalikow_M(tv);
  double db = tv.b.p[0] - tv.b.p[2];
  double dr = tv.r.p[2] - tv.r.p[0];
  double q = 1.0 - tv.p;
  rep.lhs = (q == 0.0) ? kInf : tv.p * db / (q * dr);
  rep.holds = rep.lhs > rep.M;
  return rep;
}

VelocityBounds velocity_bounds(const TwoVertexParams& tv) {
  require_drift_signs(tv);
  double M = kalikow_M(tv);
  double db = tv.b.p[0] - tv.b.p[2];
  double dr = tv.r.p[2] - tv.r.p[0];
  double q = 1.0 - tv.p;
  VelocityBounds vb;
  vb.lower = (tv.p * db - q * M * dr) / (tv.p + q * M);
  vb.upper = db / (1.0 + q * (db + dr));
  return vb;
}

double prop_bound_velocity(double alpha, double v1b, double v1r) {
  if (!(alpha > 0.0)) {
    throw PreconditionViolated("occupation ratio alpha must be positive");
  }
  return (alpha * v1b + v1r) / (alpha + 1.0);
}

double p_star(double kappa, double eps, int d) {
  if (!(kappa > 0.0) || kappa > 0.5) {
    throw EpsilonOutOfRange("kappa must lie in (0, 0.5]");
  }
  if (!(eps > 0.0) || eps > 1.0) {
    throw EpsilonOutOfRange("eps must lie in (0, 1]");
  }
  if (d < 1) throw InvalidDimension("d must be positive");
  return 1.0 - std::pow(kappa, 6) * eps / (13.0 * d);
}

double epsilon_for_p(double p, double kappa, int d) {
  if (!(kappa > 0.0) || kappa > 0.5) {
    throw EpsilonOutOfRange("kappa must lie in (0, 0.5]");
  }
  if (d < 1) throw InvalidDimension("d must be positive");
  if (!(p >= 0.0) || p > 1.0) {
    throw EpsilonOutOfRange("p must lie in [0, 1]");
  }
  double eps = 13.0 * d * (1.0 - p) / std::pow(kappa, 6);
  if (eps > 1.0) {
    throw EpsilonOutOfRange(
        "p is below the perturbation threshold for every eps <= 1");
  }
  return eps;
}

std::vector<double> v_of_xi(const TransitionVector& xi) {
  int d = xi.dim();
  std::vector<double> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    v[static_cast<std::size_t>(i)] =
        xi.p[static_cast<std::size_t>(i)] -
        xi.p[static_cast<std::size_t>(i + d)];
  }
  return v;
}

double drift(const TransitionVector& xi, const double* u) {
  std::vector<double> v = v_of_xi(xi);
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * u[i];
  return s;
}

double annealed_drift(const env::ModelSpec& spec, const double* u) {
  double db = spec.mu_b.mean(
      [&](const TransitionVector& xi) { return drift(xi, u); });
  double dr = spec.mu_r.mean(
      [&](const TransitionVector& xi) { return drift(xi, u); });
  return spec.p * db + (1.0 - spec.p) * dr;
}

double solomon_velocity_1d(const SiteDistribution& mu) {
  check_site_distribution(mu, 1);
  double e_rho = 0;       // E[omega(-e1)/omega(e1)]
  double e_inv_rho = 0;   // E[omega(e1)/omega(-e1)]
  double e_log_rho = 0;
  for (std::size_t a = 0; a < mu.support.size(); ++a) {
    double w = mu.is_dirac() ? 1.0 : mu.weights[a];
    double right = mu.support[a].p[0];
    double left = mu.support[a].p[1];
    if (right <= 0.0 || left <= 0.0) {
      throw DegenerateSupport(
          "1-d velocity formula needs strictly positive jump rates");
    }
    double rho = left / right;
    e_rho += w * rho;
    e_inv_rho += w / rho;
    e_log_rho += w * std::log(rho);
  }
  if (e_log_rho < 0.0 && e_rho < 1.0) {
    return (1.0 - e_rho) / (1.0 + e_rho);
  }
  if (e_log_rho > 0.0 && e_inv_rho < 1.0) {
    return -(1.0 - e_inv_rho) / (1.0 + e_inv_rho);
  }
  return 0.0;
}

nlohmann::json bound_report_json(const TwoVertexParams& tv) {
  nlohmann::json j;
  j["p"] = tv.p;
  j["blue"] = tv.b.p;
  j["red"] = tv.r.p;
  j["M"] = kalikow_M(tv);
  try {
    CriterionReport rep = kalikow_criterion(tv);
    j["criterion_lhs"] = std::isinf(rep.lhs) ? nlohmann::json("inf")
                                             : nlohmann::json(rep.lhs);
    j["criterion_holds"] = rep.holds;
    if (rep.holds) {
      VelocityBounds vb = velocity_bounds(tv);
      j["velocity_lower"] = vb.lower;
      j["velocity_upper"] = vb.upper;
    }
  } catch (const HypothesisViolated& ex) {
    j["criterion_holds"] = false;
    j["hypothesis_error"] = ex.what();
  }
  if (std::isinf(j["M"].get<double>())) j["M"] = "inf";
  double e1[2] = {1.0, 0.0};
  env::ModelSpec spec;
  spec.d = 2;
  spec.p = tv.p;
  spec.mu_b = SiteDistribution::dirac(tv.b);
  spec.mu_r = SiteDistribution::dirac(tv.r);
  j["annealed_drift_e1"] = annealed_drift(spec, e1);
  return j;
}

}  // namespace rwre::bounds
