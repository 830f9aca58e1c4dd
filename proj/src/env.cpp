#include "rwre/env.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rwre/errors.hpp"

namespace rwre {

void check_transition_vector(const TransitionVector& tv, int expect_d, double tol) {
  if (expect_d > 0 && tv.dim() != expect_d)
    throw InvalidDimension("transition vector has " + std::to_string(tv.p.size()) +
                           " entries, expected " + std::to_string(2 * expect_d));
  if (tv.p.size() < 2 || tv.p.size() % 2 != 0)
    throw InvalidDimension("transition vector needs an even number (>= 2) of entries");
  double sum = 0;
  for (double x : tv.p) {
    if (x < 0) throw DegenerateSupport("negative transition probability");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > tol)
    throw DegenerateSupport("transition probabilities sum to " + std::to_string(sum));
}

void check_site_distribution(const SiteDistribution& mu, int expect_d, double tol) {
  if (mu.support.empty() || mu.weights.size() != mu.support.size())
    throw DegenerateSupport("site distribution needs matching weights/support");
  double sum = 0;
  for (double w : mu.weights) {
    if (w <= 0) throw DegenerateSupport("mixture weights must be positive");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > tol)
    throw DegenerateSupport("mixture weights sum to " + std::to_string(sum));
  for (const auto& tv : mu.support) check_transition_vector(tv, expect_d, tol);
}

}  // namespace rwre

namespace rwre::env {

ValidationReport validate_model(const ModelSpec& spec,
                                std::optional<double> pc_estimate) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };

  if (spec.d < 2 || spec.d > kMaxDim)
    fail("dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) fail("p must lie in [0, 1]");

  bool structure_ok = true;
  try {
    check_site_distribution(spec.mu_b, spec.d);
  } catch (const std::exception& e) {
    structure_ok = false;
    fail(std::string("mu_b: ") + e.what());
  }
  try {
    check_site_distribution(spec.mu_r, spec.d);
  } catch (const std::exception& e) {
    structure_ok = false;
    fail(std::string("mu_r: ") + e.what());
  }

  int twod = 2 * spec.d;
  if (spec.eta < 1 || spec.eta > twod || spec.theta < 1 || spec.theta > twod) {
    fail("eta/theta must be direction indices in {1..2d}");
  } else {
    int diff = std::abs(spec.eta - spec.theta);
    if (diff == 0 || diff == spec.d)
      fail("eta/theta must name distinct, non-antiparallel directions "
           "(|eta - theta| not in {0, d})");
  }

  if (structure_ok && spec.d >= 2) {
    // Blue class: uniformly elliptic, all 2d entries of every support vector.
    double kb = 1.0;
    for (const auto& tv : spec.mu_b.support) kb = std::min(kb, tv.min_entry());
    rep.max_kappa_blue = kb;
    // Red class: elliptic only in the eta/theta directions.
    double kr = 1.0;
    if (spec.eta >= 1 && spec.eta <= twod && spec.theta >= 1 && spec.theta <= twod) {
      for (const auto& tv : spec.mu_r.support) {
        kr = std::min(kr, tv.p[spec.eta - 1]);
        kr = std::min(kr, tv.p[spec.theta - 1]);
      }
    } else {
      kr = 0.0;
    }
    rep.max_kappa_red = kr;

    if (!(spec.kappa > 0)) fail("kappa must be positive");
    if (spec.kappa > kb + 1e-15)
      fail("kappa exceeds the blue uniform-ellipticity minimum " + std::to_string(kb));
    if (spec.kappa > kr + 1e-15)
      fail("kappa exceeds the red eta/theta ellipticity minimum " + std::to_string(kr));
  }

  rep.p_above_cluster_threshold = spec.p > 1.0 - 1.0 / (2.0 * spec.d);
  rep.condition_c_assumed = pc_estimate.has_value() && spec.p > *pc_estimate;
  return rep;
}

CounterexampleEnv::CounterexampleEnv(const CounterexampleConfig& cfg)
    : eps_(cfg.epsilon), seed_(mix64(cfg.seed ^ salt::kEnv)) {
  if (!(eps_ > 0.0 && eps_ < 1.0))
    throw EpsilonOutOfRange("counterexample epsilon must lie in (0, 1)");
  scan_cap_ = cfg.scan_cap > 0
                  ? cfg.scan_cap
                  : static_cast<std::int64_t>(std::ceil(50.0 / eps_));
  double delta = eps_ * eps_;
  blue_ = TransitionVector({0.3, 0.25, 0.2, 0.25});
  red_ = TransitionVector({delta, 0.25, 0.5 - delta, 0.25});
}

Color CounterexampleEnv::color_at(const Coord& x) const {
  Coord probe = x;
  for (std::int64_t k = 0; k <= scan_cap_; ++k) {
    double u = uniform_at(probe);
    if (u < eps_) return u < eps_ * eps_ ? Color::Red : Color::Blue;
    probe.v[1] += 1;  // climb the column
  }
  std::ostringstream os;
  os << "no column marker within " << scan_cap_ << " sites above ("
     << x.v[0] << ", " << x.v[1] << ")";
  throw ScanCapExceeded(os.str());
}

nlohmann::json distribution_to_json(const SiteDistribution& mu) {
  if (mu.is_dirac()) return nlohmann::json{{"dirac", mu.support[0].p}};
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t i = 0; i < mu.num_atoms(); ++i)
    atoms.push_back({{"weight", mu.weights[i]}, {"probs", mu.support[i].p}});
  return nlohmann::json{{"mixture", atoms}};
}

SiteDistribution distribution_from_json(const nlohmann::json& j) {
  if (j.contains("dirac"))
    return SiteDistribution::dirac(
        TransitionVector(j.at("dirac").get<std::vector<double>>()));
  if (j.contains("mixture")) {
    std::vector<std::pair<double, TransitionVector>> atoms;
    for (const auto& a : j.at("mixture"))
      atoms.emplace_back(a.at("weight").get<double>(),
                         TransitionVector(a.at("probs").get<std::vector<double>>()));
    return SiteDistribution::mixture(std::move(atoms));
  }
  throw ConfigError("site distribution must have a 'dirac' or 'mixture' key");
}

nlohmann::json to_json(const ModelSpec& spec) {
  return nlohmann::json{{"d", spec.d},
                        {"p", spec.p},
                        {"mu_b", distribution_to_json(spec.mu_b)},
                        {"mu_r", distribution_to_json(spec.mu_r)},
                        {"kappa", spec.kappa},
                        {"eta", spec.eta},
                        {"theta", spec.theta}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec;
    spec.d = j.at("d").get<int>();
    spec.p = j.at("p").get<double>();
    spec.mu_b = distribution_from_json(j.at("mu_b"));
    spec.mu_r = distribution_from_json(j.at("mu_r"));
    spec.kappa = j.at("kappa").get<double>();
    spec.eta = j.at("eta").get<int>();
    spec.theta = j.at("theta").get<int>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
}

nlohmann::json to_json(const CounterexampleConfig& cfg) {
  return nlohmann::json{
      {"epsilon", cfg.epsilon}, {"seed", cfg.seed}, {"scan_cap", cfg.scan_cap}};
}

CounterexampleConfig counterexample_from_json(const nlohmann::json& j) {
  try {
    CounterexampleConfig cfg;
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scan_cap")) cfg.scan_cap = j.at("scan_cap").get<std::int64_t>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad counterexample config: ") + e.what());
  }
}

ModelSpec kalikow_default_spec() {
  ModelSpec spec;
  spec.d = 2;
  spec.p = 0.999;
  spec.mu_b = SiteDistribution::dirac(TransitionVector({0.4995, 0.25, 0.0005, 0.25}));
  spec.mu_r = SiteDistribution::dirac(TransitionVector({0.2495, 0.25, 0.2505, 0.25}));
  spec.kappa = 0.0005;
  spec.eta = 2;    // up
  spec.theta = 3;  // left (orthogonal to up; both red entries >= kappa)
  return spec;
}

ModelSpec opposed_drift_spec(double delta, double p) {
  ModelSpec spec;
  spec.d = 2;
  spec.p = p;
  spec.mu_b = SiteDistribution::dirac(TransitionVector({0.3, 0.25, 0.2, 0.25}));
  spec.mu_r =
      SiteDistribution::dirac(TransitionVector({delta, 0.25, 0.5 - delta, 0.25}));
  spec.kappa = 0.2;
  spec.eta = 3;    // left: red entry 0.5 - delta stays >= 0.2 for delta <= 0.3
  spec.theta = 4;  // down
  return spec;
}

ModelSpec all_blue_spec(TransitionVector tv) {
  ModelSpec spec;
  spec.d = tv.dim();
  spec.p = 1.0;
  spec.kappa = tv.min_entry() > 0 ? tv.min_entry() : 1e-9;
  spec.mu_b = SiteDistribution::dirac(tv);
  spec.mu_r = SiteDistribution::dirac(std::move(tv));
  spec.eta = spec.d >= 2 ? 2 * spec.d - 1 : 1;
  spec.theta = 2 * spec.d;
  return spec;
}

}  // namespace rwre::env
