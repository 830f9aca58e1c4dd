#include "rwre/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rwre/bounds.hpp"
#include "rwre/cluster.hpp"
#include "rwre/coupling.hpp"
#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/mc.hpp"
#include "rwre/oracle.hpp"

namespace rwre::experiment {

namespace {

using nlohmann::json;

// ---- config plumbing -----------------------------------------------------

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing required field '") + key + "'");
  return j.at(key);
}

double get_f64(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_i64(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::int64_t get_i64_or(const json& j, const char* key, std::int64_t dflt) {
  return j.contains(key) ? get_i64(j, key) : dflt;
}

std::int64_t positive(std::int64_t v, const char* key) {
  if (v <= 0) bad(std::string("field '") + key + "' must be positive");
  return v;
}

Coord coord_from(const json& v, int d, const char* key) {
  if (!v.is_array() || static_cast<int>(v.size()) != d)
    bad(std::string("field '") + key + "' must be an array of " + std::to_string(d) +
        " integers");
  Coord c{};
  for (int i = 0; i < d; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number_integer())
      bad(std::string("field '") + key + "' must hold integers");
    c.v[i] = v[static_cast<std::size_t>(i)].get<std::int64_t>();
  }
  return c;
}

json coord_to(const Coord& c, int d) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(c.v[i]);
  return a;
}

// Resolves a model field: absent -> the two-vertex default, "kalikow_default" ->
// the same builtin by name, otherwise a full model object. Always validated.
env::ModelSpec resolve_model(const json& cfg) {
  env::ModelSpec spec;
  if (!cfg.contains("model") || cfg.at("model") == json("kalikow_default")) {
    spec = env::kalikow_default_spec();
  } else {
    spec = env::model_from_json(cfg.at("model"));
  }
  env::ValidationReport rep = env::validate_model(spec);
  if (!rep.ok) {
    std::string msg = "model validation failed:";
    for (const std::string& v : rep.violations) msg += " " + v + ";";
    bad(msg);
  }
  return spec;
}

// ---- artifact writers ------------------------------------------------------

class TextFile {
 public:
  explicit TextFile(const std::filesystem::path& path) {
    f_ = std::fopen(path.string().c_str(), "wb");
    if (!f_) bad("cannot open '" + path.string() + "' for writing");
  }
  ~TextFile() {
    if (f_) std::fclose(f_);
  }
  TextFile(const TextFile&) = delete;
  TextFile& operator=(const TextFile&) = delete;

  void raw(const char* s) { std::fputs(s, f_); }
  void num(double v) { std::fprintf(f_, "%.17g", v); }
  void num(std::int64_t v) { std::fprintf(f_, "%lld", static_cast<long long>(v)); }

  // CSV-style helpers: comma before every field except the first in a row.
  void field(double v) { sep(); num(v); }
  void field(std::int64_t v) { sep(); num(v); }
  void field(const char* s) { sep(); raw(s); }
  void end_row() {
    raw("\n");
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) raw(",");
    first_ = false;
  }
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

struct Artifacts {
  std::filesystem::path dir;
  explicit Artifacts(const std::string& output_dir) : dir(output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) bad("cannot create output directory '" + output_dir + "'");
  }
  std::filesystem::path csv() const { return dir / "results.csv"; }
  std::filesystem::path plot() const { return dir / "plot.dat"; }
  std::filesystem::path summary() const { return dir / "summary.json"; }
};

void write_summary(const Artifacts& art, const json& summary) {
  std::ofstream out(art.summary(), std::ios::binary);
  if (!out) bad("cannot open summary.json for writing");
  out << summary.dump(2) << "\n";
}

json estimate_json(const mc::VelocityEstimate& v) {
  return json{{"mean", v.mean}, {"se", v.se}, {"n", v.n}};
}

// Shared CSV/plot plumbing for the velocity experiments: per-replicate rows
// (replicate, t, displacement components, fresh count) and a running-mean
// trace for plotting.
struct VelocitySink {
  TextFile* csv;
  TextFile* plot;
  int d;
  std::int64_t stride;
  mc::Welford running;
  double horizon;
  const char* prefix_name = nullptr;  // optional leading column (counterexample)
  double prefix_value = 0;

  void header() const {
    if (prefix_name) csv->field(prefix_name);
    csv->field("replicate");
    csv->field("t");
    for (int i = 1; i <= d; ++i)
      csv->field(("dx" + std::to_string(i)).c_str());
    csv->field("fresh");
    csv->end_row();
  }

  mc::WalkRowSink sink() {
    return [this](std::int64_t rep, const mc::WalkRow& row) {
      if (prefix_name) csv->field(prefix_value);
      csv->field(rep);
      csv->field(row.t);
      for (int i = 0; i < d; ++i) csv->field(row.disp.v[i]);
      csv->field(row.fresh);
      csv->end_row();
      running.add(static_cast<double>(row.disp.v[0]) / horizon);
      if (rep % stride == 0) emit_plot(rep);
    };
  }

  void emit_plot(std::int64_t rep) {
    if (prefix_name) {
      plot->num(prefix_value);
      plot->raw(" ");
    }
    plot->num(rep + 1);
    plot->raw(" ");
    plot->num(running.mean());
    plot->raw("\n");
  }
};

// ---- individual experiments ----------------------------------------------

constexpr double kSigmas = 5.0;
constexpr double kE1[8] = {1, 0, 0, 0, 0, 0, 0, 0};

// JSON can't carry IEEE infinities (they dump as null); stringify instead.
json finite_or_string(double v) {
  return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf");
}

int run_kalikow(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  env::ModelSpec spec = resolve_model(raw);
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");
  bool track_fresh = raw.value("track_fresh", true);

  bounds::TwoVertexParams tv;
  bounds::CriterionReport crit;
  bounds::VelocityBounds vb;
  try {
    tv = bounds::two_vertex_from_model(spec);
    crit = bounds::kalikow_criterion(tv);
    vb = bounds::velocity_bounds(tv);
  } catch (const std::exception& e) {
    bad(std::string("kalikow experiment needs a two-vertex model with the "
                    "drift-sign hypotheses: ") +
        e.what());
  }
  if (!crit.holds)
    bad("ballisticity criterion fails for this model; no bounds to check");

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  VelocitySink vs{&csv, &plot, spec.d, std::max<std::int64_t>(1, n / 512),
                  mc::Welford{}, static_cast<double>(T)};
  vs.header();
  mc::VelocityEstimate vel =
      mc::empirical_velocity(spec, kE1, T, n, cfg.seed, track_fresh, vs.sink());

  bool pass = vel.mean >= vb.lower - kSigmas * vel.se &&
              vel.mean <= vb.upper + kSigmas * vel.se;
  summary["config"]["model"] = env::to_json(spec);
  summary["config"]["track_fresh"] = track_fresh;
  summary["bounds"] = {{"M", finite_or_string(crit.M)},
                       {"criterion_lhs", finite_or_string(crit.lhs)},
                       {"criterion_holds", crit.holds},
                       {"lower", vb.lower},
                       {"upper", vb.upper}};
  summary["annealed_drift_e1"] = bounds::annealed_drift(spec, kE1);
  summary["velocity"] = estimate_json(vel);
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_rare_anomaly(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  double delta = get_f64(raw, "delta");
  double p = get_f64(raw, "p");
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");
  bool track_fresh = raw.value("track_fresh", true);

  env::ModelSpec spec = env::opposed_drift_spec(delta, p);
  env::ValidationReport rep = env::validate_model(spec);
  if (!rep.ok) {
    std::string msg = "model validation failed:";
    for (const std::string& v : rep.violations) msg += " " + v + ";";
    bad(msg);
  }

  // Almost-sure lower bound on the blue quenched drift along e1.
  double v1b = 1.0;
  for (const TransitionVector& tv : spec.mu_b.support)
    v1b = std::min(v1b, bounds::drift(tv, kE1));

  // The speed guarantee applies only above the perturbation threshold; at
  // desk-scale p that threshold is astronomically close to 1, so the run
  // records whether the regime was actually reached instead of pretending.
  bool applicable = false;
  double eps = 0, pstar = 0;
  std::string note;
  try {
    if (raw.contains("eps")) {
      eps = get_f64(raw, "eps");
      pstar = bounds::p_star(spec.kappa, eps, spec.d);
      applicable = p >= pstar;
      if (!applicable) note = "p below p_star(eps): guarantee not in force";
    } else {
      eps = bounds::epsilon_for_p(p, spec.kappa, spec.d);
      pstar = bounds::p_star(spec.kappa, eps, spec.d);
      applicable = true;
    }
  } catch (const EpsilonOutOfRange& e) {
    note = std::string("threshold vacuous at this p: ") + e.what();
  }

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  VelocitySink vs{&csv, &plot, spec.d, std::max<std::int64_t>(1, n / 512),
                  mc::Welford{}, static_cast<double>(T)};
  vs.header();
  mc::VelocityEstimate vel =
      mc::empirical_velocity(spec, kE1, T, n, cfg.seed, track_fresh, vs.sink());

  bool pass = true;
  if (applicable) pass = vel.mean >= v1b - eps - kSigmas * vel.se;

  summary["config"]["model"] = env::to_json(spec);
  summary["config"]["track_fresh"] = track_fresh;
  summary["v1b"] = v1b;
  summary["kappa"] = spec.kappa;
  summary["guarantee_applicable"] = applicable;
  if (applicable) {
    summary["eps"] = eps;
    summary["p_star"] = pstar;
    summary["guaranteed_speed"] = v1b - eps;
  }
  if (!note.empty()) summary["note"] = note;
  summary["threshold_note"] = bounds::kPStarNote;
  summary["velocity"] = estimate_json(vel);
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_greens_ratio(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  env::ModelSpec spec = resolve_model(raw);
  double rho = get_f64(raw, "rho");
  if (!(rho > 0.0) || !(rho < 1.0)) bad("rho must lie in (0, 1)");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");

  std::vector<Coord> targets;
  json jt = raw.contains("targets")
                ? raw.at("targets")
                : json::array({json::array({1, 0}), json::array({2, 1}),
                               json::array({5, 0})});
  if (!jt.is_array() || jt.empty()) bad("targets must be a non-empty array");
  for (const json& t : jt) targets.push_back(coord_from(t, spec.d, "targets"));
  if (static_cast<int>(targets.size()) > mc::kMaxGreensTargets)
    bad("at most " + std::to_string(mc::kMaxGreensTargets) + " targets");

  double ratio_bound = 0;
  try {
    bounds::TwoVertexParams tv = bounds::two_vertex_from_model(spec);
    double M = bounds::kalikow_M(tv);
    ratio_bound = (1.0 - tv.p) * M / tv.p;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    bad(std::string("greens_ratio needs a two-vertex model: ") + e.what());
  }
  if (!std::isfinite(ratio_bound))
    bad("ratio bound is infinite for this model (some b_i > 0 with r_i = 0)");

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  csv.field("replicate");
  csv.field("tau");
  for (std::size_t k = 0; k < targets.size(); ++k) {
    csv.field(("count_" + std::to_string(k)).c_str());
    csv.field(("color_" + std::to_string(k)).c_str());
  }
  csv.end_row();
  const int nt = static_cast<int>(targets.size());
  mc::GreensRowSink sink = [&](std::int64_t rep, const mc::GreensRow& row) {
    csv.field(rep);
    csv.field(row.t);
    for (int k = 0; k < nt; ++k) {
      csv.field(row.count[static_cast<std::size_t>(k)]);
      csv.field(color_name(row.color[static_cast<std::size_t>(k)]));
    }
    csv.end_row();
  };
  std::vector<mc::GreensEstimate> est =
      mc::greens_multi(spec, targets, mc::Truncation::geom(rho), n, cfg.seed, sink);

  bool all_pass = true;
  json per = json::array();
  for (std::size_t k = 0; k < est.size(); ++k) {
    const mc::GreensEstimate& g = est[k];
    double rhs = ratio_bound * g.blue_mass;
    double sigma = std::sqrt(g.se_red * g.se_red +
                             ratio_bound * ratio_bound * g.se_blue * g.se_blue);
    bool pass = g.red_mass <= rhs + kSigmas * sigma;
    all_pass = all_pass && pass;
    per.push_back({{"x", coord_to(g.x, spec.d)},
                   {"blue_mass", g.blue_mass},
                   {"red_mass", g.red_mass},
                   {"se_blue", g.se_blue},
                   {"se_red", g.se_red},
                   {"bound_times_blue", rhs},
                   {"ratio_batch_mean", g.ratio_batch_mean},
                   {"ratio_batch_se", g.ratio_batch_se},
                   {"mean_tau", g.mean_t},
                   {"pass", pass}});
    plot.num(static_cast<std::int64_t>(k));
    plot.raw(" ");
    plot.num(g.red_mass);
    plot.raw(" ");
    plot.num(rhs);
    plot.raw("\n");
  }
  summary["config"]["model"] = env::to_json(spec);
  summary["config"]["targets"] = jt;
  summary["ratio_bound"] = ratio_bound;
  summary["targets"] = per;
  summary["pass"] = all_pass;
  write_summary(art, summary);
  return all_pass ? 0 : 1;
}

int run_coupling(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  double delta = get_f64(raw, "delta");
  double p = get_f64(raw, "p");
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");

  env::ModelSpec spec = env::opposed_drift_spec(delta, p);
  env::ValidationReport rep = env::validate_model(spec);
  if (!rep.ok) bad("opposed-drift model invalid for these (delta, p)");
  Coord y = raw.contains("y") ? coord_from(raw.at("y"), spec.d, "y")
                              : make_coord({1, 0});

  env::TaggedEnvironment backdrop(spec, sub_seed(cfg.seed, salt::kEnv, 0));
  coupling::CoupledPair pair = coupling::make_pair(backdrop, y, cfg.seed);
  double bound = 1.0 + std::pow(spec.kappa, -6.0);

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  csv.field("replicate");
  csv.field("n2_at_y");
  csv.field("n3_at_y");
  csv.field("excursions");
  csv.field("censored");
  csv.end_row();

  mc::Welford w2, w3, wdelta;
  std::int64_t censored = 0;
  mc::block_map_reduce<coupling::CoupleCounts>(
      n,
      [&](std::int64_t r, coupling::CoupleCounts& c) {
        c = coupling::run_coupled_counts(
            pair, T, sub_seed(cfg.seed, salt::kWalk, static_cast<std::uint64_t>(r)));
      },
      [&](std::int64_t r, const coupling::CoupleCounts& c) {
        csv.field(r);
        csv.field(c.n2);
        csv.field(c.n3);
        csv.field(c.excursions);
        csv.field(static_cast<std::int64_t>(c.censored ? 1 : 0));
        csv.end_row();
        // An excursion still open at the horizon ("censored") only means the
        // walks never recoupled; both truncated local times are complete
        // observables, so every replicate enters the comparison.
        if (c.censored) ++censored;
        double n2 = static_cast<double>(c.n2), n3 = static_cast<double>(c.n3);
        w2.add(n2);
        w3.add(n3);
        wdelta.add(n3 - bound * n2);
        plot.num(c.n2);
        plot.raw(" ");
        plot.num(c.n3);
        plot.raw("\n");
      });

  bool pass = wdelta.n() >= 2 && wdelta.mean() <= kSigmas * wdelta.se();
  summary["config"]["model"] = env::to_json(spec);
  summary["config"]["y"] = coord_to(y, spec.d);
  summary["y"] = coord_to(y, spec.d);
  summary["pair_identical"] = pair.identical;
  summary["bound"] = bound;
  summary["n2"] = json{{"mean", w2.mean()}, {"se", w2.se()}, {"n", w2.n()}};
  summary["n3"] = json{{"mean", w3.mean()}, {"se", w3.se()}, {"n", w3.n()}};
  summary["delta_stat"] =
      json{{"mean", wdelta.mean()}, {"se", wdelta.se()}, {"n", wdelta.n()}};
  summary["censored_replicates"] = censored;
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_animals(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  int d = static_cast<int>(get_i64_or(raw, "d", 2));
  if (d < 2) bad("d must be at least 2");
  std::int64_t n_max = positive(get_i64(raw, "n_max"), "n_max");

  std::vector<std::int64_t> counts;
  try {
    counts = cluster::count_animals(d, static_cast<int>(n_max));
  } catch (const FeasibilityExceeded& e) {
    bad(std::string("animal enumeration too large: ") + e.what());
  }

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  csv.field("n");
  csv.field("count");
  csv.field("bound");
  csv.end_row();
  bool pass = true;
  json rows = json::array();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t nn = static_cast<std::int64_t>(i) + 1;
    double bound = std::pow(7.0 * d, static_cast<double>(nn));
    pass = pass && static_cast<double>(counts[i]) <= bound;
    csv.field(nn);
    csv.field(counts[i]);
    csv.field(bound);
    csv.end_row();
    plot.num(nn);
    plot.raw(" ");
    plot.num(counts[i]);
    plot.raw(" ");
    plot.num(bound);
    plot.raw("\n");
    rows.push_back(counts[i]);
  }
  if (d == 2 && counts.size() >= 2) pass = pass && counts[0] == 1 && counts[1] == 4;
  summary["config"]["d"] = d;
  summary["counts"] = rows;
  summary["bound_base"] = 7 * d;
  summary["growth_rate_at_n_max"] =
      std::pow(static_cast<double>(counts.back()),
               1.0 / static_cast<double>(counts.size()));
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_counterexample(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");
  std::int64_t scan_cap = get_i64_or(raw, "scan_cap", 0);
  bool track_fresh = raw.value("track_fresh", true);

  std::vector<double> epsilons;
  if (raw.contains("epsilons")) {
    for (const json& e : raw.at("epsilons")) {
      if (!e.is_number()) bad("epsilons must be numbers");
      epsilons.push_back(e.get<double>());
    }
  } else {
    epsilons = {0.2, 0.1, 0.05};
  }
  if (epsilons.size() < 2) bad("need at least two epsilon values");
  std::sort(epsilons.rbegin(), epsilons.rend());  // largest first
  for (double e : epsilons)
    if (!(e > 0.0) || !(e < 1.0)) bad("epsilon values must lie in (0, 1)");

  // Homogeneous all-blue reference: the velocity equals the drift exactly.
  const TransitionVector blue_tv(std::vector<double>{0.3, 0.25, 0.2, 0.25});
  double reference = bounds::drift(blue_tv, kE1);

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  std::vector<mc::VelocityEstimate> vels;
  bool wrote_header = false;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    env::CounterexampleConfig ce;
    ce.epsilon = epsilons[i];
    ce.scan_cap = scan_cap;
    VelocitySink vs{&csv,          &plot, 2, std::max<std::int64_t>(1, n / 128),
                    mc::Welford{}, static_cast<double>(T)};
    vs.prefix_name = "epsilon";
    vs.prefix_value = epsilons[i];
    if (!wrote_header) {
      vs.header();
      wrote_header = true;
    }
    vels.push_back(mc::empirical_velocity(
        ce, kE1, T, n, sub_seed(cfg.seed, salt::kStream, i), track_fresh,
        vs.sink()));
  }

  auto sep2 = [&](std::size_t a, std::size_t b) {
    return std::sqrt(vels[a].se * vels[a].se + vels[b].se * vels[b].se);
  };
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < vels.size(); ++i)
    monotone = monotone &&
               vels[i + 1].mean <= vels[i].mean + kSigmas * sep2(i, i + 1);
  bool separated = vels.front().mean - vels.back().mean >
                   kSigmas * sep2(0, vels.size() - 1);
  bool below_ref = true;
  for (const mc::VelocityEstimate& v : vels)
    below_ref = below_ref && v.mean < reference - kSigmas * v.se;
  bool pass = monotone && separated && below_ref;

  json per = json::array();
  for (std::size_t i = 0; i < vels.size(); ++i)
    per.push_back({{"epsilon", epsilons[i]},
                   {"delta", epsilons[i] * epsilons[i]},
                   {"velocity", estimate_json(vels[i])}});
  summary["config"]["epsilons"] = epsilons;
  summary["config"]["scan_cap"] = scan_cap;
  summary["config"]["track_fresh"] = track_fresh;
  summary["epsilons"] = epsilons;
  summary["per_epsilon"] = per;
  summary["all_blue_reference"] = reference;
  summary["monotone_nonincreasing"] = monotone;
  summary["extremes_separated"] = separated;
  summary["below_reference"] = below_ref;
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_solomon(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");
  SiteDistribution mu = env::distribution_from_json(require(raw, "mu"));
  double analytic;
  try {
    analytic = bounds::solomon_velocity_1d(mu);
  } catch (const std::exception& e) {
    bad(std::string("bad 1-d law: ") + e.what());
  }

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  VelocitySink vs{&csv, &plot, 1, std::max<std::int64_t>(1, n / 512),
                  mc::Welford{}, static_cast<double>(T)};
  vs.header();
  mc::VelocityEstimate vel = mc::velocity_1d(mu, T, n, cfg.seed, vs.sink());

  bool pass = std::fabs(vel.mean - analytic) <= kSigmas * vel.se;
  summary["analytic_velocity"] = analytic;
  summary["velocity"] = estimate_json(vel);
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

int run_oracle_xcheck(const ExperimentConfig& cfg, json& summary) {
  const json& raw = cfg.raw;
  env::ModelSpec spec = resolve_model(raw);
  std::int64_t radius = get_i64_or(raw, "radius", 3);
  if (radius < 1 || radius > 16) bad("radius must lie in [1, 16]");
  std::int64_t T = positive(get_i64(raw, "T"), "T");
  std::int64_t n = positive(get_i64(raw, "n_walks"), "n_walks");

  Coord lo{}, hi{};
  for (int i = 0; i < spec.d; ++i) {
    lo.v[i] = -radius;
    hi.v[i] = radius;
  }
  Coord start = raw.contains("start") ? coord_from(raw.at("start"), spec.d, "start")
                                      : Coord{};
  Coord x = raw.contains("x") ? coord_from(raw.at("x"), spec.d, "x") : Coord{};

  env::TaggedEnvironment e(spec, sub_seed(cfg.seed, salt::kEnv, 0));
  oracle::FiniteWindow w = oracle::FiniteWindow::sample(e, lo, hi);
  if (!w.in_domain(start) || !w.in_domain(x)) bad("start/x outside the window");

  oracle::LocalTimeResult exact = oracle::exact_local_time(w, start, x, T);
  double residual = std::fabs(exact.mass_left + exact.absorbed - 1.0);
  mc::MeanSE est = mc::window_local_time_mc(w, start, x, T, n, cfg.seed);

  Artifacts art(cfg.output_dir);
  TextFile csv(art.csv());
  TextFile plot(art.plot());
  csv.field("k");
  csv.field("exact_cumulative_local_time");
  csv.end_row();
  std::vector<double> curve = oracle::local_time_curve(w, start, x, T);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    csv.field(static_cast<std::int64_t>(k));
    csv.field(curve[k]);
    csv.end_row();
    plot.num(static_cast<std::int64_t>(k));
    plot.raw(" ");
    plot.num(curve[k]);
    plot.raw("\n");
  }

  bool pass = std::fabs(est.mean - exact.value) <= kSigmas * est.se &&
              residual <= 1e-12;
  summary["config"]["model"] = env::to_json(spec);
  summary["config"]["radius"] = radius;
  summary["config"]["start"] = coord_to(start, spec.d);
  summary["config"]["x"] = coord_to(x, spec.d);
  summary["exact"] = {{"value", exact.value},
                      {"mass_left", exact.mass_left},
                      {"absorbed", exact.absorbed},
                      {"conservation_residual", residual}};
  summary["monte_carlo"] = {{"mean", est.mean}, {"se", est.se}, {"n", est.n}};
  summary["pass"] = pass;
  write_summary(art, summary);
  return pass ? 0 : 1;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) bad("config must be a JSON object");
  ExperimentConfig cfg;
  const json& name = require(j, "experiment");
  if (!name.is_string()) bad("'experiment' must be a string");
  cfg.experiment = name.get<std::string>();
  bool known = false;
  for (const char* n : kExperimentNames) known = known || cfg.experiment == n;
  if (!known) bad("unknown experiment '" + cfg.experiment + "'");
  const json& seed = require(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    bad("'seed' must be an integer (wall-clock seeding is not supported)");
  cfg.seed = seed.get<std::uint64_t>();
  const json& out = require(j, "output_dir");
  if (!out.is_string() || out.get<std::string>().empty())
    bad("'output_dir' must be a non-empty string");
  cfg.output_dir = out.get<std::string>();
  cfg.raw = j;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  json summary;
  summary["experiment"] = cfg.experiment;
  summary["config"] = cfg.raw;
  int code;
  if (cfg.experiment == "kalikow") code = run_kalikow(cfg, summary);
  else if (cfg.experiment == "rare_anomaly") code = run_rare_anomaly(cfg, summary);
  else if (cfg.experiment == "greens_ratio") code = run_greens_ratio(cfg, summary);
  else if (cfg.experiment == "coupling") code = run_coupling(cfg, summary);
  else if (cfg.experiment == "animals") code = run_animals(cfg, summary);
  else if (cfg.experiment == "counterexample") code = run_counterexample(cfg, summary);
  else if (cfg.experiment == "solomon") code = run_solomon(cfg, summary);
  else if (cfg.experiment == "oracle_xcheck") code = run_oracle_xcheck(cfg, summary);
  else bad("unknown experiment '" + cfg.experiment + "'");
  return {code, summary};
}

nlohmann::json run_bounds_query(const nlohmann::json& q) {
  bounds::TwoVertexParams tv;
  if (q.contains("blue") && q.contains("red")) {
    tv.p = get_f64(q, "p");
    tv.b = TransitionVector(require(q, "blue").get<std::vector<double>>());
    tv.r = TransitionVector(require(q, "red").get<std::vector<double>>());
    check_transition_vector(tv.b, 2);
    check_transition_vector(tv.r, 2);
  } else {
    tv = bounds::two_vertex_from_model(env::model_from_json(q));
  }
  json out = bounds::bound_report_json(tv);
  if (q.contains("kappa")) {
    double kappa = get_f64(q, "kappa");
    int d = static_cast<int>(get_i64_or(q, "d", 2));
    json pert;
    if (q.contains("eps")) {
      double eps = get_f64(q, "eps");
      pert["eps"] = eps;
      pert["p_star"] = bounds::p_star(kappa, eps, d);
    } else {
      double eps = bounds::epsilon_for_p(tv.p, kappa, d);
      pert["eps"] = eps;
      pert["p_star"] = bounds::p_star(kappa, eps, d);
    }
    pert["note"] = bounds::kPStarNote;
    out["perturbation"] = pert;
  }
  return out;
}

namespace {

// Window spec for oracle queries: sampled from a model
//   {"lo":[...],"hi":[...],"model":{...},"env_seed":n}
// or explicit
//   {"lo":[...],"hi":[...],"default":{"color":c,"probs":[...]},
//    "sites":[{"coord":[...],"color":c,"probs":[...]},...]}
oracle::FiniteWindow window_from_json(const json& jw) {
  if (!jw.is_object()) bad("'window' must be an object");
  if (jw.contains("model")) {
    env::ModelSpec spec = env::model_from_json(jw.at("model"));
    int d = spec.d;
    Coord lo = coord_from(require(jw, "lo"), d, "lo");
    Coord hi = coord_from(require(jw, "hi"), d, "hi");
    std::uint64_t env_seed = require(jw, "env_seed").get<std::uint64_t>();
    env::TaggedEnvironment e(spec, env_seed);
    return oracle::FiniteWindow::sample(e, lo, hi);
  }
  const json& dflt = require(jw, "default");
  auto site_from = [](const json& js) {
    oracle::WindowSite s;
    std::string c = require(js, "color").get<std::string>();
    if (c != "blue" && c != "red") bad("color must be 'blue' or 'red'");
    s.color = c == "blue" ? Color::Blue : Color::Red;
    s.tv = TransitionVector(require(js, "probs").get<std::vector<double>>());
    return s;
  };
  oracle::WindowSite fill = site_from(dflt);
  int d = fill.tv.dim();
  check_transition_vector(fill.tv, d);
  Coord lo = coord_from(require(jw, "lo"), d, "lo");
  Coord hi = coord_from(require(jw, "hi"), d, "hi");
  oracle::FiniteWindow w(lo, hi, d, fill);
  if (jw.contains("sites")) {
    for (const json& js : jw.at("sites")) {
      oracle::WindowSite s = site_from(js);
      check_transition_vector(s.tv, d);
      w.cell(coord_from(require(js, "coord"), d, "coord")) = s;
    }
  }
  return w;
}

}  // namespace

nlohmann::json run_oracle_query(const nlohmann::json& q) {
  std::string op = require(q, "op").get<std::string>();
  json out;
  out["op"] = op;
  if (op == "exact_local_time" || op == "local_time_curve") {
    oracle::FiniteWindow w = window_from_json(require(q, "window"));
    int d = w.dim();
    Coord start = coord_from(require(q, "start"), d, "start");
    Coord x = coord_from(require(q, "x"), d, "x");
    std::int64_t T = positive(get_i64(q, "T"), "T");
    if (op == "exact_local_time") {
      oracle::LocalTimeResult r = oracle::exact_local_time(w, start, x, T);
      out["value"] = r.value;
      out["mass_left"] = r.mass_left;
      out["absorbed"] = r.absorbed;
    } else {
      out["curve"] = oracle::local_time_curve(w, start, x, T);
    }
  } else if (op == "exact_hitting") {
    oracle::FiniteWindow w = window_from_json(require(q, "window"));
    int d = w.dim();
    Coord from = coord_from(require(q, "from"), d, "from");
    Coord target = coord_from(require(q, "target"), d, "target");
    Coord taboo = coord_from(require(q, "taboo"), d, "taboo");
    out["value"] = oracle::exact_hitting(w, from, target, taboo);
  } else if (op == "annealed_local_time") {
    env::ModelSpec spec = env::model_from_json(require(q, "model"));
    Coord lo = coord_from(require(q, "lo"), spec.d, "lo");
    Coord hi = coord_from(require(q, "hi"), spec.d, "hi");
    Coord start = coord_from(require(q, "start"), spec.d, "start");
    Coord x = coord_from(require(q, "x"), spec.d, "x");
    std::int64_t T = positive(get_i64(q, "T"), "T");
    oracle::AnnealedLocalTime r =
        oracle::exact_annealed_local_time(spec, lo, hi, start, x, T);
    out["total"] = r.total;
    out["blue"] = r.blue;
    out["red"] = r.red;
    out["terms"] = r.terms;
  } else if (op == "annealed_geometric") {
    env::ModelSpec spec = env::model_from_json(require(q, "model"));
    Coord lo = coord_from(require(q, "lo"), spec.d, "lo");
    Coord hi = coord_from(require(q, "hi"), spec.d, "hi");
    Coord start = coord_from(require(q, "start"), spec.d, "start");
    Coord x = coord_from(require(q, "x"), spec.d, "x");
    double rho = get_f64(q, "rho");
    if (!(rho > 0.0) || !(rho < 1.0)) bad("rho must lie in (0, 1)");
    double tail_cut = q.contains("tail_cut") ? get_f64(q, "tail_cut") : 1e-10;
    oracle::AnnealedGeometric r =
        oracle::exact_annealed_geometric(spec, lo, hi, start, x, rho, tail_cut);
    out["blue"] = r.blue;
    out["red"] = r.red;
    out["K"] = r.K;
    out["tail"] = r.tail;
    out["terms"] = r.terms;
  } else {
    bad("unknown oracle op '" + op + "'");
  }
  return out;
}

}  // namespace rwre::experiment
