#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unordered_map>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/errors.hpp"
#include "rwre/stats.hpp"

using namespace rwre;
using namespace rwre::env;

TEST_CASE("tagged environment is a pure function of (seed, coordinate)") {
  ModelSpec spec = kalikow_default_spec();
  TaggedEnvironment a(spec, 42), b(spec, 42), other(spec, 43);

  // Query b in reverse order: values must not depend on query history.
  std::vector<Coord> sites;
  for (int x = -20; x <= 20; x += 4)
    for (int y = -20; y <= 20; y += 4) sites.push_back(make_coord({x, y}));

  for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
    SiteView sb = b.at(*it);
    (void)sb;
  }
  for (const Coord& c : sites) {
    SiteView sa = a.at(c);
    SiteView sb = b.at(c);
    CHECK(sa.color == sb.color);
    CHECK(sa.probs == sb.probs);  // same support atom, same storage
    (void)other;
  }
  // A different seed must actually change colors; red is too rare at
  // p = 0.999 to see that on a small grid, so use a half-and-half model.
  ModelSpec half = opposed_drift_spec(0.1, 0.5);
  TaggedEnvironment h1(half, 7), h2(half, 8);
  int changed = 0;
  for (const Coord& c : sites)
    if (h1.at(c).color != h2.at(c).color) ++changed;
  CHECK(changed > 0);
}

TEST_CASE("red frequency matches 1 - p over a million sites") {
  ModelSpec spec = kalikow_default_spec();
  TaggedEnvironment e(spec, 2024);
  std::int64_t red = 0;
  const std::int64_t n = 1'000'000;
  for (std::int64_t i = 0; i < n; ++i) {
    Coord c = make_coord({i % 1000, i / 1000});
    if (e.at(c).color == Color::Red) ++red;
  }
  double mean = static_cast<double>(n) * 0.001;
  double sigma = std::sqrt(static_cast<double>(n) * 0.001 * 0.999);
  CHECK(std::abs(static_cast<double>(red) - mean) < 5.0 * sigma);
}

TEST_CASE("conditional atom frequencies match the mixture weights") {
  // Blue sites draw from a 0.3/0.7 two-atom mixture; conditioning on the
  // color, the atom counts must pass a chi-square test at 1e-6.
  ModelSpec spec;
  spec.d = 2;
  spec.p = 0.7;
  TransitionVector a1({0.4, 0.2, 0.2, 0.2});
  TransitionVector a2({0.1, 0.3, 0.3, 0.3});
  spec.mu_b = SiteDistribution::mixture({{0.3, a1}, {0.7, a2}});
  spec.mu_r = SiteDistribution::dirac(TransitionVector({0.25, 0.25, 0.25, 0.25}));
  spec.kappa = 0.1;
  spec.eta = 2;
  spec.theta = 3;
  REQUIRE(validate_model(spec).ok);

  TaggedEnvironment e(spec, 99);
  double n_blue = 0, n_atom1 = 0;
  for (int x = 0; x < 1000; ++x)
    for (int y = 0; y < 1000; ++y) {
      SiteView sv = e.at(make_coord({x, y}));
      if (sv.color != Color::Blue) continue;
      ++n_blue;
      if (sv.probs[0] == 0.4) ++n_atom1;
    }
  std::vector<double> obs{n_atom1, n_blue - n_atom1};
  std::vector<double> expd{0.3 * n_blue, 0.7 * n_blue};
  double stat = stats::chi2_statistic(obs, expd);
  CHECK(stats::chi2_sf(stat, 1) > 1e-6);
}

TEST_CASE("counterexample color rule: hand-traced marker cases") {
  CounterexampleConfig cfg;
  cfg.epsilon = 0.05;
  cfg.seed = 1;
  CounterexampleEnv e(cfg);

  std::unordered_map<Coord, double, CoordHash> table;
  SUBCASE("marker above the site is bad: red") {
    // U(0,0) = 0.9 >= eps, U(0,1) = 0.0003 < eps^2 = 0.0025: the marker of
    // (0,0) is (0,1) and it is bad, so (0,0) is red.
    table[make_coord({0, 0})] = 0.9;
    table[make_coord({0, 1})] = 0.0003;
    e.inject_uniforms(&table);
    CHECK(e.color_at(make_coord({0, 0})) == Color::Red);
    CHECK(e.at(make_coord({0, 0})).color == Color::Red);
  }
  SUBCASE("site is its own marker in the good band: blue") {
    // U(0,0) = 0.04 lies in [eps^2, eps): the site is a marker but not bad.
    table[make_coord({0, 0})] = 0.04;
    e.inject_uniforms(&table);
    CHECK(e.color_at(make_coord({0, 0})) == Color::Blue);
  }
  SUBCASE("sites sharing a marker share its color") {
    for (int b = 0; b < 4; ++b) table[make_coord({5, b})] = 0.9;
    table[make_coord({5, 4})] = 0.001;  // bad marker
    e.inject_uniforms(&table);
    for (int b = 0; b <= 4; ++b)
      CHECK(e.color_at(make_coord({5, b})) == Color::Red);

    table[make_coord({5, 4})] = 0.01;  // good marker, in [eps^2, eps)
    for (int b = 0; b <= 4; ++b)
      CHECK(e.color_at(make_coord({5, b})) == Color::Blue);
  }
}

TEST_CASE("counterexample transition vectors follow the two-class rule") {
  CounterexampleConfig cfg;
  cfg.epsilon = 0.1;
  cfg.seed = 3;
  CounterexampleEnv e(cfg);
  CHECK(e.delta() == doctest::Approx(0.01));

  std::unordered_map<Coord, double, CoordHash> table;
  table[make_coord({0, 0})] = 0.05;       // good marker: blue
  table[make_coord({1, 0})] = 0.005;      // bad marker: red
  e.inject_uniforms(&table);

  SiteView blue = e.at(make_coord({0, 0}));
  CHECK(blue.probs[0] == doctest::Approx(0.3));
  CHECK(blue.probs[2] == doctest::Approx(0.2));
  SiteView red = e.at(make_coord({1, 0}));
  CHECK(red.probs[0] == doctest::Approx(0.01));
  CHECK(red.probs[2] == doctest::Approx(0.49));
  CHECK(red.probs[1] == doctest::Approx(0.25));
}

TEST_CASE("counterexample scan cap: default and exhaustion") {
  CounterexampleConfig cfg;
  cfg.epsilon = 0.05;
  cfg.seed = 5;
  CHECK(CounterexampleEnv(cfg).scan_cap() == 1000);  // ceil(50/eps)
  cfg.epsilon = 0.3;
  CHECK(CounterexampleEnv(cfg).scan_cap() == 167);

  cfg.epsilon = 0.05;
  cfg.scan_cap = 5;
  CounterexampleEnv capped(cfg);
  std::unordered_map<Coord, double, CoordHash> table;
  for (int b = 0; b < 8; ++b) table[make_coord({7, b})] = 0.9;
  capped.inject_uniforms(&table);
  CHECK_THROWS_AS(capped.color_at(make_coord({7, 0})), ScanCapExceeded);
}

TEST_CASE("counterexample marginal red density equals epsilon") {
  // The marker uniform is U(0, eps) conditionally, so P(red) = eps^2/eps.
  for (double eps : {0.2, 0.1}) {
    CounterexampleConfig cfg;
    cfg.epsilon = eps;
    cfg.seed = 99;
    CounterexampleEnv e(cfg);
    std::int64_t red = 0, tot = 0;
    for (int a = 0; a < 600; ++a)
      for (int b = 0; b < 300; ++b) {
        if (e.color_at(make_coord({a, b})) == Color::Red) ++red;
        ++tot;
      }
    // Columns are independent and rows within a column come in marker blocks
    // of mean height 1/eps, so the effective sample is ~tot*eps blocks.
    double frac = static_cast<double>(red) / static_cast<double>(tot);
    double blocks = static_cast<double>(tot) * eps;
    double sigma = std::sqrt(eps * (1 - eps) / blocks);
    CHECK(std::abs(frac - eps) < 5.0 * sigma);
  }
}

TEST_CASE("counterexample columns are independent") {
  // Pair up disjoint columns and sample rows 200 apart (marker dependence
  // decays like (1-eps)^distance, negligible at this spacing): the both-red
  // count must match the product law eps^2.
  CounterexampleConfig cfg;
  cfg.epsilon = 0.2;
  cfg.seed = 11;
  CounterexampleEnv e(cfg);
  std::int64_t both = 0, n = 0, reds = 0;
  for (int pair = 0; pair < 100; ++pair)
    for (int row = 0; row < 50; ++row) {
      bool ra = e.color_at(make_coord({2 * pair, row * 200})) == Color::Red;
      bool rb = e.color_at(make_coord({2 * pair + 1, row * 200})) == Color::Red;
      both += (ra && rb) ? 1 : 0;
      reds += (ra ? 1 : 0) + (rb ? 1 : 0);
      ++n;
    }
  double pboth = 0.04;
  double sigma = std::sqrt(static_cast<double>(n) * pboth * (1 - pboth));
  CHECK(std::abs(static_cast<double>(both) - pboth * static_cast<double>(n)) <
        5.0 * sigma);
  double psingle = 0.2;
  double sig1 = std::sqrt(2.0 * static_cast<double>(n) * psingle * (1 - psingle));
  CHECK(std::abs(static_cast<double>(reds) -
                 2.0 * static_cast<double>(n) * psingle) < 5.0 * sig1);
}

TEST_CASE("model validation: reference models and direction-pair rules") {
  ValidationReport report = validate_model(kalikow_default_spec());
  CHECK(report.ok);
  CHECK(report.max_kappa_blue == doctest::Approx(0.0005));
  CHECK(report.max_kappa_red == doctest::Approx(0.25));
  CHECK(report.p_above_cluster_threshold);  // 0.999 > 3/4

  ValidationReport thm = validate_model(opposed_drift_spec(0.0, 0.999));
  CHECK(thm.ok);
  CHECK(thm.max_kappa_blue == doctest::Approx(0.2));
  CHECK(thm.max_kappa_red == doctest::Approx(0.25));

  ModelSpec bad = kalikow_default_spec();
  bad.eta = 1;
  bad.theta = 1;  // |eta - theta| = 0
  CHECK_FALSE(validate_model(bad).ok);
  bad.theta = 3;  // |1 - 3| = d: antiparallel pair e_3 = -e_1
  CHECK_FALSE(validate_model(bad).ok);
  bad.theta = 2;  // legal pair; the default model's red entries 0.2495/0.25 both clear kappa
  CHECK(validate_model(bad).ok);

  ModelSpec badp = kalikow_default_spec();
  badp.p = 1.5;
  CHECK_FALSE(validate_model(badp).ok);

  ModelSpec badkappa = opposed_drift_spec(0.1, 0.9);
  badkappa.kappa = 0.3;  // exceeds blue minimum 0.2
  CHECK_FALSE(validate_model(badkappa).ok);

  ModelSpec badsum = kalikow_default_spec();
  badsum.mu_b = SiteDistribution::dirac(TransitionVector({0.5, 0.25, 0.2, 0.25}));
  CHECK_FALSE(validate_model(badsum).ok);

  // Condition (C) bookkeeping: flagged only when an estimate is supplied.
  CHECK_FALSE(validate_model(kalikow_default_spec()).condition_c_assumed);
  CHECK(validate_model(kalikow_default_spec(), 0.593).condition_c_assumed);
}

TEST_CASE("model JSON round trip preserves every field") {
  ModelSpec spec;
  spec.d = 2;
  spec.p = 0.7;
  spec.mu_b = SiteDistribution::mixture(
      {{0.3, TransitionVector({0.4, 0.2, 0.2, 0.2})},
       {0.7, TransitionVector({0.1, 0.3, 0.3, 0.3})}});
  spec.mu_r = SiteDistribution::dirac(TransitionVector({0.25, 0.25, 0.25, 0.25}));
  spec.kappa = 0.1;
  spec.eta = 2;
  spec.theta = 3;

  ModelSpec back = model_from_json(to_json(spec));
  CHECK(back.d == spec.d);
  CHECK(back.p == spec.p);
  CHECK(back.kappa == spec.kappa);
  CHECK(back.eta == spec.eta);
  CHECK(back.theta == spec.theta);
  REQUIRE(back.mu_b.num_atoms() == 2);
  CHECK(back.mu_b.weights[0] == spec.mu_b.weights[0]);
  CHECK(back.mu_b.support[0] == spec.mu_b.support[0]);
  CHECK(back.mu_b.support[1] == spec.mu_b.support[1]);
  CHECK(back.mu_r.is_dirac());
  CHECK(back.mu_r.support[0] == spec.mu_r.support[0]);

  CounterexampleConfig cfg;
  cfg.epsilon = 0.05;
  cfg.seed = 42;
  cfg.scan_cap = 1000;
  CounterexampleConfig cback = counterexample_from_json(to_json(cfg));
  CHECK(cback.epsilon == cfg.epsilon);
  CHECK(cback.seed == cfg.seed);
  CHECK(cback.scan_cap == cfg.scan_cap);
}

TEST_CASE("malformed inputs raise the documented errors") {
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"d":2})")),
                  ConfigError);
  CHECK_THROWS_AS(
      distribution_from_json(nlohmann::json::parse(R"({"gaussian":[0.5]})")),
      ConfigError);
  // Structural validation is a separate pass from parsing.
  SiteDistribution neg = distribution_from_json(nlohmann::json::parse(
      R"({"mixture":[{"weight":-0.5,"probs":[0.5,0.5]},{"weight":1.5,"probs":[0.5,0.5]}]})"));
  CHECK_THROWS_AS(check_site_distribution(neg, 1), DegenerateSupport);

  CHECK_THROWS_AS(
      counterexample_from_json(nlohmann::json::parse(R"({"epsilon":0.5})")),
      ConfigError);  // seed is mandatory
  CounterexampleConfig out_of_range;
  out_of_range.epsilon = 1.5;
  CHECK_THROWS_AS(CounterexampleEnv{out_of_range}, EpsilonOutOfRange);
}
