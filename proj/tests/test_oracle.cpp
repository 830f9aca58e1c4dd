#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/oracle.hpp"

using namespace rwre;

namespace {

oracle::FiniteWindow homogeneous_window(std::int64_t radius,
                                        std::vector<double> probs,
                                        Color color = Color::Blue) {
  oracle::WindowSite fill{color, TransitionVector(std::move(probs))};
  return oracle::FiniteWindow(make_coord({-radius, -radius}),
                              make_coord({radius, radius}), 2, fill);
}

}  // namespace

TEST_CASE("window indexing round-trips and bounds-checks") {
  auto w = homogeneous_window(2, {0.25, 0.25, 0.25, 0.25});
  CHECK(w.size() == 25);
  for (std::int64_t i = 0; i < w.size(); ++i) {
    CHECK(w.index(w.coord(i)) == i);
    CHECK(w.in_domain(w.coord(i)));
  }
  CHECK(w.in_domain(make_coord({2, -2})));
  CHECK_FALSE(w.in_domain(make_coord({3, 0})));
  CHECK_THROWS_AS(w.index(make_coord({3, 0})), OutOfWindow);
  CHECK_THROWS_AS(w.at(make_coord({0, -3})), OutOfWindow);

  // Cells are writable and visible through at().
  w.cell(make_coord({1, 1})).color = Color::Red;
  CHECK(w.at(make_coord({1, 1})).color == Color::Red);
  CHECK(w.at(make_coord({1, 0})).color == Color::Blue);

  CHECK_THROWS_AS(oracle::FiniteWindow(make_coord({1, 0}), make_coord({0, 0}), 2,
                                       oracle::WindowSite{}),
                  OutOfWindow);
  CHECK_THROWS_AS(oracle::FiniteWindow(make_coord({-2000, -2000}),
                                       make_coord({2000, 2000}), 2,
                                       oracle::WindowSite{}),
                  FeasibilityExceeded);
}

TEST_CASE("zero-horizon local time is the start indicator") {
  auto w = homogeneous_window(2, {0.3, 0.25, 0.2, 0.25});
  oracle::LocalTimeResult at_start = oracle::exact_local_time(w, Coord{}, Coord{}, 0);
  CHECK(at_start.value == 1.0);
  CHECK(at_start.mass_left == 1.0);
  CHECK(at_start.absorbed == 0.0);
  oracle::LocalTimeResult elsewhere =
      oracle::exact_local_time(w, Coord{}, make_coord({1, 0}), 0);
  CHECK(elsewhere.value == 0.0);

  CHECK_THROWS_AS(oracle::exact_local_time(w, make_coord({9, 9}), Coord{}, 1),
                  OutOfWindow);
}

TEST_CASE("two-step return mass at the origin, by hand") {
  // E[N_0^2] = 1 + 2 p_1 p_3 + 2 p_2 p_4: out-and-back along each axis.
  auto w = homogeneous_window(2, {0.3, 0.25, 0.2, 0.25});
  oracle::LocalTimeResult r = oracle::exact_local_time(w, Coord{}, Coord{}, 2);
  CHECK(r.value == doctest::Approx(1.245).epsilon(1e-12));
  CHECK(r.mass_left == doctest::Approx(1.0).epsilon(1e-12));  // radius 2 > horizon

  auto sym = homogeneous_window(2, {0.25, 0.25, 0.25, 0.25});
  CHECK(oracle::exact_local_time(sym, Coord{}, Coord{}, 2).value ==
        doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("killed-chain mass accounting on a sampled window") {
  env::ModelSpec spec = env::kalikow_default_spec();
  env::TaggedEnvironment e(spec, 909);
  auto w = oracle::FiniteWindow::sample(e, make_coord({-2, -2}), make_coord({2, 2}));

  for (std::int64_t T : {0, 1, 2, 3, 5, 8}) {
    oracle::LocalTimeResult r = oracle::exact_local_time(w, Coord{}, Coord{}, T);
    CHECK(r.mass_left + r.absorbed == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Summing E[N_x^T] over the window counts expected surviving steps:
  // sum_x N_x^T = sum_{t <= T} 1{alive at t}.
  const std::int64_t T = 4;
  double sum_local = 0;
  for (std::int64_t i = 0; i < w.size(); ++i)
    sum_local += oracle::exact_local_time(w, Coord{}, w.coord(i), T).value;
  double sum_alive = 0;
  for (std::int64_t t = 0; t <= T; ++t)
    sum_alive += oracle::exact_local_time(w, Coord{}, Coord{}, t).mass_left;
  CHECK(sum_local == doctest::Approx(sum_alive).epsilon(1e-12));
}

TEST_CASE("local-time curve matches the single-horizon values") {
  env::ModelSpec spec = env::opposed_drift_spec(0.1, 0.7);
  env::TaggedEnvironment e(spec, 321);
  auto w = oracle::FiniteWindow::sample(e, make_coord({-3, -3}), make_coord({3, 3}));
  Coord x = make_coord({1, 1});
  std::vector<double> L = oracle::local_time_curve(w, Coord{}, x, 10);
  REQUIRE(L.size() == 11);
  for (std::int64_t k = 0; k <= 10; ++k) {
    CHECK(L[static_cast<std::size_t>(k)] ==
          doctest::Approx(oracle::exact_local_time(w, Coord{}, x, k).value)
              .epsilon(1e-13));
  }
  CHECK(std::is_sorted(L.begin(), L.end()));  // local time accumulates
}

TEST_CASE("mirror symmetry of the exact local time") {
  auto w_right = homogeneous_window(3, {0.3, 0.25, 0.2, 0.25});
  auto w_left = homogeneous_window(3, {0.2, 0.25, 0.3, 0.25});
  for (std::int64_t T : {1, 3, 6}) {
    oracle::LocalTimeResult a =
        oracle::exact_local_time(w_right, Coord{}, make_coord({1, 0}), T);
    oracle::LocalTimeResult b =
        oracle::exact_local_time(w_left, Coord{}, make_coord({-1, 0}), T);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
    CHECK(a.mass_left == doctest::Approx(b.mass_left).epsilon(1e-14));
  }
}

TEST_CASE("gambler's ruin hitting probability on a strip") {
  // One-dimensional birth-death chain embedded in the strip [0,3] x {0}:
  // right 0.3, left 0.7. From 1, P(hit 3 before 0) = (1 - (7/3)) / (1 - (7/3)^3)
  // = 9/79.
  oracle::WindowSite fill{Color::Blue,
                          TransitionVector(std::vector<double>{0.3, 0.0, 0.7, 0.0})};
  oracle::FiniteWindow strip(make_coord({0, 0}), make_coord({3, 0}), 2, fill);

  double h = oracle::exact_hitting(strip, make_coord({1, 0}), make_coord({3, 0}),
                                   make_coord({0, 0}));
  CHECK(h == doctest::Approx(9.0 / 79.0).epsilon(1e-11));

  // Positive hitting time: a walk started on the taboo site is not absorbed
  // at time 0, so it contributes its first-step factor.
  double from_taboo = oracle::exact_hitting(strip, make_coord({0, 0}),
                                            make_coord({3, 0}), make_coord({0, 0}));
  CHECK(from_taboo == doctest::Approx(0.3 * 9.0 / 79.0).epsilon(1e-11));

  // Conventions and degenerate cases.
  CHECK(oracle::exact_hitting(strip, make_coord({2, 0}), make_coord({2, 0}),
                              make_coord({0, 0})) == 1.0);
  CHECK_THROWS_AS(oracle::exact_hitting(strip, make_coord({9, 0}),
                                        make_coord({3, 0}), make_coord({0, 0})),
                  OutOfWindow);
}

TEST_CASE("hitting bounds: direct step and deterministic mover") {
  auto w = homogeneous_window(3, {0.3, 0.25, 0.2, 0.25});
  // One step right is already a success.
  double h = oracle::exact_hitting(w, Coord{}, make_coord({1, 0}),
                                   make_coord({2, 2}));
  CHECK(h >= 0.3);
  CHECK(h <= 1.0);

  auto mover = homogeneous_window(3, {1.0, 0.0, 0.0, 0.0});
  CHECK(oracle::exact_hitting(mover, Coord{}, make_coord({2, 0}),
                              make_coord({0, 1})) == doctest::Approx(1.0));
}

TEST_CASE("annealed local time at tiny horizons, by hand") {
  env::ModelSpec spec = env::opposed_drift_spec(0.1, 0.9);
  Coord lo = make_coord({-2, -2}), hi = make_coord({2, 2});

  oracle::AnnealedLocalTime t0 =
      oracle::exact_annealed_local_time(spec, lo, hi, Coord{}, Coord{}, 0);
  CHECK(t0.total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t0.blue == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(t0.red == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(t0.terms == 2);  // one influencing site, two color-atom options

  // T = 1, x = e_1: P(X_1 = e_1) = p b_1 + (1-p) r_1, split by x's own class.
  oracle::AnnealedLocalTime t1 = oracle::exact_annealed_local_time(
      spec, lo, hi, Coord{}, make_coord({1, 0}), 1);
  double step_right = 0.9 * 0.3 + 0.1 * 0.1;
  CHECK(t1.total == doctest::Approx(step_right).epsilon(1e-13));
  CHECK(t1.blue == doctest::Approx(step_right * 0.9).epsilon(1e-13));
  CHECK(t1.red == doctest::Approx(step_right * 0.1).epsilon(1e-13));

  CHECK_THROWS_AS(oracle::exact_annealed_local_time(spec, make_coord({-3, -3}),
                                                    make_coord({3, 3}), Coord{},
                                                    make_coord({1, 0}), 10),
                  FeasibilityExceeded);
}

TEST_CASE("geometric annealed split equals the horizon mixture") {
  env::ModelSpec spec = env::opposed_drift_spec(0.1, 0.8);
  Coord lo = make_coord({-1, -1}), hi = make_coord({1, 1});
  const double rho = 0.9;

  oracle::AnnealedGeometric g = oracle::exact_annealed_geometric(
      spec, lo, hi, Coord{}, make_coord({1, 0}), rho);
  CHECK(g.K == 10);  // (1-rho)^K < 1e-10 first at K = 10
  CHECK(g.tail ==
        doctest::Approx(std::pow(0.1, 10) * (10 + 1 + 1.0 / rho)).epsilon(1e-12));
  CHECK(g.terms == 512);  // 2^9 colorings, Dirac site laws

  // Direct mixture of fixed-horizon annealed values against P(tau = k).
  double blue = 0, red = 0, weight = rho;
  for (std::int64_t k = 1; k <= g.K; ++k) {
    oracle::AnnealedLocalTime a = oracle::exact_annealed_local_time(
        spec, lo, hi, Coord{}, make_coord({1, 0}), k);
    blue += weight * a.blue;
    red += weight * a.red;
    weight *= 1 - rho;
  }
  CHECK(g.blue == doctest::Approx(blue).epsilon(1e-10));
  CHECK(g.red == doctest::Approx(red).epsilon(1e-10));

  CHECK_THROWS_AS(oracle::exact_annealed_geometric(spec, lo, hi, Coord{},
                                                   make_coord({1, 0}), 1.5),
                  EpsilonOutOfRange);
}
