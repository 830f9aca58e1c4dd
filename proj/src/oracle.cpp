#include "rwre/oracle.hpp"

#include <cmath>
#include <string>

#include "rwre/errors.hpp"

namespace rwre::oracle {

FiniteWindow::FiniteWindow(Coord lo, Coord hi, int d, WindowSite fill)
    : lo_(lo), hi_(hi), d_(d) {
  if (d < 1 || d > kMaxDim) throw InvalidDimension("window dimension out of range");
  std::int64_t total = 1;
  strides_.assign(static_cast<std::size_t>(d), 1);
  for (int i = d - 1; i >= 0; --i) {
    std::int64_t extent = hi.v[i] - lo.v[i] + 1;
    if (extent <= 0) throw OutOfWindow("window has empty extent on some axis");
    strides_[static_cast<std::size_t>(i)] = total;
    total *= extent;
    if (total > 4'000'000) throw FeasibilityExceeded("window too large");
  }
  sites_.assign(static_cast<std::size_t>(total), fill);
}

std::int64_t FiniteWindow::index(const Coord& x) const {
  if (!in_domain(x)) throw OutOfWindow("coordinate outside the window");
  std::int64_t idx = 0;
  for (int i = 0; i < d_; ++i)
    idx += (x.v[i] - lo_.v[i]) * strides_[static_cast<std::size_t>(i)];
  return idx;
}

Coord FiniteWindow::coord(std::int64_t idx) const {
  Coord x;
  for (int i = 0; i < d_; ++i) {
    std::int64_t s = strides_[static_cast<std::size_t>(i)];
    x.v[i] = lo_.v[i] + idx / s;
    idx %= s;
  }
  return x;
}

namespace {

// One step of the occupation-vector recursion; returns the absorbed mass.
double push_mass(const FiniteWindow& w, const std::vector<double>& cur,
                 std::vector<double>& nxt) {
  const int d = w.dim(), twod = 2 * d;
  std::fill(nxt.begin(), nxt.end(), 0.0);
  double absorbed = 0;
  for (std::int64_t i = 0; i < w.size(); ++i) {
    double m = cur[static_cast<std::size_t>(i)];
    if (m == 0) continue;
    Coord x = w.coord(i);
    const double* probs = w.at(x).probs;
    for (int k = 0; k < twod; ++k) {
      if (probs[k] == 0) continue;
      Coord y = x + direction_vector(k, d);
      if (w.in_domain(y))
        nxt[static_cast<std::size_t>(w.index(y))] += m * probs[k];
      else
        absorbed += m * probs[k];
    }
  }
  return absorbed;
}

}  // namespace

std::vector<double> local_time_curve(const FiniteWindow& w, const Coord& start,
                                     const Coord& x, std::int64_t K) {
  if (!w.in_domain(start) || !w.in_domain(x))
    throw OutOfWindow("start and target must lie inside the window");
  std::vector<double> cur(static_cast<std::size_t>(w.size()), 0.0);
  std::vector<double> nxt(cur.size(), 0.0);
  cur[static_cast<std::size_t>(w.index(start))] = 1.0;
  std::size_t xi = static_cast<std::size_t>(w.index(x));
  std::vector<double> L(static_cast<std::size_t>(K) + 1);
  double acc = cur[xi];
  L[0] = acc;
  for (std::int64_t k = 1; k <= K; ++k) {
    push_mass(w, cur, nxt);
    cur.swap(nxt);
    acc += cur[xi];
    L[static_cast<std::size_t>(k)] = acc;
  }
  return L;
}

LocalTimeResult exact_local_time(const FiniteWindow& w, const Coord& start,
                                 const Coord& x, std::int64_t T) {
  if (!w.in_domain(start) || !w.in_domain(x))
    throw OutOfWindow("start and target must lie inside the window");
  LocalTimeResult res;
  std::vector<double> cur(static_cast<std::size_t>(w.size()), 0.0);
  std::vector<double> nxt(cur.size(), 0.0);
  cur[static_cast<std::size_t>(w.index(start))] = 1.0;
  std::size_t xi = static_cast<std::size_t>(w.index(x));
  res.value = cur[xi];
  for (std::int64_t t = 0; t < T; ++t) {
    res.absorbed += push_mass(w, cur, nxt);
    cur.swap(nxt);
    res.value += cur[xi];
  }
  for (double m : cur) res.mass_left += m;
  return res;
}

double exact_hitting(const FiniteWindow& w, const Coord& from, const Coord& target,
                     const Coord& taboo, double tol, std::int64_t max_iter) {
  if (!w.in_domain(from) || !w.in_domain(target))
    throw OutOfWindow("hitting endpoints must lie inside the window");
  if (from == target) return 1.0;

  const int d = w.dim(), twod = 2 * d;
  // h(z) = P_z(hit target before taboo/boundary), absorbing at both.
  std::vector<double> h(static_cast<std::size_t>(w.size()), 0.0);
  std::int64_t ti = w.index(target);
  std::int64_t bi = w.in_domain(taboo) ? w.index(taboo) : -1;
  h[static_cast<std::size_t>(ti)] = 1.0;

  auto one_step = [&](const Coord& z) {
    const double* probs = w.at(z).probs;
    double s = 0;
    for (int k = 0; k < twod; ++k) {
      if (probs[k] == 0) continue;
      Coord y = z + direction_vector(k, d);
      if (!w.in_domain(y)) continue;  // killed: contributes 0
      s += probs[k] * h[static_cast<std::size_t>(w.index(y))];
    }
    return s;
  };

  double delta = 1.0;
  for (std::int64_t it = 0; it < max_iter && delta > tol; ++it) {
    delta = 0;
    for (std::int64_t i = 0; i < w.size(); ++i) {
      if (i == ti || i == bi) continue;  // absorbing cells
      double v = one_step(w.coord(i));
      delta = std::max(delta, std::fabs(v - h[static_cast<std::size_t>(i)]));
      h[static_cast<std::size_t>(i)] = v;  // Gauss-Seidel update in place
    }
  }
  // The start is special-cased so a taboo start is not absorbed at time 0.
  return one_step(from);
}

namespace {

struct SiteOption {
  Color color;
  double weight;
  const TransitionVector* tv;
};

}  // namespace

AnnealedLocalTime exact_annealed_local_time(const env::ModelSpec& spec, Coord lo,
                                            Coord hi, const Coord& start,
                                            const Coord& x, std::int64_t T,
                                            std::int64_t max_terms) {
  FiniteWindow w(lo, hi, spec.d, WindowSite{Color::Blue, spec.mu_b.support[0]});
  // Sites whose class or vector can matter: within T-1 steps of the start
  // (their vector can be stepped from), plus x (its class is the indicator).
  std::vector<Coord> relevant;
  for (std::int64_t i = 0; i < w.size(); ++i) {
    Coord z = w.coord(i);
    if (l1_norm(z - start, spec.d) <= std::max<std::int64_t>(T - 1, 0) || z == x)
      relevant.push_back(z);
  }

  std::vector<SiteOption> options;
  for (std::size_t a = 0; a < spec.mu_b.num_atoms(); ++a)
    options.push_back(
        {Color::Blue, spec.p * spec.mu_b.weights[a], &spec.mu_b.support[a]});
  for (std::size_t a = 0; a < spec.mu_r.num_atoms(); ++a)
    options.push_back(
        {Color::Red, (1 - spec.p) * spec.mu_r.weights[a], &spec.mu_r.support[a]});

  double per_site = static_cast<double>(options.size());
  double predicted = std::pow(per_site, static_cast<double>(relevant.size()));
  if (predicted > static_cast<double>(max_terms))
    throw FeasibilityExceeded("annealed enumeration needs " +
                              std::to_string(predicted) + " terms");

  AnnealedLocalTime out;
  std::vector<std::size_t> pick(relevant.size(), 0);
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < relevant.size(); ++i) {
      const SiteOption& opt = options[pick[i]];
      weight *= opt.weight;
      WindowSite& cell = w.cell(relevant[i]);
      cell.color = opt.color;
      cell.tv = *opt.tv;
    }
    ++out.terms;
    if (weight > 0) {
      double v = exact_local_time(w, start, x, T).value;
      out.total += weight * v;
      if (w.cell(x).color == Color::Blue)
        out.blue += weight * v;
      else
        out.red += weight * v;
    }
    // odometer increment
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < options.size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  return out;
}

AnnealedGeometric exact_annealed_geometric(const env::ModelSpec& spec, Coord lo,
                                           Coord hi, const Coord& start,
                                           const Coord& x, double rho,
                                           double tail_cut, std::int64_t max_terms) {
  if (!(rho > 0 && rho < 1))
    throw EpsilonOutOfRange("geometric truncation needs rho in (0, 1)");
  FiniteWindow w(lo, hi, spec.d, WindowSite{Color::Blue, spec.mu_b.support[0]});
  std::int64_t K =
      static_cast<std::int64_t>(std::ceil(std::log(tail_cut) / std::log1p(-rho)));
  K = std::max<std::int64_t>(K, 1);

  // Within the window every site can matter at geometric horizons.
  std::vector<Coord> relevant;
  for (std::int64_t i = 0; i < w.size(); ++i) relevant.push_back(w.coord(i));

  std::vector<SiteOption> options;
  for (std::size_t a = 0; a < spec.mu_b.num_atoms(); ++a)
    options.push_back(
        {Color::Blue, spec.p * spec.mu_b.weights[a], &spec.mu_b.support[a]});
  for (std::size_t a = 0; a < spec.mu_r.num_atoms(); ++a)
    options.push_back(
        {Color::Red, (1 - spec.p) * spec.mu_r.weights[a], &spec.mu_r.support[a]});

  double predicted =
      std::pow(static_cast<double>(options.size()), static_cast<double>(relevant.size()));
  if (predicted > static_cast<double>(max_terms))
    throw FeasibilityExceeded("annealed enumeration needs " +
                              std::to_string(predicted) + " terms");

  // Geometric weights over horizons 1..K.
  std::vector<double> ptau(static_cast<std::size_t>(K) + 1, 0.0);
  {
    double g = rho;
    for (std::int64_t k = 1; k <= K; ++k) {
      ptau[static_cast<std::size_t>(k)] = g;
      g *= 1 - rho;
    }
  }

  AnnealedGeometric out;
  out.K = K;
  out.tail = std::pow(1 - rho, static_cast<double>(K)) *
             (static_cast<double>(K) + 1.0 + 1.0 / rho);

  std::vector<std::size_t> pick(relevant.size(), 0);
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < relevant.size(); ++i) {
      const SiteOption& opt = options[pick[i]];
      weight *= opt.weight;
      WindowSite& cell = w.cell(relevant[i]);
      cell.color = opt.color;
      cell.tv = *opt.tv;
    }
    ++out.terms;
    if (weight > 0) {
      std::vector<double> L = local_time_curve(w, start, x, K);
      double mixed = 0;
      for (std::int64_t k = 1; k <= K; ++k)
        mixed += ptau[static_cast<std::size_t>(k)] * L[static_cast<std::size_t>(k)];
      if (w.cell(x).color == Color::Blue)
        out.blue += weight * mixed;
      else
        out.red += weight * mixed;
    }
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < options.size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  return out;
}

}  // namespace rwre::oracle
