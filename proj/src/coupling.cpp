#include "rwre/coupling.hpp"

#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/mc.hpp"

namespace rwre::coupling {

namespace detail {

int direction_index(const Coord& step, int d) {
  for (int i = 0; i < 2 * d; ++i)
    if (step == direction_vector(i, d)) return i;
  throw PreconditionViolated("not a nearest-neighbor step");
}

double path_probability(const std::vector<Coord>& path,
                        const std::vector<const double*>& site_probs, int d) {
  double prod = 1.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    int i = direction_index(path[k + 1] - path[k], d);
    prod *= site_probs[k][i];
  }
  return prod;
}

}  // namespace detail

CoupledPair make_pair(const env::TaggedEnvironment& base, const Coord& y,
                      std::uint64_t seed) {
  CoupledPair pair;
  pair.base = &base;
  pair.y = y;
  const env::ModelSpec& spec = base.spec();
  std::uint64_t h = mix64(seed ^ salt::kAtom);
  pair.at_y_blue =
      spec.mu_b.support[spec.mu_b.pick_atom(unit_double(mix64(h ^ 0x1ull)))];
  pair.at_y_red =
      spec.mu_r.support[spec.mu_r.pick_atom(unit_double(mix64(h ^ 0x2ull)))];
  pair.identical = pair.at_y_blue == pair.at_y_red;
  return pair;
}

CouplingTrace run_coupled(const CoupledPair& pair, std::int64_t T,
                          std::uint64_t seed) {
  const int d = pair.base->dim(), twod = 2 * d;
  Omega2 w2(pair);
  Omega3 w3(pair);
  UniformStream us(sub_seed(seed, salt::kWalk, 0));

  CouplingTrace tr;
  tr.path2.reserve(static_cast<std::size_t>(T) + 1);
  tr.path2.push_back(Coord{});
  {
    Coord pos{};
    for (std::int64_t t = 0; t < T; ++t) {
      SiteView sv = w2.at(pos);
      pos += direction_vector(walk::pick_step(sv.probs, twod, us.next()), d);
      tr.path2.push_back(pos);
    }
  }
  for (const Coord& z : tr.path2)
    if (z == pair.y) ++tr.n2_at_y;

  if (pair.identical) {
    // Laws agree at y too: the walks never separate.
    tr.path3 = tr.path2;
    tr.n3_at_y = tr.n2_at_y;
    return tr;
  }

  // Splice walk 3 along walk 2's template. Each non-y template position is
  // copied; each visit to y becomes an excursion in omega3 ending at the
  // template's next position. Since every template index emits at least one
  // position, template indices never outrun walk 3's clock.
  UniformStream vs(sub_seed(seed, salt::kExcursion, 0));
  tr.path3.reserve(static_cast<std::size_t>(T) + 1);
  tr.path3.push_back(tr.path2[0]);
  std::int64_t clock = 0;  // == tr.path3.size() - 1
  std::size_t j = 0;       // template index of the current coupled position
  while (clock < T) {
    if (tr.path2[j] == pair.y) {
      Excursion ex;
      ex.tau = static_cast<std::int64_t>(j);
      const Coord target = tr.path2[j + 1];
      Coord pos = pair.y;
      bool recoupled = false;
      while (clock < T) {
        SiteView sv = w3.at(pos);
        pos += direction_vector(walk::pick_step(sv.probs, twod, vs.next()), d);
        ++ex.length;
        if (pos == target) {
          recoupled = true;
          break;
        }
        tr.path3.push_back(pos);
        ++clock;
      }
      ex.recoupled = recoupled;
      tr.excursions.push_back(ex);
      if (!recoupled) {
        tr.censored = true;
        break;
      }
      ++j;
      tr.path3.push_back(tr.path2[j]);  // == target
      ++clock;
    } else {
      ++j;
      tr.path3.push_back(tr.path2[j]);
      ++clock;
    }
  }
  for (const Coord& z : tr.path3)
    if (z == pair.y) ++tr.n3_at_y;
  return tr;
}

CoupleCounts run_coupled_counts(const CoupledPair& pair, std::int64_t T,
                                std::uint64_t seed) {
  const int d = pair.base->dim(), twod = 2 * d;
  Omega2 w2(pair);
  Omega3 w3(pair);
  UniformStream us(sub_seed(seed, salt::kWalk, 0));

  CoupleCounts c;
  std::int64_t steps2 = 0;
  // Every walk-2 position is produced exactly once through here, so counting
  // y-hits inside keeps n2 correct regardless of where the splice stops.
  auto step2 = [&](const Coord& from) {
    SiteView sv = w2.at(from);
    Coord to = from + direction_vector(walk::pick_step(sv.probs, twod, us.next()), d);
    ++steps2;
    if (to == pair.y) ++c.n2;
    return to;
  };

  Coord cur2{};
  if (cur2 == pair.y) ++c.n2;
  if (pair.identical) {
    for (std::int64_t t = 0; t < T; ++t) cur2 = step2(cur2);
    c.n3 = c.n2;
    c.end2 = cur2;
    c.end3 = cur2;
    return c;
  }

  UniformStream vs(sub_seed(seed, salt::kExcursion, 0));
  std::int64_t clock = 0;
  Coord pos3 = cur2;
  if (pos3 == pair.y) ++c.n3;
  while (clock < T) {
    if (cur2 == pair.y) {
      const Coord target = step2(cur2);  // walk 2's next template position
      ++c.excursions;
      Coord pos = pair.y;
      bool recoupled = false;
      while (clock < T) {
        SiteView sv = w3.at(pos);
        pos += direction_vector(walk::pick_step(sv.probs, twod, vs.next()), d);
        if (pos == target) {
          recoupled = true;
          break;
        }
        ++clock;
        pos3 = pos;
        if (pos == pair.y) ++c.n3;
      }
      cur2 = target;
      if (!recoupled) {
        c.censored = true;
        break;
      }
    } else {
      cur2 = step2(cur2);
    }
    ++clock;
    pos3 = cur2;
    if (cur2 == pair.y) ++c.n3;
  }
  c.end3 = pos3;
  while (steps2 < T) cur2 = step2(cur2);  // finish walk 2's own clock
  c.end2 = cur2;
  return c;
}

ExcursionStats excursion_length_stats(const CoupledPair& pair, std::int64_t T,
                                      std::int64_t n, std::uint64_t seed) {
  ExcursionStats st;
  st.histogram.assign(40, 0);
  double sum = 0;
  struct Slot {
    std::vector<Excursion> ex;
    bool censored = false;
  };
  mc::block_map_reduce<Slot>(
      n,
      [&](std::int64_t r, Slot& s) {
        CouplingTrace tr = run_coupled(
            pair, T, sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
        s.ex = std::move(tr.excursions);
        s.censored = tr.censored;
      },
      [&](std::int64_t, const Slot& s) {
        if (s.censored) {
          // Unfinished excursions say nothing about the completed-length law;
          // censored replicates are dropped from it and reported separately.
          ++st.censored_replicates;
          return;
        }
        for (const auto& ex : s.ex) {
          ++st.completed;
          sum += static_cast<double>(ex.length);
          st.max_length = std::max(st.max_length, static_cast<double>(ex.length));
          int bin = 0;
          while ((std::int64_t{1} << (bin + 1)) <= ex.length && bin < 39) ++bin;
          ++st.histogram[static_cast<std::size_t>(bin)];
        }
      });
  st.mean_length = st.completed > 0 ? sum / static_cast<double>(st.completed) : 0;
  st.censor_rate = n > 0 ? static_cast<double>(st.censored_replicates) /
                               static_cast<double>(n)
                         : 0;
  return st;
}

}  // namespace rwre::coupling
