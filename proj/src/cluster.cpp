#include "rwre/cluster.hpp"

#include <set>
#include <string>

namespace rwre::cluster {

namespace detail {
bool sorted_contains(const std::vector<Coord>& v, const Coord& c) {
  auto it = std::lower_bound(v.begin(), v.end(), c);
  return it != v.end() && *it == c;
}
}  // namespace detail

StepSet step_set_for(int d, int eta, int theta) {
  if (d < 2) throw InvalidDimension("step set needs d >= 2");
  int twod = 2 * d;
  if (eta < 1 || eta > twod || theta < 1 || theta > twod)
    throw InvalidDimension("eta/theta must lie in {1..2d}");
  int diff = std::abs(eta - theta);
  if (diff == 0 || diff == d)
    throw InvalidDimension("eta/theta must be distinct and not antiparallel");

  auto dir = [d](int i) { return direction_vector(i - 1, d); };  // 1-based
  int opp_theta = theta <= d ? theta + d : theta - d;

  StepSet S;
  S.d = d;
  S.eta = eta;
  S.theta = theta;
  S.steps.push_back(dir(eta));
  S.steps.push_back(dir(opp_theta));
  for (int j = 1; j <= twod; ++j) {
    if (j == theta || j == opp_theta) continue;
    S.steps.push_back(dir(opp_theta) + dir(j));
  }
  return S;
}

StepSet step_set(int d) { return step_set_for(d, 2 * d - 1, 2 * d); }

std::vector<Coord> boundary_of(const std::vector<Coord>& C, const StepSet& S) {
  std::vector<Coord> sorted = C;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Coord> out;
  for (const Coord& y : sorted)
    for (const Coord& s : S.steps) {
      Coord z = y + s;
      if (!detail::sorted_contains(sorted, z)) out.push_back(z);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<std::vector<std::vector<Coord>>> grow_levels(int d, int n_max,
                                                         std::int64_t max_count) {
  // Level k holds every S-connected-from-origin set of size k+1 containing
  // the origin, each stored sorted. Growth: add any boundary site; any valid
  // set arises this way (order its members by BFS depth from the origin).
  StepSet S = step_set(d);
  std::vector<std::vector<std::vector<Coord>>> levels;
  levels.push_back({{Coord{}}});
  std::int64_t total = 1;
  for (int n = 2; n <= n_max; ++n) {
    std::set<std::vector<Coord>> next;
    for (const auto& C : levels.back()) {
      for (const Coord& b : boundary_of(C, S)) {
        std::vector<Coord> grown = C;
        grown.insert(std::lower_bound(grown.begin(), grown.end(), b), b);
        next.insert(std::move(grown));
        if (static_cast<std::int64_t>(next.size()) + total > max_count)
          throw FeasibilityExceeded("animal enumeration exceeded " +
                                    std::to_string(max_count) + " sets");
      }
    }
    total += static_cast<std::int64_t>(next.size());
    levels.emplace_back(next.begin(), next.end());
  }
  return levels;
}

}  // namespace

std::vector<std::int64_t> count_animals(int d, int n_max, std::int64_t max_count) {
  auto levels = grow_levels(d, n_max, max_count);
  std::vector<std::int64_t> counts;
  for (const auto& lvl : levels)
    counts.push_back(static_cast<std::int64_t>(lvl.size()));
  return counts;
}

std::vector<std::vector<Coord>> enumerate_animals(int d, int n,
                                                  std::int64_t max_count) {
  return grow_levels(d, n, max_count).back();
}

}  // namespace rwre::cluster
