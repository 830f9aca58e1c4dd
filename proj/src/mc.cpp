#include "rwre/mc.hpp"

#include <cmath>

#include "rwre/errors.hpp"
#include "rwre/oracle.hpp"

namespace rwre::mc {

VelocityEstimate empirical_velocity(const env::ModelSpec& spec, const double* u,
                                    std::int64_t T, std::int64_t n, std::uint64_t seed,
                                    bool track_fresh, const WalkRowSink& sink) {
  auto factory = [&](std::int64_t r) {
    return env::TaggedEnvironment(
        spec, sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r)));
  };
  return velocity_kernel(factory, spec.d, u, T, n, seed, track_fresh, sink);
}

VelocityEstimate empirical_velocity_quenched(const env::TaggedEnvironment& e,
                                             const double* u, std::int64_t T,
                                             std::int64_t n, std::uint64_t seed,
                                             bool track_fresh, const WalkRowSink& sink) {
  auto factory = [&](std::int64_t) { return e; };
  return velocity_kernel(factory, e.dim(), u, T, n, seed, track_fresh, sink);
}

VelocityEstimate empirical_velocity(const env::CounterexampleConfig& cfg,
                                    const double* u, std::int64_t T, std::int64_t n,
                                    std::uint64_t seed, bool track_fresh,
                                    const WalkRowSink& sink) {
  auto factory = [&](std::int64_t r) {
    env::CounterexampleConfig sub = cfg;
    sub.seed = sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r));
    return env::CounterexampleEnv(sub);
  };
  return velocity_kernel(factory, 2, u, T, n, seed, track_fresh, sink);
}

namespace {

// Minimal 1-d i.i.d. environment: vector over {right, left} per site.
class Env1d {
 public:
  Env1d(const SiteDistribution& mu, std::uint64_t seed)
      : mu_(&mu), seed_(mix64(seed ^ salt::kEnv)) {}
  static constexpr bool kBounded = false;
  bool in_domain(const Coord&) const { return true; }
  int dim() const { return 1; }
  SiteView at(const Coord& x) const {
    int atom = 0;
    if (!mu_->is_dirac()) {
      std::uint64_t h = site_hash(seed_, x, 1);
      atom = mu_->pick_atom(unit_double(mix64(h ^ salt::kAtom)));
    }
    return {Color::Blue, mu_->support[atom].data()};
  }

 private:
  const SiteDistribution* mu_;
  std::uint64_t seed_;
};

}  // namespace

VelocityEstimate velocity_1d(const SiteDistribution& mu, std::int64_t T,
                             std::int64_t n, std::uint64_t seed,
                             const WalkRowSink& sink) {
  Welford w;
  block_map_reduce<WalkRow>(
      n,
      [&](std::int64_t r, WalkRow& row) {
        Env1d e(mu, sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r)));
        UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
        std::int64_t pos = 0, lo = 0, hi = 0;
        for (std::int64_t t = 0; t < T; ++t) {
          Coord c;
          c.v[0] = pos;
          SiteView sv = e.at(c);
          pos += us.next() < sv.probs[0] ? 1 : -1;
          lo = std::min(lo, pos);
          hi = std::max(hi, pos);
        }
        row.t = T;
        row.disp = Coord{};
        row.disp.v[0] = pos;
        row.fresh = hi - lo;  // contiguous range: distinct sites minus one
      },
      [&](std::int64_t r, const WalkRow& row) {
        w.add(static_cast<double>(row.disp.v[0]) / static_cast<double>(T));
        if (sink) sink(r, row);
      });
  return {w.mean(), w.se(), w.n()};
}

std::vector<GreensEstimate> greens_multi(const env::ModelSpec& spec,
                                         const std::vector<Coord>& targets,
                                         Truncation trunc, std::int64_t n,
                                         std::uint64_t seed, const GreensRowSink& sink) {
  const int nt = static_cast<int>(targets.size());
  if (nt == 0 || nt > kMaxGreensTargets)
    throw PreconditionViolated("greens_multi supports 1.." +
                               std::to_string(kMaxGreensTargets) + " targets");
  const int d = spec.d, twod = 2 * d;

  struct Acc {
    Welford blue, red;
    std::array<double, kGreensBatches> batch_blue{}, batch_red{};
  };
  std::vector<Acc> acc(static_cast<std::size_t>(nt));
  Welford mean_t;

  block_map_reduce<GreensRow>(
      n,
      [&](std::int64_t r, GreensRow& row) {
        env::TaggedEnvironment e(
            spec, sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r)));
        UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
        std::int64_t horizon =
            trunc.geometric
                ? sample_geometric(trunc.rho,
                                   unit_double(mix64(sub_seed(
                                       seed, salt::kExcursion,
                                       static_cast<std::uint64_t>(r)))))
                : trunc.T;
        row = GreensRow{};
        row.t = horizon;
        for (int k = 0; k < nt; ++k) {
          row.color[k] = e.at(targets[k]).color;
          if (targets[k] == Coord{}) row.count[k] = 1;  // time-0 visit at origin
        }
        Coord pos{};
        for (std::int64_t t = 0; t < horizon; ++t) {
          SiteView sv = e.at(pos);
          pos += direction_vector(walk::pick_step(sv.probs, twod, us.next()), d);
          for (int k = 0; k < nt; ++k)
            if (pos == targets[k]) ++row.count[k];
        }
      },
      [&](std::int64_t r, const GreensRow& row) {
        mean_t.add(static_cast<double>(row.t));
        int batch = static_cast<int>(r * kGreensBatches / n);
        for (int k = 0; k < nt; ++k) {
          double cnt = static_cast<double>(row.count[k]);
          bool blue = row.color[k] == Color::Blue;
          acc[k].blue.add(blue ? cnt : 0.0);
          acc[k].red.add(blue ? 0.0 : cnt);
          (blue ? acc[k].batch_blue : acc[k].batch_red)[batch] += cnt;
        }
        if (sink) sink(r, row);
      });

  std::vector<GreensEstimate> out(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    GreensEstimate& g = out[k];
    g.x = targets[k];
    g.n = n;
    g.blue_mass = acc[k].blue.mean();
    g.red_mass = acc[k].red.mean();
    g.se_blue = acc[k].blue.se();
    g.se_red = acc[k].red.se();
    g.mean_t = mean_t.mean();
    Welford ratio;
    for (int b = 0; b < kGreensBatches; ++b)
      if (acc[k].batch_blue[b] > 0)
        ratio.add(acc[k].batch_red[b] / acc[k].batch_blue[b]);
    g.ratio_batch_mean = ratio.mean();
    g.ratio_batch_se = ratio.se();
    g.batches_used = static_cast<int>(ratio.n());
  }
  return out;
}

GreensEstimate greens_functions(const env::ModelSpec& spec, const Coord& x,
                                Truncation trunc, std::int64_t n, std::uint64_t seed) {
  return greens_multi(spec, {x}, trunc, n, seed).front();
}

MeanSE window_local_time_mc(const oracle::FiniteWindow& w, Coord start, Coord x,
                            std::int64_t T, std::int64_t n, std::uint64_t seed) {
  const int d = w.dim(), twod = 2 * d;
  Welford acc;
  block_map_reduce<std::int64_t>(
      n,
      [&](std::int64_t r, std::int64_t& count) {
        UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
        Coord pos = start;
        count = pos == x ? 1 : 0;
        for (std::int64_t t = 0; t < T; ++t) {
          SiteView sv = w.at(pos);
          pos += direction_vector(walk::pick_step(sv.probs, twod, us.next()), d);
          if (!w.in_domain(pos)) break;  // killed at the boundary
          if (pos == x) ++count;
        }
      },
      [&](std::int64_t, const std::int64_t& count) {
        acc.add(static_cast<double>(count));
      });
  return {acc.mean(), acc.se(), acc.n()};
}

}  // namespace rwre::mc

namespace rwre::ref {

mc::VelocityEstimate empirical_velocity(const env::ModelSpec& spec, const double* u,
                                        std::int64_t T, std::int64_t n,
                                        std::uint64_t seed) {
  mc::Welford w;
  for (std::int64_t r = 0; r < n; ++r) {
    env::TaggedEnvironment e(spec,
                             sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r)));
    UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
    walk::WalkRecord rec = walk::run_walk(e, Coord{}, T, us);
    w.add(dot(rec.displacement(), u, spec.d) / static_cast<double>(T));
  }
  return {w.mean(), w.se(), w.n()};
}

std::vector<mc::GreensEstimate> greens_multi(const env::ModelSpec& spec,
                                             const std::vector<Coord>& targets,
                                             mc::Truncation trunc, std::int64_t n,
                                             std::uint64_t seed) {
  // Same streams and same reduction order as the parallel kernel, but walks
  // through the record-building reference path.
  const int nt = static_cast<int>(targets.size());
  std::vector<mc::GreensEstimate> out(static_cast<std::size_t>(nt));
  struct Acc {
    mc::Welford blue, red;
    std::array<double, mc::kGreensBatches> batch_blue{}, batch_red{};
  };
  std::vector<Acc> acc(static_cast<std::size_t>(nt));
  mc::Welford mean_t;
  for (std::int64_t r = 0; r < n; ++r) {
    env::TaggedEnvironment e(spec,
                             sub_seed(seed, salt::kEnv, static_cast<std::uint64_t>(r)));
    UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
    std::int64_t horizon =
        trunc.geometric
            ? sample_geometric(trunc.rho, unit_double(mix64(sub_seed(
                                              seed, salt::kExcursion,
                                              static_cast<std::uint64_t>(r)))))
            : trunc.T;
    walk::WalkRecord rec = walk::run_walk(e, Coord{}, horizon, us);
    mean_t.add(static_cast<double>(horizon));
    int batch = static_cast<int>(r * mc::kGreensBatches / n);
    for (int k = 0; k < nt; ++k) {
      auto it = rec.local_times.find(targets[k]);
      double cnt = it == rec.local_times.end() ? 0.0 : static_cast<double>(it->second);
      bool blue = e.at(targets[k]).color == Color::Blue;
      acc[k].blue.add(blue ? cnt : 0.0);
      acc[k].red.add(blue ? 0.0 : cnt);
      (blue ? acc[k].batch_blue : acc[k].batch_red)[batch] += cnt;
    }
  }
  for (int k = 0; k < nt; ++k) {
    auto& g = out[k];
    g.x = targets[k];
    g.n = n;
    g.blue_mass = acc[k].blue.mean();
    g.red_mass = acc[k].red.mean();
    g.se_blue = acc[k].blue.se();
    g.se_red = acc[k].red.se();
    g.mean_t = mean_t.mean();
    mc::Welford ratio;
    for (int b = 0; b < mc::kGreensBatches; ++b)
      if (acc[k].batch_blue[b] > 0)
        ratio.add(acc[k].batch_red[b] / acc[k].batch_blue[b]);
    g.ratio_batch_mean = ratio.mean();
    g.ratio_batch_se = ratio.se();
    g.batches_used = static_cast<int>(ratio.n());
  }
  return out;
}

}  // namespace rwre::ref
