#pragma once

// Replicate-parallel Monte Carlo kernels (OpenMP) and their serial reference
// implementations. Replicate r derives every random stream from (seed, r)
// alone and reductions are performed serially in replicate order, block by
// block, so estimates are bit-identical for any thread count. The `ref`
// namespace re-does the same computations through the record-building
// run_walk; tests assert the two paths agree exactly and `rwre-bench`
// compares their throughput.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/lattice.hpp"
#include "rwre/walk.hpp"

namespace rwre::oracle {
class FiniteWindow;
}

namespace rwre::mc {

inline constexpr std::int64_t kBlockSize = 4096;

// Fills slots for replicates [0,n) in parallel, consumes them serially in
// replicate order. Exceptions raised by `fill` are rethrown on the caller's
// thread after the offending block drains.
template <class Slot, class Fill, class Consume>
void block_map_reduce(std::int64_t n, Fill&& fill, Consume&& consume) {
  std::vector<Slot> buf(static_cast<std::size_t>(std::min(n, kBlockSize)));
  std::exception_ptr err = nullptr;
  std::atomic<bool> failed{false};
  for (std::int64_t b0 = 0; b0 < n; b0 += kBlockSize) {
    const std::int64_t b1 = std::min(n, b0 + kBlockSize);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = b0; r < b1; ++r) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        fill(r, buf[static_cast<std::size_t>(r - b0)]);
      } catch (...) {
#pragma omp critical(rwre_mc_err)
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    for (std::int64_t r = b0; r < b1; ++r)
      consume(r, buf[static_cast<std::size_t>(r - b0)]);
  }
}

// Streaming mean/variance (Welford). Deterministic: fed in replicate order.
class Welford {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::int64_t n() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0, m2_ = 0;
};

struct VelocityEstimate {
  double mean = 0;  // mean of displacement . u / T over replicates
  double se = 0;    // standard error of that mean
  std::int64_t n = 0;
};

// Open-addressing set of packed coordinates, for fresh-site counting in the
// hot loop (d <= 3 packing is injective at desk scale).
class FlatSet64 {
 public:
  explicit FlatSet64(std::size_t expected) {
    if (expected > 0) rehash_for(expected);
  }
  bool insert(std::uint64_t key) {
    if (2 * (size_ + 1) >= slots_.size()) rehash_for(2 * slots_.size());
    std::size_t i = static_cast<std::size_t>(mix64(key)) & mask_;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == key) return false;
      i = (i + 1) & mask_;
    }
    slots_[i] = key;
    ++size_;
    return true;
  }
  std::size_t size() const { return size_; }
  void clear() {
    std::fill(slots_.begin(), slots_.end(), kEmpty);
    size_ = 0;
  }

 private:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
  void rehash_for(std::size_t want) {
    std::size_t cap = 64;
    while (cap < 2 * want) cap <<= 1;
    std::vector<std::uint64_t> old = std::move(slots_);
    slots_.assign(cap, kEmpty);
    mask_ = cap - 1;
    size_ = 0;
    for (std::uint64_t k : old)
      if (k != kEmpty) insert(k);
  }
  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

struct WalkRow {
  std::int64_t t = 0;  // steps actually taken (T, or tau under truncation)
  Coord disp{};
  std::int64_t fresh = 0;
};

// Called serially in replicate order when a per-replicate sink is wanted
// (the CLI writes CSV rows through this).
using WalkRowSink = std::function<void(std::int64_t rep, const WalkRow&)>;

// Lean walk: displacement (and optionally the fresh-site count) only. For a
// bounded environment the walk is killed on exit and the displacement is
// taken to the last in-window position.
template <class Env>
inline WalkRow lean_walk(const Env& e, Coord start, std::int64_t T,
                         UniformStream& us, bool track_fresh) {
  const int d = e.dim(), twod = 2 * d;
  WalkRow row;
  Coord pos = start, last = start;
  FlatSet64 fresh(track_fresh ? 1024 : 0);
  if (track_fresh) fresh.insert(pack_coord(pos, d));
  for (std::int64_t t = 0; t < T; ++t) {
    SiteView sv = e.at(pos);
    pos += direction_vector(walk::pick_step(sv.probs, twod, us.next()), d);
    if constexpr (Env::kBounded) {
      if (!e.in_domain(pos)) break;
    }
    last = pos;
    row.t = t + 1;
    if (track_fresh) fresh.insert(pack_coord(pos, d));
  }
  row.disp = last - start;
  row.fresh = track_fresh ? static_cast<std::int64_t>(fresh.size()) - 1 : 0;
  return row;
}

// Generic velocity kernel over an environment factory (annealed: fresh env
// per replicate; quenched: factory returns the same env every time).
template <class EnvFactory>
VelocityEstimate velocity_kernel(EnvFactory&& make_env, int d, const double* u,
                                 std::int64_t T, std::int64_t n, std::uint64_t seed,
                                 bool track_fresh = false,
                                 const WalkRowSink& sink = nullptr) {
  Welford w;
  block_map_reduce<WalkRow>(
      n,
      [&](std::int64_t r, WalkRow& row) {
        auto e = make_env(r);
        UniformStream us(sub_seed(seed, salt::kWalk, static_cast<std::uint64_t>(r)));
        row = lean_walk(e, Coord{}, T, us, track_fresh);
      },
      [&](std::int64_t r, const WalkRow& row) {
        w.add(dot(row.disp, u, d) / static_cast<double>(T));
        if (sink) sink(r, row);
      });
  return {w.mean(), w.se(), w.n()};
}

VelocityEstimate empirical_velocity(const env::ModelSpec& spec, const double* u,
                                    std::int64_t T, std::int64_t n, std::uint64_t seed,
                                    bool track_fresh = false,
                                    const WalkRowSink& sink = nullptr);

VelocityEstimate empirical_velocity_quenched(const env::TaggedEnvironment& e,
                                             const double* u, std::int64_t T,
                                             std::int64_t n, std::uint64_t seed,
                                             bool track_fresh = false,
                                             const WalkRowSink& sink = nullptr);

VelocityEstimate empirical_velocity(const env::CounterexampleConfig& cfg,
                                    const double* u, std::int64_t T, std::int64_t n,
                                    std::uint64_t seed, bool track_fresh = false,
                                    const WalkRowSink& sink = nullptr);

// 1-d nearest-neighbor RWRE velocity (vectors over {right, left}).
VelocityEstimate velocity_1d(const SiteDistribution& mu, std::int64_t T,
                             std::int64_t n, std::uint64_t seed,
                             const WalkRowSink& sink = nullptr);

// ---- truncated Green's function estimates ------------------------------

struct Truncation {
  bool geometric = false;
  std::int64_t T = 0;  // used when !geometric
  double rho = 0;      // used when geometric
  static Truncation fixed(std::int64_t T) { return {false, T, 0}; }
  static Truncation geom(double rho) { return {true, 0, rho}; }
};

struct GreensEstimate {
  Coord x{};
  std::int64_t n = 0;
  double blue_mass = 0, red_mass = 0;  // E[N_x 1{class}] up to the truncation
  double se_blue = 0, se_red = 0;      // per-replicate standard errors
  double ratio_batch_mean = 0;         // mean over batch ratios red/blue
  double ratio_batch_se = 0;
  int batches_used = 0;
  double mean_t = 0;  // mean horizon (tau under geometric truncation)
};

inline constexpr int kGreensBatches = 100;
inline constexpr int kMaxGreensTargets = 8;

struct GreensRow {
  std::int64_t t = 0;
  std::array<std::int64_t, kMaxGreensTargets> count{};
  std::array<Color, kMaxGreensTargets> color{};
};

using GreensRowSink = std::function<void(std::int64_t rep, const GreensRow&)>;

std::vector<GreensEstimate> greens_multi(const env::ModelSpec& spec,
                                         const std::vector<Coord>& targets,
                                         Truncation trunc, std::int64_t n,
                                         std::uint64_t seed,
                                         const GreensRowSink& sink = nullptr);

GreensEstimate greens_functions(const env::ModelSpec& spec, const Coord& x,
                                Truncation trunc, std::int64_t n, std::uint64_t seed);

// Monte Carlo E[N_x^T] on an explicit finite window (kill at the boundary),
// for oracle cross-checks.
struct MeanSE {
  double mean = 0, se = 0;
  std::int64_t n = 0;
};

MeanSE window_local_time_mc(const oracle::FiniteWindow& w, Coord start, Coord x,
                            std::int64_t T, std::int64_t n, std::uint64_t seed);

}  // namespace rwre::mc

// Serial reference implementations built on the record-producing run_walk.
// Same streams, same estimates, no OpenMP: tests require bit-equality with
// the kernels above.
namespace rwre::ref {

mc::VelocityEstimate empirical_velocity(const env::ModelSpec& spec, const double* u,
                                        std::int64_t T, std::int64_t n,
                                        std::uint64_t seed);

std::vector<mc::GreensEstimate> greens_multi(const env::ModelSpec& spec,
                                             const std::vector<Coord>& targets,
                                             mc::Truncation trunc, std::int64_t n,
                                             std::uint64_t seed);

}  // namespace rwre::ref
