#pragma once

// Counter-based pseudorandomness. Environments are pure functions of
// (seed, coordinate): the per-site randomness comes from a keyed integer hash,
// so two processes querying sites in different orders see identical
// environments, and replicate r's walk stream depends only on (seed, r) —
// results are bit-identical no matter how replicates are scheduled.

#include <cmath>
#include <cstdint>

#include "rwre/lattice.hpp"

namespace rwre {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double unit_double(std::uint64_t x) {
  // 53 high bits -> [0, 1)
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Domain-separation salts for the independent per-site / per-replicate uses.
namespace salt {
inline constexpr std::uint64_t kColor = 0x1bd11bdaa9fc1a22ull;
inline constexpr std::uint64_t kAtom = 0x71ee5851f2cd2f31ull;
inline constexpr std::uint64_t kWalk = 0x452821e638d01377ull;
inline constexpr std::uint64_t kEnv = 0xbe5466cf34e90c6cull;
inline constexpr std::uint64_t kExcursion = 0xc0ac29b7c97c50ddull;
inline constexpr std::uint64_t kStream = 0x3f84d5b5b5470917ull;
}  // namespace salt

inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t tag,
                              std::uint64_t index) {
  return mix64(mix64(master ^ tag) ^ index);
}

// Keyed hash of a lattice site: chain the axes through the finalizer.
inline std::uint64_t site_hash(std::uint64_t key, const Coord& c, int d) {
  std::uint64_t h = key;
  for (int i = 0; i < d; ++i)
    h = mix64(h ^ static_cast<std::uint64_t>(c.v[i]) ^
              (kGolden * static_cast<std::uint64_t>(i + 1)));
  return h;
}

// I.i.d. uniforms in counter mode: U_k is a pure function of (seed, k), so a
// stream can be replayed from any cursor, and the sequence consumed after a
// stopping time is again an i.i.d. uniform sequence (fresh counters).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : base_(mix64(seed ^ salt::kStream)) {}

  double next() { return unit_double(mix64(base_ + kGolden * ++k_)); }
  double at(std::uint64_t k) const {  // 1-based, U_1 = first draw
    return unit_double(mix64(base_ + kGolden * k));
  }
  std::uint64_t cursor() const { return k_; }
  void seek(std::uint64_t k) { k_ = k; }

 private:
  std::uint64_t base_;
  std::uint64_t k_ = 0;
};

// Geometric on {1, 2, ...} with P(tau = k) = rho (1-rho)^{k-1} via inverse CDF.
inline std::int64_t sample_geometric(double rho, double u) {
  if (rho >= 1.0) return 1;
  // ceil(log(1-u)/log(1-rho)) with guards; u in [0,1).
  double x = std::log1p(-u) / std::log1p(-rho);
  std::int64_t k = static_cast<std::int64_t>(std::ceil(x));
  return k < 1 ? 1 : k;
}

}  // namespace rwre
