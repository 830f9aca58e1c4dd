#pragma once

// Z^d lattice primitives. Directions are indexed 1..2d with the convention
// e_{i+d} = -e_i for 1 <= i <= d, so for d=2: e_1=right, e_2=up, e_3=left,
// e_4=down. Internally direction indices are 0-based (0..2d-1).

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>

namespace rwre {

inline constexpr int kMaxDim = 8;

struct Coord {
  // Only the first d lanes are meaningful; unused lanes stay zero, which
  // makes comparison, hashing and arithmetic dimension-agnostic.
  std::array<std::int64_t, kMaxDim> v{};

  std::int64_t& operator[](int i) { return v[i]; }
  std::int64_t operator[](int i) const { return v[i]; }

  friend bool operator==(const Coord& a, const Coord& b) { return a.v == b.v; }
  friend bool operator!=(const Coord& a, const Coord& b) { return a.v != b.v; }
  friend bool operator<(const Coord& a, const Coord& b) { return a.v < b.v; }

  Coord& operator+=(const Coord& o) {
    for (int i = 0; i < kMaxDim; ++i) v[i] += o.v[i];
    return *this;
  }
  friend Coord operator+(Coord a, const Coord& b) { return a += b; }
  Coord& operator-=(const Coord& o) {
    for (int i = 0; i < kMaxDim; ++i) v[i] -= o.v[i];
    return *this;
  }
  friend Coord operator-(Coord a, const Coord& b) { return a -= b; }
};

inline Coord make_coord(std::initializer_list<std::int64_t> xs) {
  Coord c;
  int i = 0;
  for (auto x : xs) c.v[i++] = x;
  return c;
}

// Unit step for 0-based direction index i in [0, 2d).
inline Coord direction_vector(int i, int d) {
  Coord c;
  if (i < d)
    c.v[i] = 1;
  else
    c.v[i - d] = -1;
  return c;
}

inline int opposite_direction(int i, int d) { return i < d ? i + d : i - d; }

inline std::int64_t l1_norm(const Coord& c, int d) {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) s += std::llabs(c.v[i]);
  return s;
}

inline double dot(const Coord& c, const double* u, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += static_cast<double>(c.v[i]) * u[i];
  return s;
}

// Exact packing, injective for |coord| <= 2^20 per axis when d <= 3
// (21 bits per axis, offset to unsigned). Used for hash keys and flat sets.
inline std::uint64_t pack_coord(const Coord& c, int d) {
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  std::uint64_t key = 0;
  if (d <= 3) {
    for (int i = 0; i < d; ++i)
      key = (key << 21) | static_cast<std::uint64_t>(c.v[i] + kOffset);
    return key;
  }
  // d >= 4: fold axes together; not injective in principle, used only for
  // hashing (never as an identity) at this dimension.
  for (int i = 0; i < d; ++i) {
    key ^= static_cast<std::uint64_t>(c.v[i]) + 0x9e3779b97f4a7c15ull +
           (key << 6) + (key >> 2);
  }
  return key;
}

struct CoordHash {
  std::size_t operator()(const Coord& c) const {
    std::uint64_t h = 0x243f6a8885a308d3ull;
    for (int i = 0; i < kMaxDim; ++i) {
      std::uint64_t x = static_cast<std::uint64_t>(c.v[i]);
      x *= 0xff51afd7ed558ccdull;
      x ^= x >> 33;
      h = (h ^ x) * 0xc4ceb9fe1a85ec53ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

}  // namespace rwre
