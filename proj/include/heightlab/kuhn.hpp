#pragma once

// Lattice points and Kuhn simplices C(v, perm) of scale l.

#include "heightlab/rational.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace heightlab {

using LatticePoint = std::vector<std::int64_t>;

struct PointHash {
  std::size_t operator()(const LatticePoint& z) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto c : z) {
      h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Coordinate-sum parity, 0 or 1.
inline int parity(std::span<const std::int64_t> z) {
  std::int64_t s = 0;
  for (auto c : z) s += c;
  return static_cast<int>(((s % 2) + 2) % 2);
}

inline std::int64_t l1_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return d;
}

inline Rational l1_distance(std::span<const Rational> a, std::span<const Rational> b) {
  Rational d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += abs(a[i] - b[i]);
  return d;
}

/// Kuhn simplex l*C(v, perm). `perm` holds 0-based axes; the path from l*v
/// steps along e_{perm[0]}, e_{perm[1]}, ... in that order.
struct SimplexId {
  LatticePoint base;
  std::vector<int> perm;
  Rational scale{1};

  int dim() const { return static_cast<int>(perm.size()); }

  friend bool operator==(const SimplexId& a, const SimplexId& b) {
    return a.base == b.base && a.perm == b.perm && a.scale == b.scale;
  }
  friend bool operator<(const SimplexId& a, const SimplexId& b) {
    if (a.base != b.base) return a.base < b.base;
    if (a.perm != b.perm) return a.perm < b.perm;
    return a.scale < b.scale;
  }
};

inline std::vector<std::vector<int>> all_permutations(int m) {
  std::vector<int> p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::int64_t factorial(int m) {
  std::int64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

/// Point location: base = floor(w / l), perm rank-orders the fractional parts
/// in decreasing order with ties going to the smaller axis index.
inline SimplexId simplex_containing(std::span<const Rational> w, const Rational& scale) {
  const std::size_t m = w.size();
  SimplexId id;
  id.scale = scale;
  id.base.resize(m);
  RationalVector frac(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rational y = w[i] / scale;
    id.base[i] = floor_of(y);
    frac[i] = y - Rational(id.base[i]);
  }
  id.perm.resize(m);
  std::iota(id.perm.begin(), id.perm.end(), 0);
  std::stable_sort(id.perm.begin(), id.perm.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  return id;
}

/// Vertices in lattice units (multiply by scale for coordinates).
inline std::vector<LatticePoint> simplex_path(const SimplexId& id) {
  std::vector<LatticePoint> out;
  out.reserve(id.perm.size() + 1);
  LatticePoint x = id.base;
  out.push_back(x);
  for (int axis : id.perm) {
    x[static_cast<std::size_t>(axis)] += 1;
    out.push_back(x);
  }
  return out;
}

inline std::vector<RationalVector> simplex_vertices(const SimplexId& id) {
  std::vector<RationalVector> out;
  for (const auto& z : simplex_path(id)) {
    RationalVector x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = Rational(z[i]) * id.scale;
    out.push_back(std::move(x));
  }
  return out;
}

/// Local coordinates y = w/l - base; inside the closed simplex iff
/// 1 >= y[perm0] >= y[perm1] >= ... >= 0.
inline RationalVector local_coordinates(const SimplexId& id, std::span<const Rational> w) {
  RationalVector y(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) y[i] = w[i] / id.scale - Rational(id.base[i]);
  return y;
}

inline bool simplex_contains(const SimplexId& id, std::span<const Rational> w) {
  RationalVector y = local_coordinates(id, w);
  Rational prev = 1;
  for (int axis : id.perm) {
    const Rational& c = y[static_cast<std::size_t>(axis)];
    if (c > prev) return false;
    prev = c;
  }
  return prev >= 0;
}

inline Rational simplex_volume(int m, const Rational& scale) {
  Rational v = 1;
  for (int i = 0; i < m; ++i) v *= scale;
  return v / Rational(factorial(m));
}

inline RationalVector simplex_barycenter(const SimplexId& id) {
  auto verts = simplex_vertices(id);
  RationalVector c(verts[0].size(), Rational(0));
  for (const auto& v : verts)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
  for (auto& x : c) x /= Rational(static_cast<std::int64_t>(verts.size()));
  return c;
}

}  // namespace heightlab
