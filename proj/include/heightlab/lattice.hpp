#pragma once

// Continuum domains R, their lattice discretizations R_n and inner boundaries.

#include "heightlab/error.hpp"
#include "heightlab/kuhn.hpp"
#include "heightlab/rational.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace heightlab {

struct Box {
  RationalVector lo;
  RationalVector hi;
};

/// a . x <= b
struct HalfSpace {
  RationalVector a;
  Rational b;
};

struct Polytope {
  std::vector<HalfSpace> halfspaces;
};

struct SimplexUnion {
  std::vector<SimplexId> simplices;
};

namespace detail {

// Solves the square system A x = b exactly; nullopt when singular.
inline std::optional<RationalVector> solve_exact(std::vector<RationalVector> a, RationalVector b) {
  const std::size_t m = b.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  RationalVector x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = b[i] / a[i][i];
  return x;
}

inline Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Compact, connected, regular-closed region of R^m with rational data.
class ContinuumDomain {
 public:
  using Shape = std::variant<Box, Polytope, SimplexUnion>;

  static ContinuumDomain box(RationalVector lo, RationalVector hi) {
    if (lo.empty() || lo.size() != hi.size()) throw Error(ErrorKind::InvalidDomain, "box bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw Error(ErrorKind::InvalidDomain, "box needs lo < hi on every axis");
    const int dim = static_cast<int>(lo.size());
    return ContinuumDomain(dim, Box{std::move(lo), std::move(hi)});
  }

  static ContinuumDomain unit_cube(int m) {
    return box(RationalVector(static_cast<std::size_t>(m), Rational(0)), RationalVector(static_cast<std::size_t>(m), Rational(1)));
  }

  static ContinuumDomain polytope(int dim, std::vector<HalfSpace> halfspaces) {
    if (dim < 1) throw Error(ErrorKind::InvalidDomain, "dimension must be >= 1");
    for (const auto& h : halfspaces)
      if (static_cast<int>(h.a.size()) != dim) throw Error(ErrorKind::InvalidDomain, "half-space normal has wrong length");
    ContinuumDomain d(dim, Polytope{std::move(halfspaces)});
    d.vertices_ = d.polytope_vertices();
    if (static_cast<int>(d.vertices_.size()) < dim + 1)
      throw Error(ErrorKind::InvalidDomain, "polytope must be bounded with non-empty interior");
    RationalVector centroid(static_cast<std::size_t>(dim), Rational(0));
    for (const auto& v : d.vertices_)
      for (int i = 0; i < dim; ++i) centroid[i] += v[i];
    for (auto& c : centroid) c /= Rational(static_cast<std::int64_t>(d.vertices_.size()));
    for (const auto& h : std::get<Polytope>(d.shape_).halfspaces)
      if (!(detail::dot(h.a, centroid) < h.b)) throw Error(ErrorKind::InvalidDomain, "polytope has empty interior");
    return d;
  }

  /// {x >= 0, sum x <= 1}
  static ContinuumDomain unit_simplex(int m) {
    std::vector<HalfSpace> hs;
    for (int i = 0; i < m; ++i) {
      RationalVector a(static_cast<std::size_t>(m), Rational(0));
      a[i] = -1;
      hs.push_back({a, Rational(0)});
    }
    hs.push_back({RationalVector(static_cast<std::size_t>(m), Rational(1)), Rational(1)});
    return polytope(m, std::move(hs));
  }

  static ContinuumDomain simplex_union(int dim, std::vector<SimplexId> simplices) {
    if (simplices.empty()) throw Error(ErrorKind::InvalidDomain, "empty simplex union");
    for (const auto& s : simplices)
      if (s.dim() != dim || static_cast<int>(s.base.size()) != dim) throw Error(ErrorKind::InvalidDomain, "simplex dimension mismatch");
    for (const auto& s : simplices)
      if (s.scale != simplices.front().scale) throw Error(ErrorKind::InvalidDomain, "simplices must share one scale");
    std::sort(simplices.begin(), simplices.end());
    simplices.erase(std::unique(simplices.begin(), simplices.end()), simplices.end());
    return ContinuumDomain(dim, SimplexUnion{std::move(simplices)});
  }

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }

  bool contains(std::span<const Rational> x) const {
    if (static_cast<int>(x.size()) != dim_) return false;
    if (const auto* b = std::get_if<Box>(&shape_)) {
      for (int i = 0; i < dim_; ++i)
        if (x[i] < b->lo[i] || x[i] > b->hi[i]) return false;
      return true;
    }
    if (const auto* p = std::get_if<Polytope>(&shape_)) {
      for (const auto& h : p->halfspaces)
        if (detail::dot(h.a, x) > h.b) return false;
      return true;
    }
    const auto& u = std::get<SimplexUnion>(shape_);
    for (const auto& s : u.simplices)
      if (simplex_contains(s, x)) return true;
    return false;
  }

  /// x in R and x on the topological boundary of R.
  bool on_boundary(std::span<const Rational> x) const {
    if (!contains(x)) return false;
    if (const auto* b = std::get_if<Box>(&shape_)) {
      for (int i = 0; i < dim_; ++i)
        if (x[i] == b->lo[i] || x[i] == b->hi[i]) return true;
      return false;
    }
    if (const auto* p = std::get_if<Polytope>(&shape_)) {
      for (const auto& h : p->halfspaces)
        if (detail::dot(h.a, x) == h.b) return true;
      return false;
    }
    const auto& u = std::get<SimplexUnion>(shape_);
    Rational eta = u.simplices.front().scale / Rational(1 << 20);
    RationalVector y(x.begin(), x.end());
    for (int i = 0; i < dim_; ++i) {
      for (int sign : {-1, 1}) {
        y[i] = x[i] + Rational(sign) * eta;
        bool inside = contains(y);
        y[i] = x[i];
        if (!inside) return true;
      }
    }
    return false;
  }

  std::pair<RationalVector, RationalVector> bounding_box() const {
    if (const auto* b = std::get_if<Box>(&shape_)) return {b->lo, b->hi};
    std::vector<RationalVector> pts;
    if (std::holds_alternative<Polytope>(shape_)) {
      pts = vertices_;
    } else {
      for (const auto& s : std::get<SimplexUnion>(shape_).simplices)
        for (auto& v : simplex_vertices(s)) pts.push_back(std::move(v));
    }
    RationalVector lo = pts.front(), hi = pts.front();
    for (const auto& p : pts)
      for (int i = 0; i < dim_; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    return {lo, hi};
  }

  /// Exact Lebesgue measure when available (box, simplex union, polytope of dim <= 2).
  std::optional<Rational> exact_volume() const {
    if (const auto* b = std::get_if<Box>(&shape_)) {
      Rational v = 1;
      for (int i = 0; i < dim_; ++i) v *= b->hi[i] - b->lo[i];
      return v;
    }
    if (const auto* u = std::get_if<SimplexUnion>(&shape_))
      return simplex_volume(dim_, u->simplices.front().scale) * Rational(static_cast<std::int64_t>(u->simplices.size()));
    if (dim_ == 1) {
      auto [lo, hi] = bounding_box();
      return hi[0] - lo[0];
    }
    if (dim_ == 2) {
      auto verts = vertices_;
      double cx = 0, cy = 0;
      for (const auto& v : verts) {
        cx += to_double(v[0]);
        cy += to_double(v[1]);
      }
      cx /= static_cast<double>(verts.size());
      cy /= static_cast<double>(verts.size());
      std::sort(verts.begin(), verts.end(), [&](const RationalVector& a, const RationalVector& b) {
        return std::atan2(to_double(a[1]) - cy, to_double(a[0]) - cx) < std::atan2(to_double(b[1]) - cy, to_double(b[0]) - cx);
      });
      Rational twice = 0;
      for (std::size_t i = 0; i < verts.size(); ++i) {
        const auto& p = verts[i];
        const auto& q = verts[(i + 1) % verts.size()];
        twice += p[0] * q[1] - q[0] * p[1];
      }
      return abs(twice) / Rational(2);
    }
    return std::nullopt;
  }

  /// Lebesgue measure; polytopes in dim >= 3 fall back to midpoint counting at pitch extent/64.
  double volume() const {
    if (auto v = exact_volume()) return to_double(*v);
    auto [lo, hi] = bounding_box();
    const int steps = 64;
    std::vector<int> idx(static_cast<std::size_t>(dim_), 0);
    std::size_t inside = 0, total = 0;
    RationalVector x(static_cast<std::size_t>(dim_));
    for (;;) {
      for (int i = 0; i < dim_; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * Rational(2 * idx[i] + 1, 2 * steps);
      if (contains(x)) ++inside;
      ++total;
      int k = 0;
      while (k < dim_ && ++idx[k] == steps) idx[k++] = 0;
      if (k == dim_) break;
    }
    double box_volume = 1;
    for (int i = 0; i < dim_; ++i) box_volume *= to_double(hi[i] - lo[i]);
    return box_volume * static_cast<double>(inside) / static_cast<double>(total);
  }

  const std::vector<RationalVector>& polytope_vertex_list() const { return vertices_; }

 private:
  ContinuumDomain(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {}

  std::vector<RationalVector> polytope_vertices() const {
    const auto& hs = std::get<Polytope>(shape_).halfspaces;
    const std::size_t k = hs.size();
    const std::size_t m = static_cast<std::size_t>(dim_);
    std::vector<RationalVector> out;
    if (k < m) return out;
    std::vector<bool> pick(k, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
    do {
      std::vector<RationalVector> a;
      RationalVector b;
      for (std::size_t i = 0; i < k; ++i)
        if (pick[i]) {
          a.push_back(hs[i].a);
          b.push_back(hs[i].b);
        }
      if (auto x = detail::solve_exact(a, b)) {
        bool feasible = true;
        for (const auto& h : hs)
          if (detail::dot(h.a, *x) > h.b) {
            feasible = false;
            break;
          }
        if (feasible && std::find(out.begin(), out.end(), *x) == out.end()) out.push_back(*x);
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return out;
  }

  int dim_;
  Shape shape_;
  std::vector<RationalVector> vertices_;
};

/// Finite lattice domain R_n with its inner boundary. Points are stored in
/// lexicographic order; all indices refer to that order.
class DiscreteDomain {
 public:
  static DiscreteDomain from_points(int dim, std::int64_t scale, std::vector<LatticePoint> points) {
    if (points.empty()) throw Error(ErrorKind::EmptyDiscretization, "no lattice points");
    for (const auto& p : points)
      if (static_cast<int>(p.size()) != dim) throw Error(ErrorKind::InvalidDomain, "point dimension mismatch");
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    DiscreteDomain d;
    d.dim_ = dim;
    d.scale_ = scale;
    d.points_ = std::move(points);
    const std::size_t n = d.points_.size();
    d.index_.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) d.index_.emplace(d.points_[i], i);
    d.neighbors_.resize(n);
    d.boundary_flag_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      LatticePoint z = d.points_[i];
      for (int axis = 0; axis < dim; ++axis) {
        for (int step : {-1, 1}) {
          z[axis] += step;
          auto it = d.index_.find(z);
          if (it != d.index_.end())
            d.neighbors_[i].push_back(it->second);
          else
            d.boundary_flag_[i] = true;
          z[axis] -= step;
        }
      }
      if (d.boundary_flag_[i]) d.boundary_.push_back(i);
    }
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
      std::size_t i = queue.front();
      queue.pop_front();
      for (std::size_t j : d.neighbors_[i])
        if (!seen[j]) {
          seen[j] = true;
          ++reached;
          queue.push_back(j);
        }
    }
    if (reached != n) throw Error(ErrorKind::DisconnectedDiscretization, std::to_string(n - reached) + " points unreachable");
    return d;
  }

  int dim() const { return dim_; }
  std::int64_t scale() const { return scale_; }
  std::size_t size() const { return points_.size(); }
  const LatticePoint& point(std::size_t i) const { return points_[i]; }
  const std::vector<LatticePoint>& points() const { return points_; }

  std::optional<std::size_t> index_of(const LatticePoint& z) const {
    auto it = index_.find(z);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_index(const LatticePoint& z) const {
    auto i = index_of(z);
    if (!i) throw Error(ErrorKind::PointOutsideDomain, "lattice point not in domain");
    return *i;
  }

  bool contains(const LatticePoint& z) const { return index_.count(z) != 0; }
  bool is_boundary(std::size_t i) const { return boundary_flag_[i]; }
  const std::vector<std::size_t>& boundary_indices() const { return boundary_; }

  /// In-domain neighbours in axis order (-e1, +e1, -e2, ...).
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }

  /// z / n
  RationalVector rescaled(std::size_t i) const {
    RationalVector x(static_cast<std::size_t>(dim_));
    for (int k = 0; k < dim_; ++k) x[k] = Rational(points_[i][k], scale_);
    return x;
  }

 private:
  DiscreteDomain() = default;

  int dim_ = 0;
  std::int64_t scale_ = 1;
  std::vector<LatticePoint> points_;
  std::unordered_map<LatticePoint, std::size_t, PointHash> index_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<bool> boundary_flag_;
  std::vector<std::size_t> boundary_;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

/// R_n := { z in Z^m : z/n in R }.
inline DiscreteDomain discretize(const ContinuumDomain& region, std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::InvalidDomain, "scale n must be >= 1");
  const int m = region.dim();
  auto [lo, hi] = region.bounding_box();
  LatticePoint first(static_cast<std::size_t>(m)), last(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    first[i] = ceil_of(lo[i] * Rational(n));
    last[i] = floor_of(hi[i] * Rational(n));
    if (first[i] > last[i]) throw Error(ErrorKind::EmptyDiscretization, "no lattice point at this scale");
  }
  std::vector<LatticePoint> pts;
  LatticePoint z = first;
  RationalVector x(static_cast<std::size_t>(m));
  for (;;) {
    for (int i = 0; i < m; ++i) x[i] = Rational(z[i], n);
    if (region.contains(x)) pts.push_back(z);
    int k = m - 1;
    while (k >= 0 && z[k] == last[k]) {
      z[k] = first[k];
      --k;
    }
    if (k < 0) break;
    ++z[k];
  }
  return DiscreteDomain::from_points(m, n, std::move(pts));
}

inline std::shared_ptr<const DiscreteDomain> make_domain(DiscreteDomain d) {
  return std::make_shared<const DiscreteDomain>(std::move(d));
}

/// Q_n = [0, n)^m intersected with Z^m.
inline DiscreteDomain discrete_cube(int m, std::int64_t n) {
  std::vector<LatticePoint> pts;
  LatticePoint z(static_cast<std::size_t>(m), 0);
  for (;;) {
    pts.push_back(z);
    int k = m - 1;
    while (k >= 0 && z[k] == n - 1) {
      z[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++z[k];
  }
  return DiscreteDomain::from_points(m, n, std::move(pts));
}

inline std::vector<LatticePoint> graph_neighbors(const LatticePoint& z, const DiscreteDomain& domain) {
  std::size_t i = domain.require_index(z);
  std::vector<LatticePoint> out;
  for (std::size_t j : domain.neighbors(i)) out.push_back(domain.point(j));
  return out;
}

/// Points of the pitch grid anchored at the bounding-box corner (plus the far
/// face of the box on every axis) that lie in R, or on its boundary.
inline std::vector<RationalVector> sample_region(const ContinuumDomain& region, const Rational& pitch, bool boundary_only = false) {
  const int m = region.dim();
  auto [lo, hi] = region.bounding_box();
  std::vector<RationalVector> axis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (Rational x = lo[i]; x < hi[i]; x += pitch) axis[i].push_back(x);
    axis[i].push_back(hi[i]);
  }
  std::vector<std::size_t> k(static_cast<std::size_t>(m), 0);
  std::vector<RationalVector> out;
  RationalVector x(static_cast<std::size_t>(m));
  for (;;) {
    for (int i = 0; i < m; ++i) x[i] = axis[i][k[i]];
    bool keep = boundary_only ? region.on_boundary(x) : region.contains(x);
    if (keep) out.push_back(x);
    int j = m - 1;
    while (j >= 0 && k[j] + 1 == axis[j].size()) {
      k[j] = 0;
      --j;
    }
    if (j < 0) break;
    ++k[j];
  }
  return out;
}

/// Sampled l1 Hausdorff gap between (1/n) D and R: the largest distance from a
/// pitch-grid sample of R to the nearest rescaled lattice point. Default pitch 1/(2n).
inline Rational hausdorff_gap(const ContinuumDomain& region, const DiscreteDomain& domain, std::optional<Rational> pitch = std::nullopt) {
  const Rational step = pitch.value_or(Rational(1, 2 * domain.scale()));
  const Rational n(domain.scale());
  Rational worst = 0;
  for (const auto& x : sample_region(region, step)) {
    Rational best = -1;
    for (const auto& z : domain.points()) {
      Rational d = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        d += abs(x[i] - Rational(z[i]) / n);
        if (best >= 0 && d >= best) break;
      }
      if (best < 0 || d < best) best = d;
      if (best == 0) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace heightlab
