#pragma once

// Simplex domains (finite connected unions of scale-l Kuhn simplices) and
// piecewise-affine functions on them.

#include "heightlab/error.hpp"
#include "heightlab/kuhn.hpp"
#include "heightlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace heightlab {

class SimplexDomain {
 public:
  static SimplexDomain build(int dim, Rational scale, std::vector<SimplexId> simplices) {
    if (simplices.empty()) throw Error(ErrorKind::NoSimplexFits, "simplex domain is empty");
    if (!(scale > 0)) throw Error(ErrorKind::InvalidDomain, "scale must be positive");
    for (auto& s : simplices) {
      if (s.dim() != dim || static_cast<int>(s.base.size()) != dim) throw Error(ErrorKind::InvalidDomain, "simplex dimension mismatch");
      std::vector<int> sorted = s.perm;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 0; i < dim; ++i)
        if (sorted[i] != i) throw Error(ErrorKind::InvalidDomain, "perm is not a permutation");
      s.scale = scale;
    }
    std::sort(simplices.begin(), simplices.end());
    simplices.erase(std::unique(simplices.begin(), simplices.end()), simplices.end());

    SimplexDomain d;
    d.dim_ = dim;
    d.scale_ = scale;
    d.simplices_ = std::move(simplices);
    for (std::size_t i = 0; i < d.simplices_.size(); ++i) d.lookup_.emplace(d.simplices_[i], i);
    std::map<LatticePoint, std::size_t> vmap;
    for (const auto& s : d.simplices_)
      for (const auto& v : simplex_path(s)) vmap.emplace(v, 0);
    for (auto& [v, idx] : vmap) {
      idx = d.vertices_.size();
      d.vertices_.push_back(v);
    }
    for (const auto& v : d.vertices_) d.vertex_index_.emplace(v, d.vertex_index_.size());
    d.simplex_vertices_.reserve(d.simplices_.size());
    std::vector<std::vector<std::size_t>> incident(d.vertices_.size());
    for (std::size_t i = 0; i < d.simplices_.size(); ++i) {
      std::vector<std::size_t> ids;
      for (const auto& v : simplex_path(d.simplices_[i])) {
        ids.push_back(vmap.at(v));
        incident[ids.back()].push_back(i);
      }
      d.simplex_vertices_.push_back(std::move(ids));
    }
    // connected through shared vertices
    std::vector<bool> seen(d.simplices_.size(), false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
      std::size_t s = queue.front();
      queue.pop_front();
      for (std::size_t v : d.simplex_vertices_[s])
        for (std::size_t t : incident[v])
          if (!seen[t]) {
            seen[t] = true;
            ++reached;
            queue.push_back(t);
          }
    }
    if (reached != d.simplices_.size()) throw Error(ErrorKind::Disconnected, "simplex domain is not connected");
    return d;
  }

  int dim() const { return dim_; }
  const Rational& scale() const { return scale_; }
  std::size_t size() const { return simplices_.size(); }
  const std::vector<SimplexId>& simplices() const { return simplices_; }
  const SimplexId& simplex(std::size_t i) const { return simplices_[i]; }

  /// Vertices in lattice units of the scale.
  const std::vector<LatticePoint>& vertices() const { return vertices_; }
  const std::vector<std::size_t>& simplex_vertex_indices(std::size_t i) const { return simplex_vertices_[i]; }

  RationalVector vertex_coordinates(std::size_t v) const {
    RationalVector x(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) x[i] = Rational(vertices_[v][i]) * scale_;
    return x;
  }

  std::optional<std::size_t> vertex_index(const LatticePoint& v) const {
    auto it = vertex_index_.find(v);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> simplex_index(const SimplexId& id) const {
    SimplexId key = id;
    key.scale = scale_;
    auto it = lookup_.find(key);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  Rational simplex_volume() const { return heightlab::simplex_volume(dim_, scale_); }
  Rational total_volume() const { return simplex_volume() * Rational(static_cast<std::int64_t>(simplices_.size())); }

  /// Index of a member simplex containing w (the point-location simplex when it belongs to the domain).
  std::optional<std::size_t> locate(std::span<const Rational> w) const {
    if (auto i = simplex_index(simplex_containing(w, scale_))) return i;
    for (std::size_t i = 0; i < simplices_.size(); ++i)
      if (simplex_contains(simplices_[i], w)) return i;
    return std::nullopt;
  }

  /// Every Kuhn simplex of this scale that has the vertex as a corner belongs to the domain.
  bool is_interior_vertex(std::size_t v) const {
    const LatticePoint& x = vertices_[v];
    const auto perms = all_permutations(dim_);
    for (std::uint32_t mask = 0; mask < (1u << dim_); ++mask) {
      LatticePoint base = x;
      int ones = 0;
      for (int i = 0; i < dim_; ++i)
        if (mask & (1u << i)) {
          base[i] -= 1;
          ++ones;
        }
      for (const auto& p : perms) {
        bool prefix = true;
        for (int k = 0; k < ones; ++k)
          if (!(mask & (1u << p[k]))) prefix = false;
        if (!prefix) continue;
        if (!simplex_index(SimplexId{base, p, scale_})) return false;
      }
    }
    return true;
  }

  ContinuumDomain as_region() const { return ContinuumDomain::simplex_union(dim_, simplices_); }

 private:
  SimplexDomain() = default;

  int dim_ = 0;
  Rational scale_{1};
  std::vector<SimplexId> simplices_;
  std::map<SimplexId, std::size_t> lookup_;
  std::vector<LatticePoint> vertices_;
  std::unordered_map<LatticePoint, std::size_t, PointHash> vertex_index_;
  std::vector<std::vector<std::size_t>> simplex_vertices_;
};

using MeshPtr = std::shared_ptr<const SimplexDomain>;

template <class T>
T from_rational(const Rational& q);

template <>
inline Rational from_rational<Rational>(const Rational& q) {
  return q;
}

template <>
inline double from_rational<double>(const Rational& q) {
  return to_double(q);
}

inline Rational abs_value(const Rational& q) { return abs(q); }
inline double abs_value(double x) { return std::fabs(x); }

/// Continuous function that is affine on every simplex of a simplex domain,
/// stored by its vertex values. T is Rational (exact) or double.
template <class T>
class PiecewiseAffine {
 public:
  PiecewiseAffine(MeshPtr mesh, std::vector<T> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_ || values_.size() != mesh_->vertices().size())
      throw Error(ErrorKind::InvalidDomain, "one value per mesh vertex required");
  }

  const SimplexDomain& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const std::vector<T>& values() const { return values_; }
  int dim() const { return mesh_->dim(); }

  /// Component along perm[i] is (h(x_{i+1}) - h(x_i)) / l.
  std::vector<T> gradient(std::size_t simplex) const {
    const auto& id = mesh_->simplex(simplex);
    const auto& vid = mesh_->simplex_vertex_indices(simplex);
    std::vector<T> g(static_cast<std::size_t>(mesh_->dim()), T(0));
    const T scale = from_rational<T>(mesh_->scale());
    for (std::size_t i = 0; i < id.perm.size(); ++i)
      g[static_cast<std::size_t>(id.perm[i])] = (values_[vid[i + 1]] - values_[vid[i]]) / scale;
    return g;
  }

  T evaluate_in(std::size_t simplex, std::span<const Rational> w) const {
    const auto& id = mesh_->simplex(simplex);
    const auto& vid = mesh_->simplex_vertex_indices(simplex);
    RationalVector y = local_coordinates(id, w);
    T value = values_[vid[0]];
    for (std::size_t i = 0; i < id.perm.size(); ++i)
      value += (values_[vid[i + 1]] - values_[vid[i]]) * from_rational<T>(y[static_cast<std::size_t>(id.perm[i])]);
    return value;
  }

  T evaluate(std::span<const Rational> w) const {
    auto s = mesh_->locate(w);
    if (!s) throw Error(ErrorKind::MeshOutsideDomain, "point outside the simplex domain");
    return evaluate_in(*s, w);
  }

  /// max over simplices of |gradient|_inf, which is the l1 Lipschitz constant.
  T lipschitz() const {
    T best(0);
    for (std::size_t s = 0; s < mesh_->size(); ++s)
      for (const T& g : gradient(s)) best = std::max(best, T(abs_value(g)));
    return best;
  }

 private:
  MeshPtr mesh_;
  std::vector<T> values_;
};

using ExactPiecewiseAffine = PiecewiseAffine<Rational>;

}  // namespace heightlab
