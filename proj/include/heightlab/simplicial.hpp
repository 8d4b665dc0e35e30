#pragma once

// Kuhn simplex domains inside continuum regions, vertex interpolation of
// Lipschitz profiles, the simplicial approximation report and macroscopic entropy.

#include "heightlab/enumeration.hpp"
#include "heightlab/error.hpp"
#include "heightlab/lattice.hpp"
#include "heightlab/mesh.hpp"
#include "heightlab/profile.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

/// Every scale-l Kuhn simplex whose vertices and barycenter lie in R. For
/// boxes and polytopes (convex) that is exact containment; for a union of
/// coarser Kuhn simplices whose scale is an integer multiple of l, a fine
/// simplex lies in exactly one coarse one, so the barycenter settles it.
inline SimplexDomain simplices_inside(const ContinuumDomain& region, const Rational& ell) {
  if (!(ell > Rational(0))) throw Error(ErrorKind::InvalidDomain, "mesh scale must be positive");
  const int m = region.dim();
  auto [lo, hi] = region.bounding_box();
  LatticePoint first(static_cast<std::size_t>(m)), last(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    first[i] = floor_of(lo[i] / ell);
    last[i] = ceil_of(hi[i] / ell) - 1;
  }
  const auto perms = all_permutations(m);
  std::vector<SimplexId> found;
  LatticePoint base = first;
  for (;;) {
    for (const auto& p : perms) {
      SimplexId id{base, p, ell};
      bool inside = region.contains(simplex_barycenter(id));
      for (const auto& v : simplex_vertices(id)) {
        if (!inside) break;
        inside = region.contains(v);
      }
      if (inside) found.push_back(std::move(id));
    }
    int k = 0;
    while (k < m && base[k] == last[k]) base[k] = first[k], ++k;
    if (k == m) break;
    ++base[k];
  }
  if (found.empty()) throw Error(ErrorKind::NoSimplexFits, "no scale-" + to_string(ell) + " simplex fits inside the region");
  return SimplexDomain::build(m, ell, std::move(found));
}

/// Vertex values p(x) on the mesh, affine in between.
inline LipschitzProfile::PwaPtr interpolate_on_mesh(const LipschitzProfile& p, MeshPtr mesh) {
  if (p.dim() != mesh->dim()) throw Error(ErrorKind::MeshOutsideDomain, "profile and mesh dimensions differ");
  std::vector<Rational> values;
  values.reserve(mesh->vertices().size());
  for (std::size_t v = 0; v < mesh->vertices().size(); ++v) values.push_back(p.value(mesh->vertex_coordinates(v)));
  return std::make_shared<const ExactPiecewiseAffine>(std::move(mesh), std::move(values));
}

/// (1/|K|) sum_i vol(simplex_i) model(grad_i); all simplices share one volume.
template <class T>
double macro_entropy(const PiecewiseAffine<T>& h, const SurfaceTensionModel& model) {
  double total = 0;
  std::vector<double> g(static_cast<std::size_t>(h.dim()));
  for (std::size_t s = 0; s < h.mesh().size(); ++s) {
    auto grad = h.gradient(s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if constexpr (std::is_same_v<T, Rational>) g[i] = to_double(grad[i]);
      else g[i] = grad[i];
    }
    total += model(g);
  }
  return total / static_cast<double>(h.mesh().size());
}

struct ApproximationReport {
  Rational ell;
  Rational eps;
  std::size_t simplices = 0;
  double uncovered_volume = 0;  // |R \ K|
  double hausdorff = 0;         // sampled d_H(K, R), l1
  double max_value_error = 0;   // max_K |h_K - p|, sampled
  double value_threshold = 0;   // eps * ell / 2
  double bad_gradient_fraction = 0;
  bool volume_ok = false;
  bool value_ok = false;
  bool gradient_ok = false;

  bool passed() const { return volume_ok && value_ok && gradient_ok; }
};

struct Approximation {
  MeshPtr mesh;
  LipschitzProfile::PwaPtr h;
  ApproximationReport report;
};

namespace detail {

// Points of the closed simplex on its local grid of pitch l/k, in coordinates.
inline std::vector<RationalVector> simplex_samples(const SimplexId& id, std::int64_t k) {
  const std::size_t m = id.perm.size();
  std::vector<RationalVector> out;
  std::vector<std::int64_t> y(m, 0);
  // k >= y[perm0] >= y[perm1] >= ... >= 0
  auto rec = [&](auto&& self, std::size_t i, std::int64_t cap) -> void {
    if (i == m) {
      RationalVector x(m);
      for (std::size_t j = 0; j < m; ++j) {
        const auto axis = static_cast<std::size_t>(id.perm[j]);
        x[axis] = (Rational(id.base[axis]) + Rational(y[j], k)) * id.scale;
      }
      out.push_back(std::move(x));
      return;
    }
    for (std::int64_t v = 0; v <= cap; ++v) {
      y[i] = v;
      self(self, i + 1, v);
    }
  };
  rec(rec, 0, k);
  return out;
}

inline double l1_gap(const RationalVector& a, const RationalVector& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(to_double(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// K = simplices_inside(R, l), h_K = vertex interpolation of p, plus the three
/// measured conclusions.
inline Approximation rademacher_approx(const LipschitzProfile& p, const ContinuumDomain& region, const Rational& eps, const Rational& ell) {
  if (!(eps > Rational(0))) throw std::invalid_argument("eps must be positive");
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(region, ell));
  auto h = interpolate_on_mesh(p, mesh);
  ApproximationReport r;
  r.ell = ell;
  r.eps = eps;
  r.simplices = mesh->size();
  const double e = to_double(eps);

  // (a) volume and sampled Hausdorff distance
  r.uncovered_volume = std::max(0.0, region.volume() - to_double(mesh->total_volume()));
  {
    const auto samples = sample_region(region, ell / Rational(4));
    std::vector<const RationalVector*> covered, missed;
    for (const auto& x : samples) (mesh->locate(x) ? covered : missed).push_back(&x);
    std::vector<RationalVector> anchors;
    for (std::size_t v = 0; v < mesh->vertices().size(); ++v) anchors.push_back(mesh->vertex_coordinates(v));
    for (const auto* x : covered) anchors.push_back(*x);
    for (const auto* x : missed) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& a : anchors) best = std::min(best, detail::l1_gap(*x, a));
      r.hausdorff = std::max(r.hausdorff, best);
    }
  }
  r.volume_ok = r.uncovered_volume < e && r.hausdorff < e;

  // (b) value error on the pitch-l/8 grid of every simplex (vertices included)
  r.value_threshold = e * to_double(ell) / 2;
  for (std::size_t s = 0; s < mesh->size(); ++s)
    for (const auto& x : detail::simplex_samples(mesh->simplex(s), 8))
      r.max_value_error = std::max(r.max_value_error, std::fabs(to_double(h->evaluate_in(s, x) - p.value(x))));
  r.value_ok = r.max_value_error < r.value_threshold;

  // (c) volume fraction with |grad h_K - grad p|_2 >= eps, grad p at barycenters
  std::size_t bad = 0;
  for (std::size_t s = 0; s < mesh->size(); ++s) {
    auto gk = h->gradient(s);
    auto gp = p.gradient(simplex_barycenter(mesh->simplex(s)));
    double d2 = 0;
    for (std::size_t i = 0; i < gp.size(); ++i) {
      double d = to_double(gk[i]) - gp[i];
      d2 += d * d;
    }
    if (std::sqrt(d2) >= e) ++bad;
  }
  r.bad_gradient_fraction = static_cast<double>(bad) / static_cast<double>(mesh->size());
  r.gradient_ok = r.bad_gradient_fraction < e;
  return {std::move(mesh), std::move(h), r};
}

struct SweepOutcome {
  std::optional<Approximation> accepted;  // first passing scale
  std::vector<ApproximationReport> reports;
  std::vector<Rational> skipped;  // scales where no simplex fits

  bool inconclusive() const { return !accepted; }
};

inline std::vector<Rational> default_scales() { return {Rational(1, 2), Rational(1, 4), Rational(1, 8), Rational(1, 16)}; }

/// Tries the scales in order and stops at the first one meeting all three
/// conclusions. Exhausting the list is inconclusive, not a refutation.
inline SweepOutcome rademacher_sweep(const LipschitzProfile& p, const ContinuumDomain& region, const Rational& eps,
                                     const std::vector<Rational>& scales = default_scales()) {
  SweepOutcome out;
  for (const auto& ell : scales) {
    try {
      auto a = rademacher_approx(p, region, eps, ell);
      out.reports.push_back(a.report);
      if (a.report.passed()) {
        out.accepted = std::move(a);
        break;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoSimplexFits && e.kind() != ErrorKind::Disconnected) throw;
      out.skipped.push_back(ell);
    }
  }
  return out;
}

}  // namespace heightlab
