#pragma once

// Height functions on lattice domains, parity rounding, affine height
// functions and interpolation back to the continuum.

#include "heightlab/error.hpp"
#include "heightlab/lattice.hpp"
#include "heightlab/mesh.hpp"
#include "heightlab/profile.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

/// [y]_parity: the closest integer of the given parity, rounding up on a tie.
inline std::int64_t parity_round(const Rational& y, int parity) {
  std::int64_t k = floor_of(y);
  return (((k % 2) + 2) % 2 == parity) ? k : k + 1;
}

inline std::int64_t parity_round(const Rational& y, std::span<const std::int64_t> z) { return parity_round(y, parity(z)); }

/// Integer field on a discrete domain, values in domain index order. Not
/// validated on construction; see validate_height_function.
struct HeightFunction {
  DomainPtr domain;
  std::vector<std::int64_t> values;

  std::int64_t at(const LatticePoint& z) const { return values[domain->require_index(z)]; }
};

struct Violation {
  enum class Kind { Edge, Parity };
  Kind kind;
  LatticePoint a;
  LatticePoint b;  // empty for parity violations
  std::string describe() const {
    auto show = [](const LatticePoint& z) {
      std::string s = "(";
      for (std::size_t i = 0; i < z.size(); ++i) s += (i ? "," : "") + std::to_string(z[i]);
      return s + ")";
    };
    if (kind == Kind::Parity) return "parity violated at " + show(a);
    return "edge " + show(a) + "-" + show(b) + " does not differ by 1";
  }
};

/// First violation in index order: parity of the point, then its edges to later points.
inline std::optional<Violation> validate_height_function(const DiscreteDomain& d, std::span<const std::int64_t> values) {
  if (values.size() != d.size()) throw Error(ErrorKind::InvalidHeightFunction, "value count does not match domain size");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (((values[i] % 2) + 2) % 2 != parity(d.point(i))) return Violation{Violation::Kind::Parity, d.point(i), {}};
    for (std::size_t j : d.neighbors(i)) {
      if (j < i) continue;
      std::int64_t diff = values[i] - values[j];
      if (diff != 1 && diff != -1) return Violation{Violation::Kind::Edge, d.point(i), d.point(j)};
    }
  }
  return std::nullopt;
}

inline std::optional<Violation> validate_height_function(const HeightFunction& h) { return validate_height_function(*h.domain, h.values); }

/// z -> [s . z + b]_{z mod 2}
inline HeightFunction affine_height_function(const AffineSpec& spec, DomainPtr d) {
  HeightFunction h{d, std::vector<std::int64_t>(d->size())};
  RationalVector zr(static_cast<std::size_t>(d->dim()));
  for (std::size_t i = 0; i < d->size(); ++i) {
    const auto& z = d->point(i);
    for (std::size_t k = 0; k < z.size(); ++k) zr[k] = Rational(z[k]);
    h.values[i] = parity_round(detail::dot(spec.s, zr) + spec.b, parity(z));
  }
  return h;
}

/// Integer values on the inner boundary, aligned with domain->boundary_indices().
struct BoundaryHeights {
  DomainPtr domain;
  std::vector<std::int64_t> values;
};

inline BoundaryHeights restrict_to_boundary(const HeightFunction& h) {
  BoundaryHeights b{h.domain, {}};
  for (std::size_t i : h.domain->boundary_indices()) b.values.push_back(h.values[i]);
  return b;
}

/// z -> [n p(z/n)]_{z mod 2} on the inner boundary.
inline BoundaryHeights round_profile_on_boundary(const LipschitzProfile& p, DomainPtr d) {
  BoundaryHeights b{d, {}};
  const Rational n(d->scale());
  for (std::size_t i : d->boundary_indices()) b.values.push_back(parity_round(n * p.value(d->rescaled(i)), parity(d->point(i))));
  return b;
}

/// Finite-n boundary convergence functional: sup over z in the inner boundary
/// and sampled x on the boundary of R within d_n of z/n of |hB(z)/n - p(x)|.
/// d_n is the sampled Hausdorff gap and the boundary sample pitch is 1/(2n).
inline Rational boundary_gap(const BoundaryHeights& hb, const LipschitzProfile& p, const ContinuumDomain& region) {
  const DiscreteDomain& d = *hb.domain;
  const Rational n(d.scale());
  const Rational dn = hausdorff_gap(region, d);
  const auto samples = sample_region(region, Rational(1, 2 * d.scale()), true);
  std::vector<Rational> sample_values;
  sample_values.reserve(samples.size());
  for (const auto& x : samples) sample_values.push_back(p.value(x));
  Rational worst = 0;
  const auto& bidx = d.boundary_indices();
  for (std::size_t k = 0; k < bidx.size(); ++k) {
    RationalVector zn = d.rescaled(bidx[k]);
    Rational scaled = Rational(hb.values[k]) / n;
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (l1_distance(samples[j], zn) <= dn) worst = std::max(worst, abs(scaled - sample_values[j]));
  }
  return worst;
}

/// Piecewise-linear interpolation of h/n on the scale-1/n Kuhn simplices whose
/// vertices all lie in the domain. Every lattice point must be such a vertex.
inline LipschitzProfile kirszbraun_interpolate(const HeightFunction& h) {
  const DiscreteDomain& d = *h.domain;
  const int m = d.dim();
  const Rational scale(1, d.scale());
  const auto perms = all_permutations(m);
  std::vector<SimplexId> simplices;
  std::vector<bool> covered(d.size(), false);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (const auto& p : perms) {
      SimplexId id{d.point(i), p, scale};
      auto path = simplex_path(id);
      std::vector<std::size_t> idx;
      for (const auto& v : path) {
        auto j = d.index_of(v);
        if (!j) break;
        idx.push_back(*j);
      }
      if (idx.size() != path.size()) continue;
      for (std::size_t j : idx) covered[j] = true;
      simplices.push_back(std::move(id));
    }
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!covered[i]) throw Error(ErrorKind::DomainNotCellCovered, "lattice point lies in no full Kuhn cell of the domain");
  auto mesh = std::make_shared<const SimplexDomain>(SimplexDomain::build(m, scale, std::move(simplices)));
  std::vector<Rational> values;
  values.reserve(mesh->vertices().size());
  for (const auto& v : mesh->vertices()) values.push_back(Rational(h.values[d.require_index(v)], d.scale()));
  return LipschitzProfile::piecewise(std::make_shared<const ExactPiecewiseAffine>(mesh, std::move(values)));
}

}  // namespace heightlab
