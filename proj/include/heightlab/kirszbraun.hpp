#pragma once

// Discrete Kirszbraun extension of partial height functions.

#include "heightlab/enumeration.hpp"
#include "heightlab/error.hpp"
#include "heightlab/height_function.hpp"
#include "heightlab/lattice.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace heightlab {

/// Prescribed values on a carrier S inside the lattice domain.
struct PartialHeightFunction {
  DomainPtr lattice;
  std::vector<std::size_t> carrier;  // domain indices
  std::vector<std::int64_t> values;

  static PartialHeightFunction from_pins(DomainPtr lattice, const std::vector<std::pair<LatticePoint, std::int64_t>>& pins) {
    PartialHeightFunction p{lattice, {}, {}};
    for (const auto& [z, v] : pins) {
      p.carrier.push_back(lattice->require_index(z));
      p.values.push_back(v);
    }
    return p;
  }
};

struct ExtendabilityWitness {
  enum class Kind { Parity, Pair };
  Kind kind;
  LatticePoint x;
  LatticePoint y;  // second point of a violating pair
  std::int64_t difference = 0;
  std::int64_t distance = 0;

  std::string describe() const {
    auto show = [](const LatticePoint& z) {
      std::string s = "(";
      for (std::size_t i = 0; i < z.size(); ++i) s += (i ? "," : "") + std::to_string(z[i]);
      return s + ")";
    };
    if (kind == Kind::Parity) return "value at " + show(x) + " has the wrong parity";
    return "pair " + show(x) + " " + show(y) + ": |difference| " + std::to_string(difference) + " > distance " + std::to_string(distance);
  }
};

namespace detail {

inline std::optional<ExtendabilityWitness> pair_witness(const PartialHeightFunction& p, std::size_t a, std::size_t b) {
  const auto& x = p.lattice->point(p.carrier[a]);
  const auto& y = p.lattice->point(p.carrier[b]);
  std::int64_t diff = p.values[a] - p.values[b];
  if (diff < 0) diff = -diff;
  std::int64_t dist = l1_distance(x, y);
  if (diff > dist) return ExtendabilityWitness{ExtendabilityWitness::Kind::Pair, x, y, diff, dist};
  return std::nullopt;
}

// max_x (hbar(x) - |x - y|_1) over the bounding box of S, by one forward and
// one backward pass per axis. Returns nullopt when the box is too large.
inline std::optional<std::vector<std::int64_t>> lower_envelope_on_box(const PartialHeightFunction& p, LatticePoint& lo, std::vector<std::int64_t>& extent) {
  const int m = p.lattice->dim();
  lo = p.lattice->point(p.carrier[0]);
  LatticePoint hi = lo;
  for (std::size_t k : p.carrier)
    for (int i = 0; i < m; ++i) {
      lo[i] = std::min(lo[i], p.lattice->point(k)[i]);
      hi[i] = std::max(hi[i], p.lattice->point(k)[i]);
    }
  extent.assign(static_cast<std::size_t>(m), 0);
  double cells = 1;
  for (int i = 0; i < m; ++i) {
    extent[i] = hi[i] - lo[i] + 1;
    cells *= static_cast<double>(extent[i]);
  }
  if (cells > 5e7) return std::nullopt;
  constexpr std::int64_t neg = std::numeric_limits<std::int64_t>::min() / 4;
  std::vector<std::int64_t> f(static_cast<std::size_t>(cells), neg);
  auto flat = [&](const LatticePoint& z) {
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) idx = idx * static_cast<std::size_t>(extent[i]) + static_cast<std::size_t>(z[i] - lo[i]);
    return idx;
  };
  for (std::size_t k = 0; k < p.carrier.size(); ++k) {
    auto& slot = f[flat(p.lattice->point(p.carrier[k]))];
    slot = std::max(slot, p.values[k]);
  }
  std::size_t stride = 1;
  for (int axis = m - 1; axis >= 0; --axis) {
    const std::size_t len = static_cast<std::size_t>(extent[axis]);
    for (std::size_t start = 0; start < f.size(); ++start) {
      if ((start / stride) % len != 0) continue;
      for (std::size_t k = 1; k < len; ++k) {
        auto& cur = f[start + k * stride];
        cur = std::max(cur, f[start + (k - 1) * stride] - 1);
      }
      for (std::size_t k = len - 1; k-- > 0;) {
        auto& cur = f[start + k * stride];
        cur = std::max(cur, f[start + (k + 1) * stride] - 1);
      }
    }
    stride *= len;
  }
  return f;
}

}  // namespace detail

/// nullopt when an extension exists: parity on S and |hbar(x) - hbar(y)| <= |x - y|_1.
inline std::optional<ExtendabilityWitness> check_extendable(const PartialHeightFunction& p) {
  if (p.carrier.size() != p.values.size()) throw std::invalid_argument("carrier and values differ in length");
  for (std::size_t k = 0; k < p.carrier.size(); ++k) {
    const auto& z = p.lattice->point(p.carrier[k]);
    if (((p.values[k] % 2) + 2) % 2 != parity(z)) return ExtendabilityWitness{ExtendabilityWitness::Kind::Parity, z, {}, 0, 0};
  }
  const std::size_t s = p.carrier.size();
  if (s <= 4096) {
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = a + 1; b < s; ++b)
        if (auto w = detail::pair_witness(p, a, b)) return w;
    return std::nullopt;
  }
  LatticePoint lo;
  std::vector<std::int64_t> extent;
  auto env = detail::lower_envelope_on_box(p, lo, extent);
  if (!env) {
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = a + 1; b < s; ++b)
        if (auto w = detail::pair_witness(p, a, b)) return w;
    return std::nullopt;
  }
  const int m = p.lattice->dim();
  for (std::size_t k = 0; k < s; ++k) {
    const auto& z = p.lattice->point(p.carrier[k]);
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) idx = idx * static_cast<std::size_t>(extent[i]) + static_cast<std::size_t>(z[i] - lo[i]);
    if ((*env)[idx] > p.values[k])
      for (std::size_t a = 0; a < s; ++a)
        if (auto w = detail::pair_witness(p, a, k)) return w;
  }
  return std::nullopt;
}

namespace detail {

inline void require_extendable(const PartialHeightFunction& p) {
  if (p.carrier.empty()) throw Error(ErrorKind::EmptyCarrier, "no prescribed values");
  if (auto w = check_extendable(p)) throw Error(ErrorKind::NotExtendable, w->describe());
}

}  // namespace detail

/// h(y) = max_x (hbar(x) - |x - y|_1): the pointwise smallest extension.
inline HeightFunction extend_min(const PartialHeightFunction& p) {
  detail::require_extendable(p);
  const auto& d = *p.lattice;
  HeightFunction h{p.lattice, std::vector<std::int64_t>(d.size())};
  for (std::size_t y = 0; y < d.size(); ++y) {
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::size_t k = 0; k < p.carrier.size(); ++k) best = std::max(best, p.values[k] - l1_distance(d.point(p.carrier[k]), d.point(y)));
    h.values[y] = best;
  }
  return h;
}

/// h(y) = min_x (hbar(x) + |x - y|_1): the pointwise largest extension.
inline HeightFunction extend_max(const PartialHeightFunction& p) {
  detail::require_extendable(p);
  const auto& d = *p.lattice;
  HeightFunction h{p.lattice, std::vector<std::int64_t>(d.size())};
  for (std::size_t y = 0; y < d.size(); ++y) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t k = 0; k < p.carrier.size(); ++k) best = std::min(best, p.values[k] + l1_distance(d.point(p.carrier[k]), d.point(y)));
    h.values[y] = best;
  }
  return h;
}

inline SiteConstraint pin_constraint(const PartialHeightFunction& p) {
  SiteConstraint c = SiteConstraint::unconstrained(p.lattice->size());
  for (std::size_t k = 0; k < p.carrier.size(); ++k) c.windows[p.carrier[k]] = SiteWindow::pin(p.values[k]);
  return c;
}

inline CountResult count_extensions(const PartialHeightFunction& p, const CountOptions& opts = {}) {
  detail::require_extendable(p);
  return count_constrained(*p.lattice, pin_constraint(p), opts);
}

}  // namespace heightlab
