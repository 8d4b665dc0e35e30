#pragma once

// Exact counting of height functions under per-site windows by a frontier
// sweep, entropies, local surface tension and its tabulation.

#include "heightlab/error.hpp"
#include "heightlab/height_function.hpp"
#include "heightlab/lattice.hpp"
#include "heightlab/rational.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <exception>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace heightlab {

/// Allowed values at one site. Missing bounds are filled in by propagation
/// from bounded sites; `pinned` marks a prescribed value whose parity must match.
struct SiteWindow {
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
  bool pinned = false;

  static SiteWindow pin(std::int64_t v) { return {v, v, true}; }
  static SiteWindow range(std::int64_t lo, std::int64_t hi) { return {lo, hi, false}; }
  /// Integers strictly inside (centre - radius, centre + radius).
  static SiteWindow open(const Rational& centre, const Rational& radius) {
    return {floor_of(centre - radius) + 1, ceil_of(centre + radius) - 1, false};
  }
};

struct SiteConstraint {
  std::vector<SiteWindow> windows;  // one per domain index

  static SiteConstraint unconstrained(std::size_t sites) { return {std::vector<SiteWindow>(sites)}; }
};

struct CountOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t state_budget = 4'000'000;
};

struct CountResult {
  BigInt count;
  std::size_t site_count = 0;
  std::optional<double> entropy;  // -ln(count) / site_count, absent when count = 0
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

inline double entropy_of_count(const BigInt& count, std::size_t sites) {
  if (count <= 0) throw Error(ErrorKind::EmptySet, "entropy of an empty set");
  return -log_big(count) / static_cast<double>(sites);
}

inline double entropy_of_set(const CountResult& c) { return entropy_of_count(c.count, c.site_count); }

inline CountResult make_count_result(BigInt count, std::size_t sites) {
  CountResult r{std::move(count), sites, std::nullopt};
  if (r.count > 0) r.entropy = entropy_of_count(r.count, sites);
  return r;
}

/// Inclusive windows after parity filtering and propagation along edges.
struct TightWindows {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
  bool empty = false;
};

inline TightWindows tighten_windows(const DiscreteDomain& d, const SiteConstraint& c) {
  const std::size_t n = d.size();
  if (c.windows.size() != n) throw std::invalid_argument("constraint needs one window per site");
  constexpr std::int64_t none_hi = std::numeric_limits<std::int64_t>::max();
  constexpr std::int64_t none_lo = std::numeric_limits<std::int64_t>::min();
  TightWindows t{std::vector<std::int64_t>(n, none_lo), std::vector<std::int64_t>(n, none_hi), false};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = c.windows[i];
    const int p = parity(d.point(i));
    if (w.pinned && w.lo && (((*w.lo % 2) + 2) % 2) != p)
      throw Error(ErrorKind::UnsatisfiableParity, "pinned value " + std::to_string(*w.lo) + " has the wrong parity");
    // parity first: propagation by graph distance then keeps parity
    if (w.lo) t.lo[i] = *w.lo + ((((*w.lo % 2) + 2) % 2) != p ? 1 : 0);
    if (w.hi) t.hi[i] = *w.hi - ((((*w.hi % 2) + 2) % 2) != p ? 1 : 0);
  }
  using Item = std::pair<std::int64_t, std::size_t>;
  {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    for (std::size_t i = 0; i < n; ++i)
      if (t.hi[i] != none_hi) q.emplace(t.hi[i], i);
    while (!q.empty()) {
      auto [v, i] = q.top();
      q.pop();
      if (v != t.hi[i]) continue;
      for (std::size_t j : d.neighbors(i))
        if (v + 1 < t.hi[j]) {
          t.hi[j] = v + 1;
          q.emplace(v + 1, j);
        }
    }
  }
  {
    std::priority_queue<Item> q;
    for (std::size_t i = 0; i < n; ++i)
      if (t.lo[i] != none_lo) q.emplace(t.lo[i], i);
    while (!q.empty()) {
      auto [v, i] = q.top();
      q.pop();
      if (v != t.lo[i]) continue;
      for (std::size_t j : d.neighbors(i))
        if (v - 1 > t.lo[j]) {
          t.lo[j] = v - 1;
          q.emplace(v - 1, j);
        }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.lo[i] == none_lo || t.hi[i] == none_hi) throw Error(ErrorKind::UnboundedInstance, "some site has no finite window");
    if (t.lo[i] > t.hi[i]) t.empty = true;
  }
  return t;
}

namespace detail {

/// Precomputed bookkeeping for the lexicographic sweep.
struct SweepStep {
  std::vector<std::size_t> back_slots;  // slots of earlier neighbours in the incoming frontier
  std::vector<std::size_t> kept_slots;  // incoming slots that survive this step
  bool keep_new = false;                // the new site stays on the frontier
};

struct SweepPlan {
  std::vector<SweepStep> steps;
  std::vector<std::vector<std::size_t>> frontier_before;  // sites per slot before step i
  std::size_t max_width = 0;
};

inline SweepPlan make_plan(const DiscreteDomain& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> last_use(n);
  for (std::size_t i = 0; i < n; ++i) {
    last_use[i] = i;
    for (std::size_t j : d.neighbors(i)) last_use[i] = std::max(last_use[i], j);
  }
  SweepPlan plan;
  plan.steps.resize(n);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    plan.frontier_before.push_back(active);
    SweepStep& st = plan.steps[i];
    for (std::size_t j : d.neighbors(i)) {
      if (j > i) continue;
      auto it = std::find(active.begin(), active.end(), j);
      st.back_slots.push_back(static_cast<std::size_t>(it - active.begin()));
    }
    std::vector<std::size_t> next;
    for (std::size_t s = 0; s < active.size(); ++s)
      if (last_use[active[s]] != i) {
        st.kept_slots.push_back(s);
        next.push_back(active[s]);
      }
    st.keep_new = last_use[i] != i;
    if (st.keep_new) next.push_back(i);
    active = std::move(next);
    plan.max_width = std::max(plan.max_width, active.size());
  }
  return plan;
}

using StateKey = std::u16string;
using StateMap = std::unordered_map<StateKey, BigInt>;

inline std::int64_t slot_value(const StateKey& key, std::size_t slot, std::int64_t lo) {
  return lo + 2 * static_cast<std::int64_t>(key[slot]);
}

/// Candidate values at site i given a frontier state, in increasing order.
template <class F>
void for_each_candidate(const SweepStep& st, const std::vector<std::size_t>& frontier, const StateKey& key, const TightWindows& w,
                        std::size_t site, F&& f) {
  const std::int64_t lo = w.lo[site], hi = w.hi[site];
  if (st.back_slots.empty()) {
    for (std::int64_t v = lo; v <= hi; v += 2) f(v);
    return;
  }
  const std::int64_t u = slot_value(key, st.back_slots[0], w.lo[frontier[st.back_slots[0]]]);
  for (std::int64_t v : {u - 1, u + 1}) {
    if (v < lo || v > hi) continue;
    bool ok = true;
    for (std::size_t k = 1; k < st.back_slots.size() && ok; ++k) {
      std::int64_t x = slot_value(key, st.back_slots[k], w.lo[frontier[st.back_slots[k]]]);
      ok = (v - x == 1 || x - v == 1);
    }
    if (ok) f(v);
  }
}

inline StateKey next_key(const SweepStep& st, const StateKey& key, std::int64_t v, std::int64_t lo) {
  StateKey out;
  out.reserve(st.kept_slots.size() + 1);
  for (std::size_t s : st.kept_slots) out.push_back(key[s]);
  if (st.keep_new) out.push_back(static_cast<char16_t>((v - lo) / 2));
  return out;
}

inline void check_key_range(const TightWindows& w) {
  for (std::size_t i = 0; i < w.lo.size(); ++i)
    if ((w.hi[i] - w.lo[i]) / 2 > 0xFFFF) throw Error(ErrorKind::InstanceTooLarge, "site window wider than the state encoding allows");
}

inline StateMap advance(const SweepStep& st, const std::vector<std::size_t>& frontier, const StateMap& states, const TightWindows& w,
                        std::size_t site, unsigned threads) {
  auto expand_range = [&](auto begin, auto end, StateMap& out) {
    for (auto it = begin; it != end; ++it) {
      const auto& [key, count] = **it;
      for_each_candidate(st, frontier, key, w, site, [&](std::int64_t v) { out[next_key(st, key, v, w.lo[site])] += count; });
    }
  };
  std::vector<const StateMap::value_type*> items;
  items.reserve(states.size());
  for (const auto& kv : states) items.push_back(&kv);
  StateMap next;
  if (threads <= 1 || items.size() < 2048) {
    next.reserve(items.size() * 2);
    expand_range(items.begin(), items.end(), next);
    return next;
  }
  std::vector<StateMap> parts(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (items.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t b = std::min(items.size(), t * chunk), e = std::min(items.size(), b + chunk);
    pool.emplace_back([&, b, e, t] { expand_range(items.begin() + static_cast<std::ptrdiff_t>(b), items.begin() + static_cast<std::ptrdiff_t>(e), parts[t]); });
  }
  for (auto& th : pool) th.join();
  next = std::move(parts[0]);
  for (unsigned t = 1; t < threads; ++t)
    for (auto& [k, c] : parts[t]) next[k] += c;
  return next;
}

}  // namespace detail

/// Number of height functions on d meeting every window.
inline CountResult count_constrained(const DiscreteDomain& d, const SiteConstraint& c, const CountOptions& opts = {}) {
  TightWindows w = tighten_windows(d, c);
  if (w.empty) return make_count_result(0, d.size());
  detail::check_key_range(w);
  const auto plan = detail::make_plan(d);
  const unsigned threads = resolve_threads(opts.threads);
  detail::StateMap states;
  states.emplace(detail::StateKey{}, BigInt(1));
  for (std::size_t i = 0; i < d.size(); ++i) {
    states = detail::advance(plan.steps[i], plan.frontier_before[i], states, w, i, threads);
    if (states.size() > opts.state_budget)
      throw Error(ErrorKind::InstanceTooLarge, std::to_string(states.size()) + " frontier states exceed the budget of " + std::to_string(opts.state_budget));
    if (states.empty()) return make_count_result(0, d.size());
  }
  BigInt total = 0;
  for (const auto& [k, v] : states) total += v;
  return make_count_result(std::move(total), d.size());
}

inline SiteConstraint exact_boundary_constraint(const BoundaryHeights& hb) {
  const auto& d = *hb.domain;
  SiteConstraint c = SiteConstraint::unconstrained(d.size());
  const auto& idx = d.boundary_indices();
  if (hb.values.size() != idx.size()) throw std::invalid_argument("one boundary value per boundary site required");
  for (std::size_t k = 0; k < idx.size(); ++k) c.windows[idx[k]] = SiteWindow::pin(hb.values[k]);
  return c;
}

/// |h(z) - hB(z)| < delta n on the boundary, strict.
inline SiteConstraint delta_boundary_constraint(const BoundaryHeights& hb, const Rational& delta) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  const auto& d = *hb.domain;
  SiteConstraint c = SiteConstraint::unconstrained(d.size());
  const auto& idx = d.boundary_indices();
  if (hb.values.size() != idx.size()) throw std::invalid_argument("one boundary value per boundary site required");
  const Rational radius = delta * Rational(d.scale());
  for (std::size_t k = 0; k < idx.size(); ++k) c.windows[idx[k]] = SiteWindow::open(Rational(hb.values[k]), radius);
  return c;
}

/// |p(z/n) - h(z)/n| < delta at every site, strict.
inline SiteConstraint ball_constraint(const DiscreteDomain& d, const LipschitzProfile& p, const Rational& delta) {
  if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
  if (p.dim() != d.dim()) throw std::invalid_argument("profile and domain dimensions differ");
  SiteConstraint c = SiteConstraint::unconstrained(d.size());
  const Rational n(d.scale());
  const Rational radius = delta * n;
  for (std::size_t i = 0; i < d.size(); ++i) c.windows[i] = SiteWindow::open(n * p.value(d.rescaled(i)), radius);
  return c;
}

/// Intersection of two constraints on the same domain.
inline SiteConstraint intersect(const SiteConstraint& a, const SiteConstraint& b) {
  SiteConstraint c = a;
  for (std::size_t i = 0; i < c.windows.size(); ++i) {
    auto& w = c.windows[i];
    const auto& v = b.windows[i];
    if (v.lo) w.lo = w.lo ? std::max(*w.lo, *v.lo) : *v.lo;
    if (v.hi) w.hi = w.hi ? std::min(*w.hi, *v.hi) : *v.hi;
    w.pinned = w.pinned || v.pinned;
  }
  return c;
}

/// Shift every bound by c.
inline SiteConstraint translate(const SiteConstraint& a, std::int64_t c) {
  SiteConstraint out = a;
  for (auto& w : out.windows) {
    if (w.lo) *w.lo += c;
    if (w.hi) *w.hi += c;
  }
  return out;
}

inline CountResult count_exact_boundary(const BoundaryHeights& hb, const CountOptions& opts = {}) {
  return count_constrained(*hb.domain, exact_boundary_constraint(hb), opts);
}

inline CountResult count_delta_boundary(const BoundaryHeights& hb, const Rational& delta, const CountOptions& opts = {}) {
  return count_constrained(*hb.domain, delta_boundary_constraint(hb, delta), opts);
}

inline CountResult count_ball(const DiscreteDomain& d, const LipschitzProfile& p, const Rational& delta, const CountOptions& opts = {}) {
  return count_constrained(d, ball_constraint(d, p, delta), opts);
}

/// |M(Q_n, h^{s.x})| with Q_n = [0,n)^m.
inline CountResult count_local_cube(const RationalVector& s, std::int64_t n, const CountOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  for (const auto& c : s)
    if (abs(c) > 1) throw Error(ErrorKind::SlopeOutOfRange, "slope component outside [-1,1]");
  auto d = make_domain(discrete_cube(static_cast<int>(s.size()), n));
  auto h = affine_height_function(AffineSpec{s, 0}, d);
  return count_exact_boundary(restrict_to_boundary(h), opts);
}

/// ent_n(s)
inline double ent_local_n(const RationalVector& s, std::int64_t n, const CountOptions& opts = {}) {
  return entropy_of_set(count_local_cube(s, n, opts));
}

/// ((1+s)/2) ln((1+s)/2) + ((1-s)/2) ln((1-s)/2)
inline double sigma_1d(double s) {
  auto term = [](double p) { return p > 0 ? p * std::log(p) : 0.0; };
  return term((1 + s) / 2) + term((1 - s) / 2);
}

inline double sigma_1d_derivative(double s) {
  const double c = std::clamp(s, -1 + 1e-12, 1 - 1e-12);
  return 0.5 * std::log((1 + c) / (1 - c));
}

/// Least-squares fit y ~ a + b/n + c ln(n)/n (finite-volume boundary and
/// Stirling corrections); two points drop the 1/n term. Returns a.
inline double extrapolate_entropy(const std::vector<std::int64_t>& ns, const std::vector<double>& ys) {
  if (ns.size() == 1) return ys[0];
  const std::size_t k = ns.size() >= 3 ? 3 : 2;
  std::vector<std::array<double, 3>> rows;
  for (auto n : ns) {
    const double x = static_cast<double>(n);
    if (k == 3) rows.push_back({1.0, 1.0 / x, std::log(x) / x});
    else rows.push_back({1.0, std::log(x) / x, 0.0});
  }
  // normal equations, solved by Gaussian elimination with partial pivoting
  double a[3][4] = {};
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += rows[r][i] * rows[r][j];
      a[i][k] += rows[r][i] * ys[r];
    }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    if (std::fabs(a[c][c]) < 1e-300) return ys.back();
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return a[0][k] / a[0][0];
}

/// Evaluable ent(s): the 1D closed form, or a grid table of extrapolated
/// values with multilinear interpolation clamped to [-ln 2, 0].
class SurfaceTensionModel {
 public:
  enum class Kind { ClosedForm1D, Table };

  struct Entry {
    RationalVector s;
    std::vector<double> ent_n;  // aligned with n_list
    double extrapolated = 0;
  };

  static SurfaceTensionModel closed_form_1d() {
    SurfaceTensionModel m;
    m.kind_ = Kind::ClosedForm1D;
    m.dim_ = 1;
    return m;
  }

  static RationalVector grid_axis(int grid) {
    if (grid < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
    RationalVector axis;
    for (int k = 0; k < grid; ++k) axis.push_back(Rational(-1) + Rational(2 * k, grid - 1));
    return axis;
  }

  /// Entries in lexicographic order of the grid nodes (first axis slowest).
  static SurfaceTensionModel from_table(int dim, int grid, std::vector<std::int64_t> n_list, std::vector<Entry> entries) {
    std::size_t expected = 1;
    for (int i = 0; i < dim; ++i) expected *= static_cast<std::size_t>(grid);
    if (dim < 1 || grid < 2 || entries.size() != expected) throw Error(ErrorKind::CorruptTable, "table shape does not match its grid");
    SurfaceTensionModel m;
    m.kind_ = Kind::Table;
    m.dim_ = dim;
    m.grid_ = grid;
    m.n_list_ = std::move(n_list);
    m.entries_ = std::move(entries);
    for (const auto& e : m.entries_) m.node_values_.push_back(std::clamp(e.extrapolated, -std::numbers::ln2, 0.0));
    return m;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int grid() const { return grid_; }
  const std::vector<std::int64_t>& n_list() const { return n_list_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<double>& node_values() const { return node_values_; }
  bool convexified() const { return convexified_; }

  double operator()(std::span<const double> s) const {
    check_slope(s);
    if (kind_ == Kind::ClosedForm1D) return std::clamp(sigma_1d(std::clamp(s[0], -1.0, 1.0)), -std::numbers::ln2, 0.0);
    return std::clamp(interpolate(s), -std::numbers::ln2, 0.0);
  }

  double operator()(std::initializer_list<double> s) const { return (*this)(std::span<const double>(s.begin(), s.size())); }

  std::vector<double> gradient(std::span<const double> s) const {
    check_slope(s);
    if (kind_ == Kind::ClosedForm1D) return {sigma_1d_derivative(s[0])};
    std::vector<double> g(s.size());
    std::vector<double> a(s.begin(), s.end()), b(s.begin(), s.end());
    const double h = 1e-6;
    for (std::size_t i = 0; i < s.size(); ++i) {
      a[i] = std::min(1.0, s[i] + h);
      b[i] = std::max(-1.0, s[i] - h);
      g[i] = (interpolate(a) - interpolate(b)) / (a[i] - b[i]);
      a[i] = b[i] = s[i];
    }
    return g;
  }

  /// Node values replaced by the lower convex envelope of the node data.
  SurfaceTensionModel lower_convex_envelope() const {
    SurfaceTensionModel out = *this;
    out.convexified_ = true;
    if (kind_ == Kind::ClosedForm1D) return out;
    const auto axis = grid_axis(grid_);
    std::vector<std::vector<double>> pts;
    for (std::size_t k = 0; k < node_values_.size(); ++k) pts.push_back(node_coordinates(k, axis));
    if (dim_ == 1) {
      std::vector<std::size_t> hull;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        while (hull.size() >= 2) {
          std::size_t a = hull[hull.size() - 2], b = hull.back();
          double cross = (pts[b][0] - pts[a][0]) * (node_values_[k] - node_values_[a]) - (node_values_[b] - node_values_[a]) * (pts[k][0] - pts[a][0]);
          if (cross <= 0) hull.pop_back();
          else break;
        }
        hull.push_back(k);
      }
      for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        std::size_t a = hull[h], b = hull[h + 1];
        for (std::size_t k = a; k <= b; ++k) {
          double t = (pts[k][0] - pts[a][0]) / (pts[b][0] - pts[a][0]);
          out.node_values_[k] = std::min(node_values_[k], (1 - t) * node_values_[a] + t * node_values_[b]);
        }
      }
      return out;
    }
    if (dim_ != 2) throw Error(ErrorKind::UnsupportedDimension, "convex envelope implemented for dimension <= 2");
    const std::size_t g = pts.size();
    for (std::size_t q = 0; q < g; ++q) {
      double best = node_values_[q];
      const double qx = pts[q][0], qy = pts[q][1];
      for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = a + 1; b < g; ++b) {
          // segment
          double ux = pts[b][0] - pts[a][0], uy = pts[b][1] - pts[a][1];
          double wx = qx - pts[a][0], wy = qy - pts[a][1];
          if (std::fabs(ux * wy - uy * wx) < 1e-12) {
            double t = (ux * wx + uy * wy) / (ux * ux + uy * uy);
            if (t >= -1e-12 && t <= 1 + 1e-12) best = std::min(best, (1 - t) * node_values_[a] + t * node_values_[b]);
          }
          for (std::size_t c = b + 1; c < g; ++c) {
            double vx = pts[c][0] - pts[a][0], vy = pts[c][1] - pts[a][1];
            double det = ux * vy - uy * vx;
            if (std::fabs(det) < 1e-12) continue;
            double l1 = (wx * vy - wy * vx) / det;
            double l2 = (ux * wy - uy * wx) / det;
            double l0 = 1 - l1 - l2;
            if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
            best = std::min(best, l0 * node_values_[a] + l1 * node_values_[b] + l2 * node_values_[c]);
          }
        }
      out.node_values_[q] = best;
    }
    return out;
  }

 private:
  void check_slope(std::span<const double> s) const {
    if (static_cast<int>(s.size()) != dim_) throw Error(ErrorKind::SlopeOutOfRange, "slope has the wrong dimension");
    for (double c : s)
      if (!(std::fabs(c) <= 1 + 1e-9)) throw Error(ErrorKind::SlopeOutOfRange, "slope component " + std::to_string(c) + " outside [-1,1]");
  }

  std::vector<double> node_coordinates(std::size_t k, const RationalVector& axis) const {
    std::vector<double> x(static_cast<std::size_t>(dim_));
    for (int i = dim_ - 1; i >= 0; --i) {
      x[i] = to_double(axis[k % static_cast<std::size_t>(grid_)]);
      k /= static_cast<std::size_t>(grid_);
    }
    return x;
  }

  double interpolate(std::span<const double> s) const {
    const int g = grid_;
    std::vector<int> base(static_cast<std::size_t>(dim_));
    std::vector<double> frac(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
      double t = (std::clamp(s[i], -1.0, 1.0) + 1) / 2 * (g - 1);
      int k = std::min(static_cast<int>(std::floor(t)), g - 2);
      base[i] = k;
      frac[i] = t - k;
    }
    double value = 0;
    for (std::uint32_t corner = 0; corner < (1u << dim_); ++corner) {
      double weight = 1;
      std::size_t idx = 0;
      for (int i = 0; i < dim_; ++i) {
        int bit = (corner >> i) & 1;
        weight *= bit ? frac[i] : 1 - frac[i];
        idx = idx * static_cast<std::size_t>(g) + static_cast<std::size_t>(base[i] + bit);
      }
      if (weight != 0) value += weight * node_values_[idx];
    }
    return value;
  }

  Kind kind_ = Kind::ClosedForm1D;
  int dim_ = 1;
  int grid_ = 0;
  bool convexified_ = false;
  std::vector<std::int64_t> n_list_;
  std::vector<Entry> entries_;
  std::vector<double> node_values_;
};

/// ent_n on every grid slope and every n, extrapolated per slope. Entries run
/// in parallel; each count is single-threaded so the result is schedule-free.
inline SurfaceTensionModel build_surface_tension_table(int dim, int grid, const std::vector<std::int64_t>& n_list, const CountOptions& opts = {}) {
  if (n_list.empty()) throw std::invalid_argument("n list is empty");
  const auto axis = SurfaceTensionModel::grid_axis(grid);
  std::size_t nodes = 1;
  for (int i = 0; i < dim; ++i) nodes *= static_cast<std::size_t>(grid);
  std::vector<SurfaceTensionModel::Entry> entries(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    std::size_t r = k;
    entries[k].s.resize(static_cast<std::size_t>(dim));
    for (int i = dim - 1; i >= 0; --i) {
      entries[k].s[i] = axis[r % static_cast<std::size_t>(grid)];
      r /= static_cast<std::size_t>(grid);
    }
    entries[k].ent_n.assign(n_list.size(), 0.0);
  }
  const std::size_t tasks = nodes * n_list.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  CountOptions inner = opts;
  inner.threads = 1;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      try {
        auto& e = entries[t / n_list.size()];
        e.ent_n[t % n_list.size()] = ent_local_n(e.s, n_list[t % n_list.size()], inner);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<std::size_t>(resolve_threads(opts.threads), tasks);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  for (auto& e : entries) e.extrapolated = extrapolate_entropy(n_list, e.ent_n);
  return SurfaceTensionModel::from_table(dim, grid, n_list, std::move(entries));
}

}  // namespace heightlab
