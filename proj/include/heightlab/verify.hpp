#pragma once

// Finite-n numerical checks of the profile theorem, the variational principle,
// the large deviations quantities and the robustness lemmas.

#include "heightlab/enumeration.hpp"
#include "heightlab/simplicial.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace heightlab {

struct VerificationInstance {
  nlohmann::json params;
  double lhs = 0;
  double rhs = 0;
  double gap = 0;  // lhs - rhs
  bool ok = true;
};

struct VerificationReport {
  std::string claim;
  std::vector<VerificationInstance> instances;
  std::vector<double> trend;  // |gap| per n where a sequence is involved
  double tolerance = 0;
  bool pass = false;
  std::vector<std::string> notes;
  double runtime_seconds = 0;

  /// Timing is left out when `with_timing` is false so reports compare byte for byte.
  nlohmann::json to_json(bool with_timing = true) const {
    nlohmann::json j;
    j["claim"] = claim;
    j["tolerance"] = tolerance;
    j["verdict"] = pass ? "pass" : "fail";
    j["trend"] = trend;
    j["notes"] = notes;
    auto& arr = j["instances"] = nlohmann::json::array();
    for (const auto& i : instances)
      arr.push_back({{"params", i.params}, {"lhs", i.lhs}, {"rhs", i.rhs}, {"gap", i.gap}, {"ok", i.ok}});
    if (with_timing) j["runtime_seconds"] = runtime_seconds;
    return j;
  }
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// |gap| non-increasing over the last three entries and the final one within tolerance.
inline bool trend_passes(const std::vector<double>& trend, double tolerance) {
  if (trend.empty()) return false;
  const std::size_t from = trend.size() >= 3 ? trend.size() - 3 : 0;
  for (std::size_t i = from + 1; i < trend.size(); ++i)
    if (trend[i] > trend[i - 1]) return false;
  return trend.back() <= tolerance;
}

}  // namespace detail

/// Entropy of the eps*l ball around h_K on K_n against the macroscopic entropy of h_K.
inline VerificationReport check_simplicial_profile(const LipschitzProfile::PwaPtr& hk, const SurfaceTensionModel& model, const Rational& eps,
                                                   const std::vector<std::int64_t>& n_list, double tolerance, const CountOptions& opts = {}) {
  detail::Stopwatch clock;
  VerificationReport r;
  r.claim = "simplicial-profile";
  r.tolerance = tolerance;
  const auto region = hk->mesh().as_region();
  const auto profile = LipschitzProfile::piecewise(hk);
  const Rational delta = eps * hk->mesh().scale();
  const double macro = macro_entropy(*hk, model);
  for (auto n : n_list) {
    const auto kn = discretize(region, n);
    const auto count = count_ball(kn, profile, delta, opts);
    VerificationInstance inst;
    inst.params = {{"n", n}, {"delta", to_string(delta)}, {"sites", kn.size()}, {"count", count.count.str()}};
    inst.rhs = macro;
    if (!count.entropy) {
      inst.lhs = std::numeric_limits<double>::infinity();
      inst.ok = false;
      r.notes.push_back("empty ball at n=" + std::to_string(n));
    } else {
      inst.lhs = *count.entropy;
    }
    inst.gap = inst.lhs - inst.rhs;
    r.trend.push_back(std::fabs(inst.gap));
    r.instances.push_back(std::move(inst));
  }
  r.pass = detail::trend_passes(r.trend, tolerance);
  r.runtime_seconds = clock.seconds();
  return r;
}

/// Macroscopic entropy of the first passing simplicial approximation against the
/// counted entropy of B(R_n, p, delta).
inline VerificationReport check_general_profile(const LipschitzProfile& p, const ContinuumDomain& region, const SurfaceTensionModel& model,
                                                const Rational& delta, std::int64_t n, const Rational& eps, double tolerance,
                                                const CountOptions& opts = {}) {
  detail::Stopwatch clock;
  VerificationReport r;
  r.claim = "general-profile";
  r.tolerance = tolerance;
  auto sweep = rademacher_sweep(p, region, eps);
  VerificationInstance inst;
  inst.params = {{"n", n}, {"delta", to_string(delta)}, {"eps", to_string(eps)}};
  if (sweep.inconclusive()) {
    r.notes.push_back("no scale in the sweep met all approximation conclusions; inconclusive");
    r.instances.push_back(inst);
    r.runtime_seconds = clock.seconds();
    return r;
  }
  inst.params["ell"] = to_string(sweep.accepted->report.ell);
  inst.lhs = macro_entropy(*sweep.accepted->h, model);
  const auto rn = discretize(region, n);
  const auto count = count_ball(rn, p, delta, opts);
  inst.params["count"] = count.count.str();
  inst.rhs = count.entropy ? *count.entropy : std::numeric_limits<double>::infinity();
  inst.gap = inst.lhs - inst.rhs;
  inst.ok = std::fabs(inst.gap) <= tolerance;
  r.trend.push_back(std::fabs(inst.gap));
  r.instances.push_back(std::move(inst));
  r.pass = r.instances.back().ok;
  r.runtime_seconds = clock.seconds();
  return r;
}

struct MinimizeOptions {
  int max_iterations = 20000;
  int stall_window = 100;
  double stall_tolerance = 1e-6;
  /// Optional sup-norm ball |h - centre| <= radius imposed at every vertex.
  std::optional<LipschitzProfile> centre;
  Rational radius{0};
};

struct MinimizeResult {
  std::shared_ptr<const PiecewiseAffine<double>> h;
  double entropy = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective of every accepted iterate
};

namespace detail {

struct LipschitzGraph {
  std::vector<std::vector<std::size_t>> adj;  // consecutive path vertices of every simplex

  explicit LipschitzGraph(const SimplexDomain& mesh) : adj(mesh.vertices().size()) {
    for (std::size_t s = 0; s < mesh.size(); ++s) {
      const auto& vid = mesh.simplex_vertex_indices(s);
      for (std::size_t i = 0; i + 1 < vid.size(); ++i) {
        adj[vid[i]].push_back(vid[i + 1]);
        adj[vid[i + 1]].push_back(vid[i]);
      }
    }
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
  }

  std::vector<std::int64_t> distances_from(std::size_t src) const {
    std::vector<std::int64_t> d(adj.size(), -1);
    std::deque<std::size_t> q{src};
    d[src] = 0;
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      for (auto v : adj[u])
        if (d[v] < 0) {
          d[v] = d[u] + 1;
          q.push_back(v);
        }
    }
    return d;
  }

  // min_y g(y) + step * d(x, y) (sign = +1) or max_y g(y) - step * d(x, y) (sign = -1).
  std::vector<double> envelope(const std::vector<double>& g, double step, int sign) const {
    std::vector<double> out = g;
    using Item = std::pair<double, std::size_t>;
    auto cmp = [sign](const Item& a, const Item& b) { return sign > 0 ? a.first > b.first : a.first < b.first; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> q(cmp);
    for (std::size_t i = 0; i < g.size(); ++i) q.emplace(g[i], i);
    while (!q.empty()) {
      auto [v, u] = q.top();
      q.pop();
      if (v != out[u]) continue;
      for (auto w : adj[u]) {
        double cand = v + sign * step;
        if (sign > 0 ? cand < out[w] : cand > out[w]) {
          out[w] = cand;
          q.emplace(cand, w);
        }
      }
    }
    return out;
  }
};

}  // namespace detail

/// Projected descent on the vertex values of a scale-l mesh of R. Boundary
/// vertices (those missing some incident Kuhn simplex) are pinned to the
/// boundary profile; each step is mapped back onto the l-Lipschitz set of the
/// mesh graph by averaging the inf- and sup-convolutions and clamping to the
/// pin cones, which leaves feasible points unchanged.
inline MinimizeResult minimize_macro_entropy(const ContinuumDomain& region, const LipschitzProfile& boundary, const Rational& ell,
                                             const SurfaceTensionModel& raw_model, const MinimizeOptions& opts = {}) {
  const SurfaceTensionModel model =
      raw_model.kind() == SurfaceTensionModel::Kind::Table && !raw_model.convexified() ? raw_model.lower_convex_envelope() : raw_model;
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(region, ell));
  const std::size_t nv = mesh->vertices().size();
  const detail::LipschitzGraph graph(*mesh);
  const double step = to_double(ell);

  std::vector<std::size_t> pins;
  std::vector<Rational> pin_values;
  for (std::size_t v = 0; v < nv; ++v)
    if (!mesh->is_interior_vertex(v)) {
      pins.push_back(v);
      pin_values.push_back(boundary.value(mesh->vertex_coordinates(v)));
    }
  if (pins.empty()) throw Error(ErrorKind::InfeasibleBoundary, "mesh has no boundary vertex");

  std::vector<double> lower(nv, -std::numeric_limits<double>::infinity()), upper(nv, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < pins.size(); ++k) {
    const auto d = graph.distances_from(pins[k]);
    for (std::size_t j = 0; j < pins.size(); ++j)
      if (abs(pin_values[k] - pin_values[j]) > ell * Rational(d[pins[j]]))
        throw Error(ErrorKind::InfeasibleBoundary, "boundary data is not 1-Lipschitz along the mesh");
    const double b = to_double(pin_values[k]);
    for (std::size_t v = 0; v < nv; ++v) {
      lower[v] = std::max(lower[v], b - step * static_cast<double>(d[v]));
      upper[v] = std::min(upper[v], b + step * static_cast<double>(d[v]));
    }
  }
  std::vector<double> box_lo(nv, -std::numeric_limits<double>::infinity()), box_hi(nv, std::numeric_limits<double>::infinity());
  if (opts.centre) {
    for (std::size_t v = 0; v < nv; ++v) {
      const auto x = mesh->vertex_coordinates(v);
      box_lo[v] = to_double(opts.centre->value(x) - opts.radius);
      box_hi[v] = to_double(opts.centre->value(x) + opts.radius);
    }
  }
  std::vector<bool> pinned(nv, false);
  for (auto v : pins) pinned[v] = true;

  auto project = [&](const std::vector<double>& g) {
    auto a = graph.envelope(g, step, +1);
    auto b = graph.envelope(g, step, -1);
    std::vector<double> h(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      h[v] = std::clamp(0.5 * (a[v] + b[v]), lower[v], upper[v]);
      h[v] = std::clamp(h[v], box_lo[v], box_hi[v]);
    }
    for (std::size_t k = 0; k < pins.size(); ++k) h[pins[k]] = to_double(pin_values[k]);
    return h;
  };

  const std::size_t ns = mesh->size();
  auto gradient_of = [&](const std::vector<double>& h, std::size_t s) {
    const auto& id = mesh->simplex(s);
    const auto& vid = mesh->simplex_vertex_indices(s);
    std::vector<double> g(static_cast<std::size_t>(mesh->dim()));
    for (std::size_t i = 0; i < id.perm.size(); ++i)
      g[static_cast<std::size_t>(id.perm[i])] = std::clamp((h[vid[i + 1]] - h[vid[i]]) / step, -1.0, 1.0);
    return g;
  };
  auto objective = [&](const std::vector<double>& h) {
    double total = 0;
    for (std::size_t s = 0; s < ns; ++s) total += model(gradient_of(h, s));
    return total / static_cast<double>(ns);
  };

  std::vector<double> h(nv);
  for (std::size_t v = 0; v < nv; ++v) h[v] = 0.5 * (lower[v] + upper[v]);
  h = project(h);
  double f = objective(h);
  MinimizeResult res;
  res.history.push_back(f);
  double eta = 0.5;
  std::vector<double> best_by_iter{f};
  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    std::vector<double> grad(nv, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& id = mesh->simplex(s);
      const auto& vid = mesh->simplex_vertex_indices(s);
      const auto mg = model.gradient(gradient_of(h, s));
      for (std::size_t i = 0; i < id.perm.size(); ++i) {
        const double c = mg[static_cast<std::size_t>(id.perm[i])] / step;
        grad[vid[i + 1]] += c;
        grad[vid[i]] -= c;
      }
    }
    double norm = 0;
    for (std::size_t v = 0; v < nv; ++v) {
      if (pinned[v]) grad[v] = 0;
      norm = std::max(norm, std::fabs(grad[v]));
    }
    if (norm == 0) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    while (eta > 1e-14) {
      std::vector<double> trial(nv);
      for (std::size_t v = 0; v < nv; ++v) trial[v] = h[v] - eta * step * grad[v] / norm;
      trial = project(trial);
      const double ft = objective(trial);
      if (ft < f) {
        h = std::move(trial);
        f = ft;
        res.history.push_back(f);
        eta = std::min(1.0, eta * 1.5);
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    best_by_iter.push_back(f);
    if (!accepted) {
      res.converged = true;
      break;
    }
    const auto w = static_cast<std::size_t>(opts.stall_window);
    if (best_by_iter.size() > w && best_by_iter[best_by_iter.size() - 1 - w] - f < opts.stall_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.entropy = f;
  res.h = std::make_shared<const PiecewiseAffine<double>>(mesh, std::move(h));
  return res;
}

/// Minimized macroscopic entropy against the counted entropy of the
/// delta-boundary set with affinely rounded boundary data.
inline VerificationReport check_variational(const ContinuumDomain& region, const LipschitzProfile& boundary, const SurfaceTensionModel& model,
                                            const Rational& delta, std::int64_t n, const Rational& ell, double tolerance,
                                            const CountOptions& opts = {}) {
  detail::Stopwatch clock;
  VerificationReport r;
  r.claim = "variational";
  r.tolerance = tolerance;
  auto mini = minimize_macro_entropy(region, boundary, ell, model);
  auto rn = make_domain(discretize(region, n));
  auto count = count_delta_boundary(round_profile_on_boundary(boundary, rn), delta, opts);
  VerificationInstance inst;
  inst.params = {{"n", n},
                 {"delta", to_string(delta)},
                 {"ell", to_string(ell)},
                 {"count", count.count.str()},
                 {"iterations", mini.iterations},
                 {"converged", mini.converged}};
  inst.lhs = mini.entropy;
  inst.rhs = count.entropy ? *count.entropy : std::numeric_limits<double>::infinity();
  inst.gap = inst.lhs - inst.rhs;
  inst.ok = std::fabs(inst.gap) <= tolerance;
  r.trend.push_back(std::fabs(inst.gap));
  r.pass = inst.ok;
  r.instances.push_back(std::move(inst));
  r.runtime_seconds = clock.seconds();
  return r;
}

/// Sup-norm ball around a profile, tested at the lattice sites: |h(z)/n - c(z/n)| < r (or <= r).
struct ProfileBall {
  LipschitzProfile centre;
  Rational radius;
  bool closed = false;
};

struct MuResult {
  BigInt favourable;
  BigInt total;
  double mu = 0;
  double rate = std::numeric_limits<double>::infinity();  // -(1/|R_n|) ln mu
};

inline SiteConstraint ball_window(const DiscreteDomain& d, const ProfileBall& b) {
  if (!b.closed) return ball_constraint(d, b.centre, b.radius);
  SiteConstraint c = SiteConstraint::unconstrained(d.size());
  const Rational n(d.scale());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Rational centre = n * b.centre.value(d.rescaled(i));
    c.windows[i] = SiteWindow::range(ceil_of(centre - b.radius * n), floor_of(centre + b.radius * n));
  }
  return c;
}

/// mu_{delta,n} of a finite union of balls, by inclusion-exclusion over exact counts.
inline MuResult measure_mu(const BoundaryHeights& hb, const Rational& delta, const std::vector<ProfileBall>& balls, const CountOptions& opts = {}) {
  if (balls.size() > 16) throw std::invalid_argument("at most 16 balls per event");
  const DiscreteDomain& d = *hb.domain;
  const SiteConstraint base = delta_boundary_constraint(hb, delta);
  MuResult r;
  r.total = count_constrained(d, base, opts).count;
  if (r.total == 0) throw Error(ErrorKind::EmptySet, "the delta-boundary set is empty");
  std::vector<SiteConstraint> windows;
  for (const auto& b : balls) windows.push_back(ball_window(d, b));
  BigInt fav = 0;
  for (std::uint32_t mask = 1; mask < (1u << balls.size()); ++mask) {
    SiteConstraint c = base;
    int bits = 0;
    for (std::size_t k = 0; k < balls.size(); ++k)
      if (mask & (1u << k)) {
        c = intersect(c, windows[k]);
        ++bits;
      }
    auto cnt = count_constrained(d, c, opts).count;
    if (bits % 2) fav += cnt;
    else fav -= cnt;
  }
  r.favourable = fav;
  if (fav > 0) {
    const double log_mu = log_big(fav) - log_big(r.total);
    r.mu = std::exp(log_mu);
    r.rate = -log_mu / static_cast<double>(d.size());
  }
  return r;
}

struct LdpEntry {
  MuResult mu;
  double rate_at_centre = 0;   // I at the ball centre
  double rate_in_ball = 0;     // I at the minimizer restricted to the closed ball
};

struct LdpReport {
  double infimum = 0;  // E
  std::vector<LdpEntry> entries;
  VerificationReport report;
};

/// For every ball: exact mu, the empirical rate, and the bracket of I given by
/// its value at the centre and at the minimizer inside the closed ball. The
/// infimum of I over an open ball is not computed exactly.
inline LdpReport check_ldp(const ContinuumDomain& region, const LipschitzProfile& boundary, const SurfaceTensionModel& model, const Rational& delta,
                           std::int64_t n, const Rational& ell, const std::vector<ProfileBall>& balls, const CountOptions& opts = {}) {
  detail::Stopwatch clock;
  LdpReport out;
  out.report.claim = "ldp";
  out.report.notes.push_back("inf of I over each ball is bracketed by its value at the centre and at the minimizer within the closed ball");
  auto mini = minimize_macro_entropy(region, boundary, ell, model);
  out.infimum = mini.entropy;
  auto rn = make_domain(discretize(region, n));
  auto hb = round_profile_on_boundary(boundary, rn);
  const auto mesh = mini.h->mesh_ptr();
  for (const auto& b : balls) {
    LdpEntry e;
    e.mu = measure_mu(hb, delta, {b}, opts);
    e.rate_at_centre = macro_entropy(*interpolate_on_mesh(b.centre, mesh), model) - out.infimum;
    MinimizeOptions local;
    local.centre = b.centre;
    local.radius = b.radius;
    e.rate_in_ball = minimize_macro_entropy(region, boundary, ell, model, local).entropy - out.infimum;
    VerificationInstance inst;
    inst.params = {{"centre", b.centre.name()}, {"radius", to_string(b.radius)}, {"favourable", e.mu.favourable.str()}, {"total", e.mu.total.str()},
                   {"mu", e.mu.mu}, {"rate_in_ball", e.rate_in_ball}};
    inst.lhs = e.mu.rate;
    inst.rhs = e.rate_at_centre;
    inst.gap = inst.lhs - inst.rhs;
    out.report.instances.push_back(std::move(inst));
    out.entries.push_back(e);
  }
  // orderings of empirical rates and of I agree pairwise
  bool consistent = true;
  for (std::size_t a = 0; a < out.entries.size(); ++a)
    for (std::size_t b = 0; b < out.entries.size(); ++b)
      if (out.entries[a].rate_at_centre < out.entries[b].rate_at_centre && !(out.entries[a].mu.rate < out.entries[b].mu.rate)) consistent = false;
  out.report.pass = consistent;
  out.report.runtime_seconds = clock.seconds();
  return out;
}

/// Exact count inequalities from the robustness lemmas plus the macroscopic
/// robustness bound, on small deterministic instance families.
inline VerificationReport check_robustness_lemmas(std::uint64_t seed = 1, const CountOptions& opts = {}) {
  detail::Stopwatch clock;
  VerificationReport r;
  r.claim = "robustness-lemmas";
  std::mt19937_64 rng(seed);
  const auto unit = ContinuumDomain::box({Rational(0)}, {Rational(1)});

  // profile change: B(h~, e) is inside B(h, 2e) whenever max |h - h~| <= e
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> num(-4, 4), nn(4, 12), shift(0, 4), bend(0, 2);
    const std::int64_t n = nn(rng);
    const Rational e(1, 4);
    const auto h = LipschitzProfile::affine({Rational(num(rng), 8)}, Rational(num(rng), 16));
    const auto& a = std::get<AffineSpec>(h.variant());
    // tent through h(1/2) + t with slopes s +- k: |h - h~| <= |t| + k/2 <= e
    const Rational t = e * (Rational(shift(rng), 4) - Rational(1, 2));
    const Rational k = e * Rational(bend(rng), 2);
    const auto ht = LipschitzProfile::tent({Rational(1, 2), a.s[0] / Rational(2) + a.b + t, a.s[0] + k, a.s[0] - k});
    const auto d = discretize(unit, n);
    const auto small = ball_constraint(d, ht, e);
    const auto both = intersect(small, ball_constraint(d, h, e * Rational(2)));
    const auto cs = count_constrained(d, small, opts).count, cb = count_constrained(d, both, opts).count;
    VerificationInstance inst;
    inst.params = {{"lemma", "profile-change"}, {"n", n}, {"count_small", cs.str()}, {"count_intersection", cb.str()}};
    inst.ok = cs == cb;
    r.instances.push_back(std::move(inst));
  }

  // domain shrink: |B(R_n, h, e)| >= |B(R~_n, h, (c/3) e^2)| with Lip(h) <= 1 - c e
  {
    const Rational e(1, 2), c(1);
    const auto h = LipschitzProfile::affine({Rational(1, 4)});
    const auto inner = ContinuumDomain::box({Rational(1, 4)}, {Rational(3, 4)});
    for (std::int64_t n : {12, 16, 24, 36}) {
      const auto big = count_ball(discretize(unit, n), h, e, opts).count;
      const auto sm = count_ball(discretize(inner, n), h, c / Rational(3) * e * e, opts).count;
      VerificationInstance inst;
      inst.params = {{"lemma", "domain-overcount"}, {"n", n}, {"outer", big.str()}, {"inner", sm.str()}};
      inst.ok = big >= sm;
      r.instances.push_back(std::move(inst));
    }
  }

  // local cube: perturbing the affine boundary by <= e n moves the entropy little
  {
    const Rational s(1, 2);
    for (std::int64_t n : {32, 64}) {
      auto d = make_domain(discrete_cube(1, n));
      auto hb = restrict_to_boundary(affine_height_function(AffineSpec{{s}, 0}, d));
      const double base = entropy_of_set(count_exact_boundary(hb, opts));
      hb.values.back() += 2;
      const double moved = entropy_of_set(count_exact_boundary(hb, opts));
      VerificationInstance inst;
      inst.params = {{"lemma", "local-cube"}, {"n", n}, {"shift", 2}};
      inst.lhs = moved;
      inst.rhs = base;
      inst.gap = moved - base;
      inst.ok = std::fabs(inst.gap) <= 0.15;
      r.instances.push_back(std::move(inst));
    }
  }

  // macroscopic robustness: gradients differ on mass e only
  {
    const auto model = SurfaceTensionModel::closed_form_1d();
    auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(unit, Rational(1, 32)));
    std::vector<Rational> v1, v2;
    for (std::size_t v = 0; v < mesh->vertices().size(); ++v) {
      const auto x = mesh->vertex_coordinates(v)[0];
      v1.push_back(x / Rational(2));
      v2.push_back(x / Rational(2) + (mesh->vertices()[v][0] == 16 ? Rational(1, 64) : Rational(0)));
    }
    const ExactPiecewiseAffine a(mesh, v1), b(mesh, v2);
    const double e = 2.0 / 32;
    const double diff = std::fabs(macro_entropy(a, model) - macro_entropy(b, model));
    VerificationInstance inst;
    inst.params = {{"lemma", "macro-robustness"}, {"mass", e}};
    inst.lhs = diff;
    inst.rhs = 2 * e * std::numbers::ln2;
    inst.gap = inst.lhs - inst.rhs;
    inst.ok = diff <= inst.rhs;
    r.instances.push_back(std::move(inst));
  }

  r.pass = std::all_of(r.instances.begin(), r.instances.end(), [](const auto& i) { return i.ok; });
  r.runtime_seconds = clock.seconds();
  return r;
}

}  // namespace heightlab
