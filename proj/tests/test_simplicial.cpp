#include "heightlab/simplicial.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <set>

using namespace heightlab;

namespace {

Rational q(std::int64_t a, std::int64_t b = 1) { return Rational(a, b); }

RationalVector rv(std::initializer_list<Rational> xs) { return RationalVector(xs); }

// Every Kuhn simplex of the given scale in the cube [0, cells*scale]^m.
std::vector<SimplexId> all_simplices(int m, std::int64_t cells, const Rational& scale) {
  std::vector<SimplexId> out;
  LatticePoint base(static_cast<std::size_t>(m), 0);
  for (;;) {
    for (const auto& p : all_permutations(m)) out.push_back({base, p, scale});
    int k = 0;
    while (k < m && base[k] == cells - 1) base[k] = 0, ++k;
    if (k == m) break;
    ++base[k];
  }
  return out;
}

}  // namespace

TEST(SimplexContaining, Examples) {
  auto a = simplex_containing(rv({q(11, 10), q(-1, 2), q(23, 10)}), q(1));
  EXPECT_EQ(a.base, (LatticePoint{1, -1, 2}));
  EXPECT_EQ(a.perm, (std::vector<int>{1, 2, 0}));

  auto b = simplex_containing(rv({q(7, 10), q(1, 5)}), q(1));
  EXPECT_EQ(b.base, (LatticePoint{0, 0}));
  EXPECT_EQ(b.perm, (std::vector<int>{0, 1}));

  auto c = simplex_containing(rv({q(1, 2), q(1, 2)}), q(1));
  EXPECT_EQ(c.perm, (std::vector<int>{0, 1}));
}

TEST(SimplexVertices, Examples) {
  auto upper = simplex_vertices({{0, 0}, {1, 0}, q(1)});
  EXPECT_EQ(upper, (std::vector<RationalVector>{rv({0, 0}), rv({0, 1}), rv({1, 1})}));
  auto lower = simplex_vertices({{0, 0}, {0, 1}, q(1)});
  EXPECT_EQ(lower, (std::vector<RationalVector>{rv({0, 0}), rv({1, 0}), rv({1, 1})}));
}

TEST(Kuhn, TilingVolumeAndPointLocation) {
  std::mt19937_64 rng(17);
  for (int m : {2, 3}) {
    const auto simplices = all_simplices(m, 1, q(1));
    ASSERT_EQ(static_cast<std::int64_t>(simplices.size()), factorial(m));
    Rational vol = 0;
    for (const auto& s : simplices) vol += simplex_volume(m, s.scale);
    EXPECT_EQ(vol, Rational(1));

    std::uniform_int_distribution<std::int64_t> coord(0, 999'999);
    for (int t = 0; t < 100'000 / 2; ++t) {
      RationalVector w;
      for (int i = 0; i < m; ++i) w.push_back(q(coord(rng), 1'000'000));
      auto id = simplex_containing(w, q(1));
      ASSERT_TRUE(simplex_contains(id, w));
      // a generic point lies in exactly one closed simplex; ties are on faces
      int hits = 0;
      for (const auto& s : simplices) hits += simplex_contains(s, w) ? 1 : 0;
      std::set<Rational> distinct(w.begin(), w.end());
      if (distinct.size() == w.size()) ASSERT_EQ(hits, 1);
      else ASSERT_GE(hits, 1);
    }
  }
}

TEST(Kuhn, PathPropertyAndIsometry) {
  for (int m : {1, 2, 3}) {
    for (const Rational& scale : {q(1), q(1, 2)}) {
      std::multiset<Rational> reference_edges;
      for (const auto& id : all_simplices(m, 2, scale)) {
        auto v = simplex_vertices(id);
        ASSERT_EQ(v.size(), static_cast<std::size_t>(m + 1));
        for (int i = 0; i < m; ++i) {
          RationalVector diff(static_cast<std::size_t>(m), Rational(0));
          diff[static_cast<std::size_t>(id.perm[i])] = scale;
          for (int k = 0; k < m; ++k) EXPECT_EQ(v[i + 1][k] - v[i][k], diff[k]);
        }
        std::multiset<Rational> edges;
        for (std::size_t a = 0; a < v.size(); ++a)
          for (std::size_t b = a + 1; b < v.size(); ++b) edges.insert(l1_distance(v[a], v[b]));
        if (reference_edges.empty()) reference_edges = edges;
        EXPECT_EQ(edges, reference_edges);
        EXPECT_EQ(simplex_volume(m, id.scale), simplex_volume(m, scale));
      }
    }
  }
}

TEST(SimplicesInside, Examples) {
  auto unit = simplices_inside(ContinuumDomain::unit_cube(2), q(1));
  EXPECT_EQ(unit.size(), 2u);
  EXPECT_EQ(unit.total_volume(), Rational(1));
  EXPECT_EQ(simplices_inside(ContinuumDomain::unit_cube(2), q(1, 2)).size(), 8u);
  // triangle at scale 1/2: Kuhn diagonals run along x = y, so only cell (0,0) fits
  auto tri = simplices_inside(ContinuumDomain::unit_simplex(2), q(1, 2));
  EXPECT_EQ(tri.size(), 2u);
  for (const auto& id : tri.simplices()) EXPECT_EQ(id.base, (LatticePoint{0, 0}));
}

TEST(SimplicesInside, Errors) {
  try {
    simplices_inside(ContinuumDomain::box(rv({0, 0}), rv({q(1, 4), q(1, 4)})), q(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSimplexFits);
  }
  // two unit squares with a gap between them
  std::vector<SimplexId> parts = {{{0, 0}, {0, 1}, q(1)}, {{0, 0}, {1, 0}, q(1)}, {{2, 0}, {0, 1}, q(1)}, {{2, 0}, {1, 0}, q(1)}};
  auto region = ContinuumDomain::simplex_union(2, parts);
  try {
    simplices_inside(region, q(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Disconnected);
  }
}

TEST(InterpolateOnMesh, AffineIsExact) {
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(2), q(1, 4)));
  auto p = LipschitzProfile::affine(rv({q(1, 3), q(-1, 2)}), q(1, 7));
  auto h = interpolate_on_mesh(p, mesh);
  for (std::size_t s = 0; s < mesh->size(); ++s) {
    EXPECT_EQ(h->gradient(s), rv({q(1, 3), q(-1, 2)}));
    for (const auto& x : detail::simplex_samples(mesh->simplex(s), 4)) EXPECT_EQ(h->evaluate_in(s, x), p.value(x));
  }
}

TEST(InterpolateOnMesh, MinReproducedAndQuadraticError) {
  auto mesh1 = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(2), q(1)));
  auto pmin = LipschitzProfile::min_coords({2, 0});
  auto hmin = interpolate_on_mesh(pmin, mesh1);
  for (std::size_t s = 0; s < mesh1->size(); ++s)
    for (const auto& x : detail::simplex_samples(mesh1->simplex(s), 16)) EXPECT_EQ(hmin->evaluate_in(s, x), pmin.value(x));

  // (x^2+y^2)/4 has Hessian I/2; the interpolation error on a Kuhn simplex of
  // scale l is at most (1/2)(1/2)|diam|_2^2 = m l^2 / 4.
  const Rational ell = q(1, 4);
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(2), ell));
  auto pq = LipschitzProfile::quadratic({2, q(1, 4), std::nullopt});
  auto hq = interpolate_on_mesh(pq, mesh);
  double worst = 0;
  for (std::size_t s = 0; s < mesh->size(); ++s)
    for (const auto& x : detail::simplex_samples(mesh->simplex(s), 16))
      worst = std::max(worst, std::fabs(to_double(hq->evaluate_in(s, x) - pq.value(x))));
  EXPECT_GT(worst, 0.0);
  EXPECT_LE(worst, 2 * to_double(ell * ell) / 4);
  EXPECT_LE(to_double(hq->lipschitz()), 1.0);
}

TEST(InterpolateOnMesh, DimensionMismatch) {
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(2), q(1)));
  try {
    interpolate_on_mesh(LipschitzProfile::affine(rv({q(1, 2)})), mesh);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MeshOutsideDomain);
  }
}

TEST(RademacherApprox, MinIsExact) {
  auto a = rademacher_approx(LipschitzProfile::min_coords({2, 0}), ContinuumDomain::unit_cube(2), q(1, 10), q(1, 2));
  EXPECT_EQ(a.report.max_value_error, 0.0);
  EXPECT_EQ(a.report.bad_gradient_fraction, 0.0);
  EXPECT_EQ(a.report.uncovered_volume, 0.0);
  EXPECT_TRUE(a.report.passed());
}

TEST(RademacherApprox, QuadraticSweepFindsScale) {
  auto out = rademacher_sweep(LipschitzProfile::quadratic({2, q(1, 4), std::nullopt}), ContinuumDomain::unit_cube(2), q(1, 5));
  ASSERT_FALSE(out.inconclusive());
  EXPECT_GE(out.accepted->report.ell, q(1, 16));
  EXPECT_TRUE(out.accepted->report.volume_ok);
  EXPECT_TRUE(out.accepted->report.value_ok);
  EXPECT_TRUE(out.accepted->report.gradient_ok);
  // the earlier reports are the scales that failed
  for (std::size_t i = 0; i + 1 < out.reports.size(); ++i) EXPECT_FALSE(out.reports[i].passed());
}

TEST(RademacherApprox, AffinePassesAtLargestScale) {
  auto p = LipschitzProfile::affine(rv({q(1, 2), q(-1, 4)}));
  auto out = rademacher_sweep(p, ContinuumDomain::unit_cube(2), q(1, 10));
  ASSERT_FALSE(out.inconclusive());
  EXPECT_EQ(out.accepted->report.ell, q(1, 2));
}

TEST(RademacherApprox, SweepSkipsScalesThatDoNotFit) {
  auto region = ContinuumDomain::box(rv({0, 0}), rv({q(3, 8), q(3, 8)}));
  auto out = rademacher_sweep(LipschitzProfile::affine(rv({0, 0})), region, q(1, 2));
  EXPECT_EQ(out.skipped, (std::vector<Rational>{q(1, 2)}));
}

TEST(MacroEntropy, Examples) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  auto line = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(1), q(1, 8)));
  auto affine = interpolate_on_mesh(LipschitzProfile::affine(rv({q(1, 2)})), line);
  EXPECT_NEAR(macro_entropy(*affine, closed), sigma_1d(0.5), 1e-15);

  auto tent = interpolate_on_mesh(LipschitzProfile::tent({q(1, 2), q(1, 4), q(1, 2), q(-1, 2)}), line);
  EXPECT_NEAR(macro_entropy(*tent, closed), sigma_1d(0.5), 1e-15);

  auto steep = interpolate_on_mesh(LipschitzProfile::tent({q(1, 2), q(1, 2), q(1), q(-1)}), line);
  EXPECT_EQ(macro_entropy(*steep, closed), 0.0);
}

TEST(MacroEntropy, InvariantUnderConstantShift) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  auto line = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(1), q(1, 8)));
  auto h = interpolate_on_mesh(LipschitzProfile::tent({q(3, 8), q(1, 4), q(2, 3), q(-1, 3)}), line);
  std::vector<Rational> shifted = h->values();
  for (auto& v : shifted) v += q(5, 3);
  ExactPiecewiseAffine g(line, shifted);
  EXPECT_EQ(macro_entropy(*h, closed), macro_entropy(g, closed));
}
