#include "heightlab/verify.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace heightlab;

namespace {

Rational q(std::int64_t a, std::int64_t b = 1) { return Rational(a, b); }

const ContinuumDomain& unit_interval() {
  static const auto d = ContinuumDomain::box({q(0)}, {q(1)});
  return d;
}

LipschitzProfile::PwaPtr affine_on_unit(const RationalVector& s, int m) {
  auto mesh = std::make_shared<const SimplexDomain>(simplices_inside(ContinuumDomain::unit_cube(m), q(1)));
  return interpolate_on_mesh(LipschitzProfile::affine(s), mesh);
}

}  // namespace

TEST(Trend, Rule) {
  EXPECT_TRUE(detail::trend_passes({0.5, 0.3, 0.2, 0.1}, 0.15));
  EXPECT_FALSE(detail::trend_passes({0.5, 0.1, 0.2, 0.1}, 0.15));
  EXPECT_FALSE(detail::trend_passes({0.3, 0.2, 0.16}, 0.15));
  EXPECT_FALSE(detail::trend_passes({}, 0.15));
}

TEST(SimplicialProfile, OneDimensionalAffine) {
  auto r = check_simplicial_profile(affine_on_unit({q(1, 2)}, 1), SurfaceTensionModel::closed_form_1d(), q(1, 4), {8, 16, 32, 64}, 0.15);
  ASSERT_EQ(r.instances.size(), 4u);
  for (const auto& i : r.instances) EXPECT_DOUBLE_EQ(i.rhs, sigma_1d(0.5));
  // final gap is inside the tolerance
  EXPECT_LE(r.trend.back(), 0.15);
  // With the radius fixed, the ball entropy tends to the infimum of the
  // macroscopic entropy over the ball, which lies below sigma(1/2); past
  // n = 16 the gap therefore grows instead of shrinking.
  EXPECT_LT(r.trend[1], r.trend[2]);
  EXPECT_LT(r.trend[2], r.trend[3]);
  EXPECT_FALSE(r.pass);
  for (const auto& i : r.instances) EXPECT_LT(i.lhs, 0.0);
}

TEST(SimplicialProfile, SlopeOne) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  // The ball does not pin the ends, so at eps = 1/4 it holds many fields
  // although the macroscopic side is 0.
  auto wide = check_simplicial_profile(affine_on_unit({q(1)}, 1), closed, q(1, 4), {16, 32}, 0.15);
  for (const auto& i : wide.instances) {
    EXPECT_EQ(i.rhs, 0.0);
    EXPECT_LT(i.lhs, 0.0);
  }
  // once eps * n <= 1 the open window admits only n x itself: one field
  auto tight = check_simplicial_profile(affine_on_unit({q(1)}, 1), closed, q(1, 32), {8, 16, 32}, 0.15);
  for (const auto& i : tight.instances) {
    EXPECT_EQ(i.lhs, 0.0);
    EXPECT_EQ(i.rhs, 0.0);
    EXPECT_EQ(i.params["count"], "1");
  }
  EXPECT_TRUE(tight.pass);
}

TEST(GeneralProfile, AffineMatchesSimplicialNumbers) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  auto g = check_general_profile(LipschitzProfile::affine({q(1, 2)}), unit_interval(), closed, q(1, 4), 32, q(1, 4), 0.15);
  auto s = check_simplicial_profile(affine_on_unit({q(1, 2)}, 1), closed, q(1, 4), {32}, 0.15);
  EXPECT_DOUBLE_EQ(g.instances[0].lhs, s.instances[0].rhs);
  EXPECT_DOUBLE_EQ(g.instances[0].rhs, s.instances[0].lhs);
}

TEST(GeneralProfile, HalfSlopeTent) {
  auto g = check_general_profile(LipschitzProfile::tent({q(1, 2), q(1, 4), q(1, 2), q(-1, 2)}), unit_interval(),
                                 SurfaceTensionModel::closed_form_1d(), q(1, 4), 32, q(1, 4), 0.15);
  EXPECT_NEAR(g.instances[0].lhs, sigma_1d(0.5), 1e-12);
  EXPECT_LE(std::fabs(g.instances[0].gap), 0.15);
  EXPECT_TRUE(g.pass);
}

TEST(GeneralProfile, SlopeOneTentAtFixedRadius) {
  // The macroscopic side is 0, but a radius-1/4 ball around the steep tent
  // contains flatter profiles, so the counted side stays well below 0.
  auto g = check_general_profile(LipschitzProfile::tent({q(1, 2), q(1, 2), q(1), q(-1)}), unit_interval(), SurfaceTensionModel::closed_form_1d(),
                                 q(1, 4), 32, q(1, 4), 0.15);
  EXPECT_EQ(g.instances[0].lhs, 0.0);
  EXPECT_LT(g.instances[0].rhs, -0.3);
  // shrinking the radius with n drives both sides to 0
  auto tight = check_general_profile(LipschitzProfile::tent({q(1, 2), q(1, 2), q(1), q(-1)}), unit_interval(),
                                     SurfaceTensionModel::closed_form_1d(), q(1, 32), 32, q(1, 4), 0.15);
  EXPECT_EQ(tight.instances[0].rhs, 0.0);
}

TEST(Minimize, AffineBoundaryIsOptimal) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  auto res = minimize_macro_entropy(unit_interval(), LipschitzProfile::affine({q(1, 2)}), q(1, 16), closed);
  EXPECT_NEAR(res.entropy, sigma_1d(0.5), 1e-9);
  EXPECT_NEAR(res.entropy, -0.5623, 1e-4);
  const auto& mesh = res.h->mesh();
  for (std::size_t v = 0; v < mesh.vertices().size(); ++v) EXPECT_NEAR(res.h->values()[v], to_double(mesh.vertex_coordinates(v)[0]) / 2, 1e-4);
  for (std::size_t k = 1; k < res.history.size(); ++k) EXPECT_LE(res.history[k], res.history[k - 1]);
}

TEST(Minimize, TwoDimensionalAffineBoundary) {
  const auto table = build_surface_tension_table(2, 5, {6, 8, 10});
  const auto s = RationalVector{q(1, 2), q(0)};
  auto res = minimize_macro_entropy(ContinuumDomain::unit_cube(2), LipschitzProfile::affine(s), q(1, 4), table);
  const auto convex = table.lower_convex_envelope();
  EXPECT_NEAR(res.entropy, convex({0.5, 0.0}), 1e-6);
  EXPECT_LE(res.h->lipschitz(), 1.0 + 1e-12);
}

TEST(Minimize, RigidBoundaryAndInfeasibility) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  auto res = minimize_macro_entropy(unit_interval(), LipschitzProfile::affine({q(1)}), q(1, 8), closed);
  EXPECT_EQ(res.entropy, 0.0);
  const auto& mesh = res.h->mesh();
  for (std::size_t v = 0; v < mesh.vertices().size(); ++v) EXPECT_NEAR(res.h->values()[v], to_double(mesh.vertex_coordinates(v)[0]), 1e-12);

  // x^2 on [0,2]: boundary values 0 and 4 are farther apart than 1-Lipschitz allows
  auto steep = LipschitzProfile::quadratic({1, q(1), std::nullopt});
  try {
    minimize_macro_entropy(ContinuumDomain::box({q(0)}, {q(2)}), steep, q(1, 8), closed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleBoundary);
  }
}

TEST(Minimize, FeasibleAndPinnedWithBendingBoundary) {
  // boundary of a square from min(x, y); the minimizer must stay 1-Lipschitz per simplex
  const auto table = build_surface_tension_table(2, 5, {6, 8});
  auto res = minimize_macro_entropy(ContinuumDomain::unit_cube(2), LipschitzProfile::min_coords({2, 0}), q(1, 4), table);
  const auto& mesh = res.h->mesh();
  for (std::size_t s = 0; s < mesh.size(); ++s)
    for (double g : res.h->gradient(s)) EXPECT_LE(std::fabs(g), 1.0 + 1e-12);
  const auto pmin = LipschitzProfile::min_coords({2, 0});
  for (std::size_t v = 0; v < mesh.vertices().size(); ++v)
    if (!mesh.is_interior_vertex(v)) EXPECT_EQ(res.h->values()[v], to_double(pmin.value(mesh.vertex_coordinates(v))));
  for (std::size_t k = 1; k < res.history.size(); ++k) EXPECT_LE(res.history[k], res.history[k - 1]);
}

TEST(Variational, OneDimensionalDeskCheck) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  for (auto a : {q(0), q(1, 2)}) {
    auto r = check_variational(unit_interval(), LipschitzProfile::affine({a}), closed, q(1, 10), 64, q(1, 16), 0.1);
    EXPECT_NEAR(r.instances[0].lhs, sigma_1d(to_double(a)), 1e-9);
    EXPECT_LE(std::fabs(r.instances[0].gap), 0.1) << to_string(a);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Variational, SlopeOneBoundaryLeavesSlack) {
  // The delta window lets the free end move by up to 6 steps, so the counted
  // side is not rigid even though the minimized side is exactly 0.
  auto r = check_variational(unit_interval(), LipschitzProfile::affine({q(1)}), SurfaceTensionModel::closed_form_1d(), q(1, 10), 64, q(1, 16), 0.1);
  EXPECT_EQ(r.instances[0].lhs, 0.0);
  EXPECT_LT(r.instances[0].rhs, -0.2);
  EXPECT_FALSE(r.pass);
}

TEST(Variational, LargerDeltaMeansLowerEntropy) {
  auto rn = make_domain(discretize(unit_interval(), 32));
  auto hb = round_profile_on_boundary(LipschitzProfile::affine({q(1, 2)}), rn);
  double prev = 0;
  for (auto delta : {q(1, 32), q(1, 16), q(1, 8), q(1, 4)}) {
    const double e = *count_delta_boundary(hb, delta).entropy;
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(MeasureMu, ProbabilityAxioms) {
  auto rn = make_domain(discretize(unit_interval(), 48));
  const auto a = LipschitzProfile::affine({q(1, 2)});
  auto hb = round_profile_on_boundary(a, rn);
  const Rational delta(1, 10);

  auto all = measure_mu(hb, delta, {{a, q(2), true}});
  EXPECT_EQ(all.favourable, all.total);
  EXPECT_EQ(all.mu, 1.0);
  EXPECT_EQ(all.rate, 0.0);

  auto none = measure_mu(hb, delta, {{LipschitzProfile::affine({q(1, 2)}, q(10)), q(1, 20), false}});
  EXPECT_EQ(none.favourable, 0);
  EXPECT_EQ(none.mu, 0.0);

  // closed balls of radius 1/48 around a and a + 1/12 share no height function
  ProfileBall b1{a, q(1, 48), true}, b2{LipschitzProfile::affine({q(1, 2)}, q(1, 12)), q(1, 48), true};
  auto m1 = measure_mu(hb, delta, {b1}), m2 = measure_mu(hb, delta, {b2}), both = measure_mu(hb, delta, {b1, b2});
  EXPECT_GT(m1.favourable, 0);
  EXPECT_GT(m2.favourable, 0);
  EXPECT_EQ(both.favourable, m1.favourable + m2.favourable);

  // overlapping balls: inclusion-exclusion never double counts
  ProfileBall wide{a, q(1, 6), true};
  auto u = measure_mu(hb, delta, {b1, wide});
  EXPECT_EQ(u.favourable, measure_mu(hb, delta, {wide}).favourable);
}

TEST(Ldp, OrderingOfBalls) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  const auto aff = LipschitzProfile::affine({q(1, 2)});
  const auto tent = LipschitzProfile::tent({q(3, 4), q(3, 4), q(1), q(-1)});
  auto out = check_ldp(unit_interval(), aff, closed, q(1, 10), 64, q(1, 16), {{aff, q(1, 20), false}, {tent, q(1, 20), false}});
  ASSERT_EQ(out.entries.size(), 2u);
  EXPECT_GT(out.entries[0].mu.mu, out.entries[1].mu.mu);
  EXPECT_LT(out.entries[0].mu.rate, out.entries[1].mu.rate);
  EXPECT_LT(out.entries[0].rate_at_centre, out.entries[1].rate_at_centre);
  EXPECT_TRUE(out.report.pass);
  // I at the minimizer, against the Jensen lower bound sigma(mean slope)
  EXPECT_NEAR(out.infimum - sigma_1d(0.5), 0.0, 1e-3);
  for (const auto& e : out.entries) {
    EXPECT_GE(e.rate_at_centre, -1e-6);
    EXPECT_GE(e.rate_in_ball, -1e-6);
    EXPECT_LE(e.rate_in_ball, e.rate_at_centre + 1e-9);
  }
  EXPECT_FALSE(out.report.notes.empty());
}

TEST(Robustness, AllInstancesHold) {
  auto r = check_robustness_lemmas(1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.instances.size(), 57u);
  std::size_t profile_change = 0;
  for (const auto& i : r.instances) profile_change += i.params["lemma"] == "profile-change" ? 1 : 0;
  EXPECT_EQ(profile_change, 50u);
}

TEST(Report, DeterministicAcrossThreadCounts) {
  const auto closed = SurfaceTensionModel::closed_form_1d();
  std::string reference;
  for (unsigned t : {1u, 4u, 8u}) {
    CountOptions opts;
    opts.threads = t;
    auto r = check_simplicial_profile(affine_on_unit({q(1, 4)}, 1), closed, q(1, 4), {16, 32, 64}, 0.15, opts);
    auto v = check_variational(unit_interval(), LipschitzProfile::affine({q(1, 2)}), closed, q(1, 10), 48, q(1, 16), 0.1, opts);
    auto rl = check_robustness_lemmas(3, opts);
    const std::string text = r.to_json(false).dump() + v.to_json(false).dump() + rl.to_json(false).dump();
    if (reference.empty()) reference = text;
    EXPECT_EQ(text, reference) << "threads " << t;
  }
}

TEST(Report, JsonShape) {
  auto r = check_simplicial_profile(affine_on_unit({q(1, 2)}, 1), SurfaceTensionModel::closed_form_1d(), q(1, 4), {8, 16}, 0.5);
  auto j = r.to_json();
  EXPECT_EQ(j["claim"], "simplicial-profile");
  EXPECT_TRUE(j.contains("runtime_seconds"));
  EXPECT_FALSE(r.to_json(false).contains("runtime_seconds"));
  EXPECT_EQ(j["instances"].size(), 2u);
  EXPECT_TRUE(j["verdict"] == "pass" || j["verdict"] == "fail");
}
