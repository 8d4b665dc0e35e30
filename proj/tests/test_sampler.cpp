#include "heightlab/sampler.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace heightlab;

namespace {

DomainPtr line(std::int64_t a, std::int64_t b) {
  std::vector<LatticePoint> pts;
  for (auto z = a; z <= b; ++z) pts.push_back({z});
  return make_domain(DiscreteDomain::from_points(1, 1, pts));
}

DomainPtr grid(std::int64_t w, std::int64_t h) {
  std::vector<LatticePoint> pts;
  for (std::int64_t x = 0; x < w; ++x)
    for (std::int64_t y = 0; y < h; ++y) pts.push_back({x, y});
  return make_domain(DiscreteDomain::from_points(2, 1, pts));
}

SiteConstraint pins(const DiscreteDomain& d, const std::vector<std::pair<LatticePoint, std::int64_t>>& ps) {
  auto c = SiteConstraint::unconstrained(d.size());
  for (const auto& [z, v] : ps) c.windows[d.require_index(z)] = SiteWindow::pin(v);
  return c;
}

// boundary of a w x h grid pinned to the parity-0 pattern h^0
SiteConstraint ring_h0(const DiscreteDomain& d) {
  auto c = SiteConstraint::unconstrained(d.size());
  for (std::size_t i : d.boundary_indices()) c.windows[i] = SiteWindow::pin(parity(d.point(i)));
  return c;
}

bool meets(const SiteConstraint& c, const std::vector<std::int64_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& w = c.windows[i];
    if ((w.lo && v[i] < *w.lo) || (w.hi && v[i] > *w.hi)) return false;
  }
  return true;
}

std::vector<std::vector<std::int64_t>> brute_force_set(const DiscreteDomain& d, const SiteConstraint& c) {
  auto [lo, hi] = oracle::wide_ranges(d, 0, 2);
  std::vector<std::vector<std::int64_t>> out;
  oracle::for_each_height_function(
      d, lo, hi,
      [&](std::size_t i, std::int64_t x) {
        const auto& w = c.windows[i];
        return !((w.lo && x < *w.lo) || (w.hi && x > *w.hi));
      },
      [&](const std::vector<std::int64_t>& v) { out.push_back(v); });
  std::sort(out.begin(), out.end());
  return out;
}

// chi-square of n exact draws against the uniform law on the brute-force set
void expect_uniform_draws(DomainPtr d, const SiteConstraint& c, int draws) {
  const auto states = brute_force_set(*d, c);
  ASSERT_FALSE(states.empty());
  ExactSampler sampler(d, c);
  ASSERT_EQ(sampler.total(), BigInt(states.size()));
  std::map<std::vector<std::int64_t>, std::size_t> slot;
  for (std::size_t k = 0; k < states.size(); ++k) slot[states[k]] = k;
  std::vector<std::uint64_t> observed(states.size(), 0);
  for (int s = 0; s < draws; ++s) {
    auto h = sampler.sample(static_cast<std::uint64_t>(s));
    ASSERT_TRUE(slot.count(h.values));
    ++observed[slot[h.values]];
  }
  const double chi = oracle::chi_square(observed, std::vector<double>(states.size(), 1.0 / static_cast<double>(states.size())));
  EXPECT_TRUE(oracle::chi_square_passes(chi, states.size())) << "chi2 " << chi << " over " << states.size() << " cells";
}

}  // namespace

TEST(CounterRng, DeterministicAndUniform) {
  CounterRng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  EXPECT_EQ(CounterRng::word(7, 3, 5), CounterRng::word(7, 3, 5));

  CounterRng r(11);
  std::vector<std::uint64_t> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[r.below(std::uint64_t{6})];
  EXPECT_TRUE(oracle::chi_square_passes(oracle::chi_square(counts, std::vector<double>(6, 1.0 / 6)), 6));

  CounterRng big(5);
  const BigInt bound = BigInt(1) << 100;
  for (int i = 0; i < 50; ++i) EXPECT_LT(big.below(bound + 7), bound + 7);
  std::vector<std::uint64_t> small(3, 0);
  for (int i = 0; i < 30000; ++i) ++small[static_cast<std::size_t>(big.below(BigInt(3)))];
  EXPECT_TRUE(oracle::chi_square_passes(oracle::chi_square(small, std::vector<double>(3, 1.0 / 3)), 3));
}

TEST(ExactSampler, UnrankIsABijectionOntoTheSet) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const bool two_d = trial % 2 == 1;
    DomainPtr d = two_d ? grid(3, 2 + trial % 3) : line(0, 4 + trial % 5);
    auto c = SiteConstraint::unconstrained(d->size());
    std::uniform_int_distribution<int> pick(0, 3);
    for (std::size_t i = 0; i < d->size(); ++i) {
      if (pick(rng) == 0) c.windows[i] = SiteWindow::pin(parity(d->point(i)) + 2 * (pick(rng) % 2));
      else if (pick(rng) == 0) c.windows[i] = SiteWindow::range(-2, 3);
    }
    c.windows[0] = SiteWindow::pin(0);
    const auto expected = brute_force_set(*d, c);
    if (expected.empty()) {
      EXPECT_THROW(ExactSampler(d, c), Error);
      continue;
    }
    ExactSampler sampler(d, c);
    ASSERT_EQ(sampler.total(), BigInt(expected.size()));
    std::vector<std::vector<std::int64_t>> got;
    for (std::size_t r = 0; r < expected.size(); ++r) {
      auto h = sampler.unrank(BigInt(r));
      EXPECT_FALSE(validate_height_function(h));
      EXPECT_TRUE(meets(c, h.values));
      got.push_back(h.values);
    }
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, expected);
  }
}

TEST(ExactSampler, ReferenceInstancesAreUniform) {
  auto d1 = line(0, 2);
  expect_uniform_draws(d1, pins(*d1, {{{0}, 0}, {{2}, 0}}), 10000);
  auto d2 = grid(3, 3);
  expect_uniform_draws(d2, ring_h0(*d2), 10000);
  auto d3 = line(0, 4);
  expect_uniform_draws(d3, pins(*d3, {{{0}, 0}, {{4}, 0}}), 10000);
  auto d4 = grid(4, 3);
  auto c4 = SiteConstraint::unconstrained(d4->size());
  c4.windows[0] = SiteWindow::pin(0);
  for (auto& w : c4.windows)
    if (!w.pinned) w = SiteWindow::range(-2, 2);
  expect_uniform_draws(d4, c4, 10000);
}

TEST(ExactSampler, CentreOfRingIsBalanced) {
  auto d = grid(3, 3);
  ExactSampler sampler(d, ring_h0(*d));
  ASSERT_EQ(sampler.total(), BigInt(2));
  const auto centre = d->require_index({1, 1});
  int zeros = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) zeros += sampler.sample(s).values[centre] == 0 ? 1 : 0;
  EXPECT_NEAR(zeros, 5000, 4 * 50);
}

TEST(ExactSampler, RigidAndEmpty) {
  auto d = line(0, 5);
  auto rigid = pins(*d, {{{0}, 0}, {{5}, 5}});
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(sample_exact(d, rigid, s).values, (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5}));
  try {
    sample_exact(d, pins(*d, {{{0}, 0}, {{5}, 7}}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySet);
  }
  CountOptions tiny;
  tiny.state_budget = 2;
  EXPECT_THROW(ExactSampler(grid(5, 5), SiteConstraint::unconstrained(25), tiny), Error);
}

TEST(Glauber, SingleFreeSiteIsExactAfterOneSweep) {
  auto d = line(0, 2);
  auto c = pins(*d, {{{0}, 0}, {{2}, 0}});
  std::vector<std::uint64_t> counts(2, 0);
  for (std::uint64_t s = 0; s < 10000; ++s) ++counts[sample_glauber(d, c, s, 1).values[1] == 1 ? 1 : 0];
  EXPECT_TRUE(oracle::chi_square_passes(oracle::chi_square(counts, {0.5, 0.5}), 2));
}

TEST(Glauber, ThreeFreeSitesTotalVariation) {
  auto d = line(0, 4);
  auto c = pins(*d, {{{0}, 0}, {{4}, 0}});
  const auto states = brute_force_set(*d, c);
  std::map<std::vector<std::int64_t>, double> freq;
  const int runs = 100000;
  for (int s = 0; s < runs; ++s) freq[sample_glauber(d, c, static_cast<std::uint64_t>(s), 50).values] += 1.0 / runs;
  double tv = 0;
  for (const auto& st : states) tv += std::fabs(freq[st] - 1.0 / static_cast<double>(states.size()));
  EXPECT_EQ(freq.size(), states.size());
  EXPECT_LE(tv / 2, 0.05);
}

TEST(Glauber, DetailedBalanceOnToyInstances) {
  // the heat-bath kernel of one colour class is symmetric on the constrained
  // set, so the uniform law is reversible for it
  struct Toy {
    DomainPtr d;
    SiteConstraint c;
  };
  auto a = line(0, 2);
  auto b = line(0, 3);
  std::vector<Toy> toys{{a, pins(*a, {{{0}, 0}, {{2}, 0}})}, {b, pins(*b, {{{0}, 0}, {{3}, 1}})}};
  for (const auto& toy : toys) {
    const auto states = brute_force_set(*toy.d, toy.c);
    ASSERT_GE(states.size(), 2u);
    ASSERT_LE(states.size(), 3u);
    const auto w = tighten_windows(*toy.d, toy.c);
    for (int colour = 0; colour < 2; ++colour) {
      const std::size_t n = states.size();
      std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
      for (std::size_t k = 0; k < n; ++k) {
        // one pass over the colour class: sites update independently
        std::map<std::vector<std::int64_t>, double> dist{{states[k], 1.0}};
        for (std::size_t i = 0; i < toy.d->size(); ++i) {
          if (parity(toy.d->point(i)) != colour) continue;
          std::map<std::vector<std::int64_t>, double> next;
          for (const auto& [h, pr] : dist) {
            auto choices = heat_bath_choices(*toy.d, w, h, i);
            for (auto v : choices) {
              auto g = h;
              g[i] = v;
              next[g] += pr / static_cast<double>(choices.size());
            }
          }
          dist = std::move(next);
        }
        for (const auto& [h, pr] : dist) {
          auto it = std::lower_bound(states.begin(), states.end(), h);
          ASSERT_TRUE(it != states.end() && *it == h);
          p[k][static_cast<std::size_t>(it - states.begin())] += pr;
        }
      }
      for (std::size_t x = 0; x < n; ++x) {
        double row = 0;
        for (std::size_t y = 0; y < n; ++y) {
          row += p[x][y];
          EXPECT_DOUBLE_EQ(p[x][y], p[y][x]);
        }
        EXPECT_DOUBLE_EQ(row, 1.0);
      }
    }
  }
}

TEST(Glauber, FeasibleAndInsideTheCone) {
  // diamond |x| + |y| <= 1 at n = 24 with the flat boundary h^0
  std::vector<HalfSpace> hs;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) hs.push_back({{Rational(sx), Rational(sy)}, Rational(1)});
  auto d = make_domain(discretize(ContinuumDomain::polytope(2, hs), 24));
  auto c = SiteConstraint::unconstrained(d->size());
  for (std::size_t i : d->boundary_indices()) c.windows[i] = SiteWindow::pin(parity(d->point(i)));
  auto h = sample_glauber(d, c, 3, 30);
  EXPECT_FALSE(validate_height_function(h));
  EXPECT_TRUE(meets(c, h.values));
  for (auto v : h.values) EXPECT_LE(std::llabs(v), 24);
}

TEST(Glauber, SameSampleForAnyThreadCount) {
  auto d = grid(96, 96);
  auto c = SiteConstraint::unconstrained(d->size());
  for (std::size_t i : d->boundary_indices()) c.windows[i] = SiteWindow::pin(parity(d->point(i)));
  const auto ref = sample_glauber(d, c, 42, 4, 1);
  EXPECT_EQ(sample_glauber(d, c, 42, 4, 4).values, ref.values);
  EXPECT_EQ(sample_glauber(d, c, 42, 4, 8).values, ref.values);
  EXPECT_NE(sample_glauber(d, c, 43, 4, 1).values, ref.values);
}

TEST(EmitField, CsvAndPpm) {
  auto d = grid(3, 3);
  auto h = sample_exact(d, ring_h0(*d), 1);
  std::ostringstream csv1, csv2, ppm1, ppm2;
  write_field_csv(csv1, h, "seed=1");
  write_field_csv(csv2, h, "seed=1");
  write_field_ppm(ppm1, h);
  write_field_ppm(ppm2, h);
  EXPECT_EQ(csv1.str(), csv2.str());
  EXPECT_EQ(ppm1.str(), ppm2.str());

  std::istringstream lines(csv1.str());
  std::string line;
  int data = 0;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# heightlab/1 field", 0), 0u);
  std::getline(lines, line);
  EXPECT_EQ(line, "z1,z2,h");
  while (std::getline(lines, line)) ++data;
  EXPECT_EQ(data, 9);

  const std::string img = ppm1.str();
  const auto header_end = img.find("255\n");
  ASSERT_NE(header_end, std::string::npos);
  EXPECT_EQ(img.substr(0, 3), "P6\n");
  EXPECT_NE(img.find("\n3 3\n"), std::string::npos);
  EXPECT_EQ(img.size() - (header_end + 4), 27u);
}

TEST(EmitField, ConstantFieldAndDimensionGuard) {
  HeightFunction flat{make_domain(DiscreteDomain::from_points(2, 1, {{0, 0}})), {0}};
  std::ostringstream out;
  write_field_ppm(out, flat);
  const std::string img = out.str();
  const auto mid = coolwarm(0.5);
  EXPECT_EQ(static_cast<std::uint8_t>(img[img.size() - 3]), mid[0]);
  EXPECT_EQ(static_cast<std::uint8_t>(img[img.size() - 1]), mid[2]);

  auto cube_domain = make_domain(discrete_cube(3, 2));
  HeightFunction cube{cube_domain, std::vector<std::int64_t>(cube_domain->size(), 0)};
  for (std::size_t i = 0; i < cube_domain->size(); ++i) cube.values[i] = parity(cube_domain->point(i));
  std::ostringstream sink;
  try {
    write_field_ppm(sink, cube);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDimension);
  }
  write_field_csv(sink, cube);
}
