#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fockconc/concentration.hpp"
#include "fockconc/properties.hpp"

using namespace fockconc;

namespace {
const GridSpec kGrid(4.0, 1024);

// one-cell layer along the circle of area s
double p_layer(double s) { return 2.0 * std::sqrt(pi * s) * kGrid.cell_side(); }

FockFunction one_plus_z2(double eps) { return make_fock({1.0, 0.0, eps * std::sqrt(2.0) / pi}).normalized(); }

// Roots of x e^{-x} = t on either side of x = 1, by bisection.
std::pair<double, double> xexp_roots(double t) {
  auto g = [t](double x) { return x * std::exp(-x) - t; };
  auto bisect = [&](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((g(lo) < 0) == (g(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return {bisect(0.0, 1.0), bisect(1.0, 60.0)};
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace

TEST(FkBound, Examples) {
  EXPECT_EQ(fk_bound(0.0), 0.0);
  EXPECT_NEAR(fk_bound(1.0), 0.6321206, 1e-7);
  double prev = 0.0;
  for (double s = 0.5; s < 50.0; s *= 1.7) {
    EXPECT_GT(fk_bound(s), prev);
    EXPECT_LT(fk_bound(s), 1.0);
    prev = fk_bound(s);
  }
  EXPECT_NEAR(fk_bound(1e-10), 1e-10, 1e-20);
}

TEST(Profile, GaussianCase) {
  const auto p = profile(sample_density(constant_one(), kGrid));
  EXPECT_NEAR(p.mu(std::exp(-1.0)), 1.0, p.boundary_layer(1.0));
  EXPECT_NEAR(p.u_star(1.0), std::exp(-1.0), 2.0 * p.boundary_layer(1.0) * std::exp(-1.0));
  EXPECT_NEAR(p.I(1.0), 0.6321206, p.cell_area());
  EXPECT_NEAR(p.T(), 1.0, 1e-12);
  EXPECT_TRUE(p.degenerate());
  EXPECT_TRUE(std::isnan(p.s_star()));
}

TEST(Profile, FirstBasisElementAnnulus) {
  const auto p = profile(sample_density(basis(1), kGrid));
  EXPECT_NEAR(p.T(), std::exp(-1.0), 1e-10);
  for (double t : {0.05, 0.15, 0.25, 0.33}) {
    const auto [x1, x2] = xexp_roots(t);
    // two circles of radii sqrt(x/pi): one-cell layers along both
    const double layer = 2.0 * (std::sqrt(pi * x1) + std::sqrt(pi * x2)) * kGrid.cell_side();
    EXPECT_NEAR(p.mu(t), x2 - x1, layer) << t;
  }
}

TEST(Profile, TabulationShapes) {
  const auto p = profile(sample_density(one_plus_z2(0.1), kGrid));
  std::vector<double> s;
  for (int j = 0; j <= 200; ++j) s.push_back(0.02 * j);
  const auto u = p.tabulate_u_star(s), I = p.tabulate_I(s);
  EXPECT_EQ(I[0], 0.0);
  for (std::size_t j = 1; j < s.size(); ++j) {
    EXPECT_LE(u[j], u[j - 1]);
    EXPECT_GE(I[j], I[j - 1]);
  }
  for (std::size_t j = 1; j + 1 < s.size(); ++j) EXPECT_LE(I[j + 1] - 2 * I[j] + I[j - 1], 1e-15);
  EXPECT_NEAR(p.I(0.9 * kGrid.window_area()), 1.0, 1e-6);
  std::vector<double> t{0.9, 0.5, 0.1, 0.01};
  const auto mu = p.tabulate_mu(t);
  for (std::size_t j = 1; j < t.size(); ++j) EXPECT_GE(mu[j], mu[j - 1]);
}

TEST(Profile, RatioNondecreasingAndSingleCrossing) {
  const auto p = profile(sample_density(one_plus_z2(0.1), kGrid));
  const auto m = rearrangement_margins(p);
  EXPECT_GE(m.ratio_worst, 0.0);
  EXPECT_FALSE(m.degenerate);
  // the crossing itself may sit inside the boundary-layer band; more than one change may not
  EXPECT_LE(m.sign_changes, 1);
  ASSERT_FALSE(std::isnan(p.s_star()));
  const double ss = p.s_star();
  EXPECT_NEAR(p.u_star(ss) / std::exp(-ss), 1.0, 2.0 * p.boundary_layer(ss));
}

TEST(Profile, MuLowerBound) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_polynomial(rng, 6);
    const auto p = profile(sample_density(f, GridSpec(default_radius(6, 4.0), 512)));
    const double T = p.T();
    for (double q : {0.9, 0.6, 0.3, 0.1, 0.03}) {
      const double t = q * T, s = std::log(T / t);
      EXPECT_GE(p.mu(t), s - p.boundary_layer(s)) << i << ' ' << q;
    }
  }
}

TEST(Deficit, GaussianOnCenteredDisc) {
  const auto r = deficit(constant_one(), disc_mask(kGrid, cplx(0.0), 1.0));
  EXPECT_NEAR(r.deficit, 0.0, 2e-3);
  EXPECT_FALSE(r.violation);
  EXPECT_NEAR(r.superlevel_deficit, 0.0, 2e-3);
}

TEST(Deficit, GaussianOnUnitSquare) {
  const auto m = rectangle_mask(kGrid, cplx(0.0), 1.0, 1.0);
  const double side = simpson([](double x) { return std::exp(-pi * x * x); }, -0.5, 0.5);
  const double ref = 1.0 - side * side / (1.0 - std::exp(-1.0));
  const auto r = deficit(constant_one(), m);
  EXPECT_NEAR(r.area, 1.0, 1e-12);
  EXPECT_NEAR(r.deficit, ref, r.quad_err);
  EXPECT_GT(r.deficit, 0.0);
}

TEST(Deficit, GaussianOnOffsetDisc) {
  const auto m = disc_mask(kGrid, cplx(1.0, 0.0), 1.0);
  const double rho = 1.0 / std::sqrt(pi);
  const double mass = simpson(
      [](double r) {
        return r * simpson([r](double th) { return std::exp(-pi * std::norm(1.0 + std::polar(r, th))); }, 0.0, 2.0 * pi, 400);
      },
      0.0, rho, 400);
  const double ref = 1.0 - mass / (1.0 - std::exp(-1.0));
  const auto r = deficit(constant_one(), m);
  EXPECT_NEAR(r.deficit, ref, 2e-3);
  EXPECT_GT(r.deficit, 0.1);
}

TEST(Deficit, Errors) {
  RegionMask empty{kGrid, std::vector<std::uint8_t>(kGrid.cell_count(), 0)};
  EXPECT_THROW(deficit(constant_one(), empty), invalid_input);
  const auto d = sample_density(constant_one(), kGrid);
  EXPECT_THROW(deficit(d, disc_mask(GridSpec(4.0, 512), cplx(0.0), 1.0)), invalid_input);
  EXPECT_THROW(deficit(make_fock({0.0}), disc_mask(kGrid, cplx(0.0), 1.0)), invalid_input);
}

TEST(FaberKrahn, RandomFunctionsAndMasks) {
  std::mt19937_64 rng(77);
  const GridSpec g(default_radius(8, 4.0), 256);
  for (int i = 0; i < 60; ++i) {
    const auto f = random_polynomial(rng, 8);
    const auto r = deficit(f, random_mask(rng, g));
    EXPECT_FALSE(r.violation) << i << " deficit " << r.deficit;
    EXPECT_GE(r.deficit, r.superlevel_deficit - r.quad_err) << i;
  }
}

TEST(SuperlevelMask, GaussianIsCenteredDisc) {
  const auto d = sample_density(constant_one(), kGrid);
  const auto [m, ds] = superlevel_mask(d, 1.0);
  EXPECT_NEAR(m.measure(), 1.0, kGrid.cell_area());
  EXPECT_NEAR(ds, 0.0, 2e-3);
  const auto disc = disc_mask(kGrid, cplx(0.0), 1.0);
  std::size_t diff = 0;
  for (std::size_t k = 0; k < m.cells.size(); ++k) diff += m.cells[k] != disc.cells[k];
  EXPECT_LE(diff * kGrid.cell_area(), 2.0 * p_layer(1.0));
  double worst_in = 1.0;
  for (std::size_t k = 0; k < m.cells.size(); ++k)
    if (m.cells[k]) worst_in = std::min(worst_in, d.values[k]);
  EXPECT_NEAR(worst_in, std::exp(-1.0), 0.01);
}

TEST(SuperlevelMask, KernelIsTranslatedDisc) {
  const auto d = sample_density(kernel_function(cplx(0.5), 40), kGrid);
  const auto m = superlevel_mask(d, 1.0).first;
  cplx c{};
  for (std::size_t k = 0; k < m.cells.size(); ++k)
    if (m.cells[k]) c += kGrid.cell_center(k);
  c /= static_cast<double>(m.count());
  EXPECT_NEAR(c.real(), 0.5, kGrid.cell_side());
  EXPECT_NEAR(c.imag(), 0.0, kGrid.cell_side());
}

TEST(SuperlevelMask, OptimalAmongRandomSets) {
  const auto f = one_plus_z2(0.1);
  const auto d = sample_density(f, kGrid);
  const double ds = superlevel_mask(d, 1.0).second;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), asp(0.4, 2.5), ang(0.0, pi);
  for (int i = 0; i < 20; ++i) {
    const double q = asp(rng);
    const double a = std::sqrt(q / pi), b = 1.0 / (pi * a);
    const auto m = i % 2 ? ellipse_mask(kGrid, cplx(pos(rng), pos(rng)), a, b, ang(rng))
                         : rectangle_mask(kGrid, cplx(pos(rng), pos(rng)), std::sqrt(q), 1.0 / std::sqrt(q));
    const auto r = deficit(d, m);
    // compare at the mask's own rasterized area
    EXPECT_LE(superlevel_deficit(d, r.area), r.deficit + r.quad_err) << i;
    EXPECT_NEAR(r.area, 1.0, 0.02);
    EXPECT_LT(ds, r.deficit + 0.05);
  }
  EXPECT_THROW(superlevel_mask(d, 60.0), invalid_input);
  EXPECT_THROW(superlevel_mask(d, 0.0), invalid_input);
}

TEST(ConvexityG, Examples) {
  const auto g1 = convexity_G(profile(sample_density(constant_one(), kGrid)));
  EXPECT_NEAR(g1.min_second_difference, 0.0, 1e-4);
  const auto p1 = profile(sample_density(basis(1), kGrid));
  EXPECT_GE(convexity_G(p1).min_second_difference, -1e-4);
  const auto p2 = profile(sample_density(one_plus_z2(0.2), kGrid));
  EXPECT_LE(convexity_G(p2).max_excess, p2.cell_area() * p2.T());
}

TEST(LemmaBounds, GaussianAndPerturbation) {
  const auto b0 = lemma_bounds(profile(sample_density(constant_one(), kGrid)), 1.0);
  EXPECT_TRUE(b0.degenerate);
  EXPECT_NEAR(b0.lhs, 0.0, 1e-20);
  EXPECT_EQ(b0.mid, 0.0);
  const auto p = profile(sample_density(one_plus_z2(0.1), kGrid));
  const auto m = sandwich_margins(p, 1.0);
  EXPECT_FALSE(m.bounds.degenerate);
  EXPECT_GE(m.lower_margin, 0.0);
  EXPECT_GE(m.upper_margin, 0.0);
  EXPECT_GT(m.bounds.lhs, 0.0);
  EXPECT_TRUE(std::isfinite(m.bounds.reinforced_ratio));
  EXPECT_THROW(lemma_bounds(p, 0.0), invalid_input);
}

TEST(LemmaBounds, EnsembleReinforcedRatioFinite) {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto f = random_perturbation(rng, 6, 0.3);
    const auto p = profile(sample_density(f, GridSpec(4.0, 256)));
    const auto m = sandwich_margins(p, 1.0);
    EXPECT_TRUE(m.passed) << i;
    if (!m.bounds.degenerate) worst = std::max(worst, m.bounds.reinforced_ratio);
  }
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_GT(worst, 0.0);
}

TEST(GlobalMax, RefinedOffGrid) {
  // T of the normalized kernel element is 1 wherever z0 sits relative to cells
  const auto p = global_max(kernel_function(cplx(0.3131, -0.2718), 40), kGrid);
  EXPECT_TRUE(p.refined);
  EXPECT_NEAR(p.value, 1.0, 1e-12);
  EXPECT_LE(p.grid_value, p.value);
}
