#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fockconc/grid.hpp"

using namespace fockconc;

TEST(GridSpec, Validation) {
  EXPECT_THROW(GridSpec(0.0, 128), invalid_input);
  EXPECT_THROW(GridSpec(4.0, 32), invalid_input);
  const GridSpec g(4.0, 1024);
  EXPECT_DOUBLE_EQ(g.cell_area(), (8.0 / 1024) * (8.0 / 1024));
  EXPECT_EQ(g.cell_center(0, 0), cplx(-4.0 + 4.0 / 1024, -4.0 + 4.0 / 1024));
}

TEST(DefaultRadius, Formula) {
  EXPECT_DOUBLE_EQ(default_radius(0, 1.0), std::ceil(std::sqrt(31.0 / pi)));
  EXPECT_DOUBLE_EQ(default_radius(2, 4.0), 4.0);
}

TEST(SampleDensity, TotalMassExamples) {
  const GridSpec g(4.0, 1024);
  EXPECT_NEAR(sample_density(constant_one(), g).total_mass(), 1.0, 1e-4);
  EXPECT_NEAR(sample_density(basis(1), g).total_mass(), 1.0, 1e-4);
  const auto f = make_fock({1.0, 0.0, 0.1 * std::sqrt(2.0) / pi}).normalized();
  EXPECT_NEAR(sample_density(f, g).total_mass(), 1.0, 1e-4);
}

TEST(SampleDensity, TailMassAndRejection) {
  // mass of e^{-pi|z|^2} outside radius r is e^{-pi r^2}
  EXPECT_NEAR(outside_disc_mass(constant_one(), 1.2), std::exp(-pi * 1.44), 1e-15);
  // pi r^2 e^{-pi r^2} + e^{-pi r^2} for e_1
  const double x = pi * 0.8 * 0.8;
  EXPECT_NEAR(outside_disc_mass(basis(1), 0.8), (1.0 + x) * std::exp(-x), 1e-15);
  try {
    sample_density(basis(30), GridSpec(2.0, 128));
    FAIL();
  } catch (const invalid_input& e) {
    EXPECT_NE(std::string(e.what()).find("use R >="), std::string::npos);
  }
  EXPECT_THROW(sample_density(constant_one(2), GridSpec(4.0, 128)), invalid_input);
}

TEST(SampleDensity, ValuesNonnegativeAndAtCellCenters) {
  const GridSpec g(3.0, 64, cplx(0.2, -0.1));
  const auto f = make_fock({0.5, cplx(0, 1), 0.3});
  const auto d = sample_density(f, g);
  for (unsigned i = 0; i < g.n; i += 7)
    for (unsigned j = 0; j < g.n; j += 5) {
      EXPECT_GE(d.at(i, j), 0.0);
      EXPECT_DOUBLE_EQ(d.at(i, j), density(f, g.cell_center(i, j)));
    }
}

TEST(Masks, DiscAreaAndRectangleCount) {
  const GridSpec g(4.0, 1024);
  const auto disc = disc_mask(g, cplx(0.3, 0.1), 1.0);
  const double layer = 2.0 * std::sqrt(pi) / g.cell_side() * g.cell_area();
  EXPECT_NEAR(disc.measure(), 1.0, layer);
  // cell edges sit on multiples of 1/128, so the unit square is exactly 128 x 128 cells
  EXPECT_EQ(rectangle_mask(g, cplx(0.0), 1.0, 1.0).count(), 128u * 128u);
  const auto e = ellipse_mask(g, cplx(0.0), 1.0, 0.5, 0.3);
  EXPECT_NEAR(e.measure(), pi * 0.5, 0.02);
}

TEST(GridFile, BinaryRoundTrip) {
  const auto d = sample_density(basis(2), GridSpec(4.0, 64));
  std::stringstream ss;
  write_grid(ss, d);
  const auto r = read_grid(ss);
  EXPECT_TRUE(r.spec == d.spec);
  EXPECT_EQ(r.values, d.values);
  EXPECT_FALSE(r.source.has_value());
}

TEST(GridFile, Errors) {
  std::stringstream bad("grid v2 64 4 0 0\n");
  EXPECT_THROW(read_grid(bad), parse_error);
  std::stringstream truncated("grid v1 64 4 0 0\nabc");
  EXPECT_THROW(read_grid(truncated), parse_error);
  std::stringstream small("grid v1 8 4 0 0\n");
  EXPECT_THROW(read_grid(small), parse_error);
}

TEST(MaskFile, RoundTripAndErrors) {
  const GridSpec g(2.0, 64);
  const auto m = disc_mask(g, cplx(0.1, 0.0), 0.8);
  std::stringstream ss;
  write_mask(ss, m);
  const auto r = read_mask(ss);
  EXPECT_EQ(r.cells, m.cells);
  EXPECT_TRUE(r.spec == m.spec);
  std::string body;
  for (int i = 0; i < 64; ++i) body += std::string(64, '0') + "\n";
  std::stringstream ok("mask v1 64 2 0 0\n" + body);
  EXPECT_EQ(read_mask(ok).count(), 0u);
  std::stringstream short_row("mask v1 64 2 0 0\n0101\n");
  EXPECT_THROW(read_mask(short_row), parse_error);
  std::string bad_body = body;
  bad_body[5] = '2';
  std::stringstream bad_char("mask v1 64 2 0 0\n" + bad_body);
  EXPECT_THROW(read_mask(bad_char), parse_error);
  std::stringstream bad_magic("mosk v1 64 2 0 0\n" + body);
  EXPECT_THROW(read_mask(bad_magic), parse_error);
}
