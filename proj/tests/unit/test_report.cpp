#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fockconc/report.hpp"

using namespace fockconc;

TEST(JsonWriter, NumbersRoundTripAndNonFiniteBecomesNull) {
  json j;
  j["x"] = 0.1;
  j["third"] = 1.0 / 3.0;
  j["nan"] = std::numeric_limits<double>::quiet_NaN();
  j["inf"] = std::numeric_limits<double>::infinity();
  j["n"] = 7;
  j["flag"] = true;
  j["list"] = json::array({1.5, -2.0});
  const std::string text = dump_json(j);
  const auto back = json::parse(text);
  EXPECT_EQ(back["x"].get<double>(), 0.1);
  EXPECT_EQ(back["third"].get<double>(), 1.0 / 3.0);
  EXPECT_TRUE(back["nan"].is_null());
  EXPECT_TRUE(back["inf"].is_null());
  EXPECT_EQ(back["n"].get<int>(), 7);
  EXPECT_TRUE(back["flag"].get<bool>());
  EXPECT_EQ(back["list"][1].get<double>(), -2.0);
  // key order is insertion order
  EXPECT_LT(text.find("\"x\""), text.find("\"third\""));
  EXPECT_EQ(dump_json(json::object(), 2), "{}");
  EXPECT_EQ(dump_json(json{{"a", 1}}, 0), "{\"a\":1}");
}

TEST(JsonWriter, DeficitReportKeys) {
  DeficitReport r;
  r.concentration = 0.5;
  r.violation = false;
  const auto j = to_json(r);
  for (const char* k : {"concentration", "fk_bound", "deficit", "superlevel_deficit", "area", "norm_sq", "quad_err"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(JsonWriter, OtherReportKeys) {
  AsymmetryReport a;
  a.center = cplx(0.25, -1.0);
  const auto ja = to_json(a);
  for (const char* k : {"A", "cx", "cy", "r", "slack"}) EXPECT_TRUE(ja.contains(k)) << k;
  EXPECT_EQ(ja["cy"].get<double>(), -1.0);

  StabilityReport s;
  const auto js = json::parse(dump_json(to_json(s)));
  EXPECT_TRUE(js["ratio"].is_null());
  EXPECT_TRUE(js["asymmetry_ratio"].is_null());

  MCDeficit m;
  m.seed = 42;
  m.streams = 16;
  const auto jm = to_json(m);
  EXPECT_EQ(jm["seed"].get<std::uint64_t>(), 42u);
  EXPECT_EQ(jm["streams"].get<unsigned>(), 16u);
}

TEST(RegionJson, RoundTripBallAndProduct) {
  const auto b = region_from_json(json::parse(R"({"kind": "ball", "center": [0, 1, 2, 3], "radius": 0.5})"));
  EXPECT_EQ(b.kind, Region::Kind::ball);
  ASSERT_EQ(b.dim(), 2u);
  EXPECT_EQ(b.center[1], cplx(2.0, 3.0));
  const auto again = region_from_json(to_json(b));
  EXPECT_EQ(again.radius, 0.5);
  const auto p = region_from_json(json::parse(R"({"kind": "product", "center": [0, 0, 0, 0], "radii": [0.3, 0.4]})"));
  EXPECT_EQ(p.kind, Region::Kind::product);
  EXPECT_EQ(p.radii[1], 0.4);
}

TEST(RegionJson, Errors) {
  EXPECT_THROW(region_from_json(json::parse(R"({"kind": "cube", "center": [0, 0], "radius": 1})")), invalid_input);
  EXPECT_THROW(region_from_json(json::parse(R"({"kind": "ball", "center": [0, 0, 1], "radius": 1})")), parse_error);
  EXPECT_THROW(region_from_json(json::parse(R"({"kind": "ball", "center": [0, 0]})")), parse_error);
  EXPECT_THROW(region_from_json(json::parse(R"({"kind": "ball", "center": [0, 0], "radius": -1})")), invalid_input);
}
