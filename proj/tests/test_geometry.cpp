#include <doctest.h>

#include "common.hpp"
#include "orbitherm/geometry.hpp"
#include "orbitherm/pressure.hpp"

using namespace orbitherm;
using namespace orbitherm::test;

TEST_CASE("escape rate: invariant full torus has rate zero") {
  auto cat = make_cat_map();
  auto est = escape_rate(cat, RegionSpec::full(cat), 10, 20000, 7, {2, 10});
  CHECK(est.rate_regression == doctest::Approx(0.0));
  for (double p : est.p) CHECK(p == 1.0);
}

TEST_CASE("escape rate: linear horseshoe loses half the strip measure per step") {
  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto est = escape_rate(hs, RegionSpec::full(hs), 14, 200000, 42, {6, 14}, 4);
  CHECK(std::abs(est.rate_regression - std::log(0.5)) <= 0.05);
  CHECK(est.rate_min_step <= est.rate_regression + 0.2);
  for (size_t i = 1; i < est.p.size(); ++i) CHECK(est.p[i] <= est.p[i - 1]);
}

TEST_CASE("escape rate: sink basin keeps positive measure") {
  auto comp = make_composite_horseshoe_sink();
  auto est = escape_rate(comp, RegionSpec::full(comp), 14, 200000, 11, {8, 14});
  CHECK(std::abs(est.rate_regression) <= 0.01);
}

TEST_CASE("escape rate: deterministic under seeds and threads") {
  auto hs = make_linear_horseshoe();
  auto a = escape_rate(hs, RegionSpec::full(hs), 10, 50000, 9, {4, 10}, 1);
  auto b = escape_rate(hs, RegionSpec::full(hs), 10, 50000, 9, {4, 10}, 4);
  CHECK(a.survivors == b.survivors);
  CHECK(a.rate_regression == b.rate_regression);
  auto c = escape_rate(hs, RegionSpec::full(hs), 10, 50000, 10, {4, 10}, 1);
  CHECK(a.survivors != c.survivors);  // different seed, different draw
}

TEST_CASE("escape rate: validation") {
  auto hs = make_linear_horseshoe();
  CHECK_THROWS_AS(escape_rate(hs, RegionSpec::full(hs), 10, 100, 1, {4, 10}),
                  std::invalid_argument);
  Box outside(vec2(-2, -2), vec2(3, 3));
  CHECK_THROWS_AS(escape_rate(hs, RegionSpec::of_box(outside), 10, 20000, 1, {4, 10}),
                  std::invalid_argument);
}

TEST_CASE("expansion rate: constant-derivative systems are exact") {
  auto cat = make_cat_map();
  auto est = expansion_rate(cat, 32, {2, 10});
  CHECK(std::abs(est.s_fekete - std::log((3 + std::sqrt(5.0)) / 2)) <= 1e-6);

  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto esth = expansion_rate(hs, 64, {1, 6});
  CHECK(std::abs(esth.s_fekete - std::log(4.0)) <= 1e-6);

  // the rotation coordinate contributes nothing on the product system
  auto prod = make_rotation_cat_product();
  auto estp = expansion_rate(prod, 32, {2, 8});
  CHECK(std::abs(estp.s_fekete - std::log((3 + std::sqrt(5.0)) / 2)) <= 1e-6);
}

TEST_CASE("expansion rate: subadditivity of n * a_n up to grid slack") {
  for (const char* name : {"cat_map", "linear_horseshoe", "henon"}) {
    auto sys = make_system(name);
    auto est = expansion_rate(sys, 48, {1, 10});
    double slack = std::string(name) == "henon" ? 0.05 : 1e-9;
    for (size_t i = 0; i < est.ns.size(); ++i)
      for (size_t j = 0; j <= i; ++j) {
        int m = est.ns[j], n = est.ns[i];
        auto it = std::find(est.ns.begin(), est.ns.end(), m + n);
        if (it == est.ns.end()) continue;
        double amn = est.a[it - est.ns.begin()];
        CHECK(amn <= (m * est.a[j] + n * est.a[i]) / (m + n) + slack);
      }
  }
}

TEST_CASE("box dimension: middle-third Cantor midpoints") {
  std::vector<Vec> cloud;
  const int depth = 14;
  for (long m = 0; m < (1L << depth); ++m) {
    double x = 0.0, p3 = 1.0 / 3.0;
    for (int b = 0; b < depth; ++b) {
      if (m & (1L << b)) x += 2.0 * p3;
      p3 /= 3.0;
    }
    x += 0.5 * std::pow(3.0, -depth);  // interval midpoint: no cell-edge ties
    cloud.push_back((Vec(1) << x).finished());
  }
  std::vector<double> scales;
  for (int k = 2; k <= 7; ++k) scales.push_back(std::pow(3.0, -k));
  auto est = box_dimension(cloud, scales, "analytic");
  CHECK(std::abs(est.estimate - std::log(2.0) / std::log(3.0)) <= 1e-6);
  for (size_t i = 0; i + 1 < est.counts.size(); ++i)
    CHECK(est.counts[i] <= est.counts[i + 1]);  // N nonincreasing in rho
}

TEST_CASE("box dimension: uniform planar sample") {
  std::vector<Vec> cloud;
  RngStream rng(5, 1);
  for (int i = 0; i < 30000; ++i)
    cloud.push_back(vec2(rng.next01(), rng.next01()));
  auto est = box_dimension(cloud, {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625},
                           "uniform");
  CHECK(std::abs(est.estimate - 2.0) <= 0.05);
}

TEST_CASE("box dimension: horseshoe survivor cloud is one-dimensional") {
  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto cloud = survivor_cloud(hs, 10, 20000, 123);
  REQUIRE(cloud.size() == 20000);
  std::vector<double> scales;
  for (int k = 1; k <= 5; ++k) scales.push_back(std::pow(4.0, -k));
  auto est = box_dimension(cloud, scales, "survivor");
  CHECK(std::abs(est.estimate - 1.0) <= 0.1);
}

TEST_CASE("box dimension: validation and degenerate clouds") {
  std::vector<Vec> tiny(20000, vec2(0.5, 0.5));
  CHECK_THROWS_AS(box_dimension(tiny, {0.5, 0.25, 0.1, 0.01}, "point"),
                  std::domain_error);
  std::vector<Vec> few(100, vec2(0.5, 0.5));
  CHECK_THROWS_AS(box_dimension(few, {0.5, 0.25, 0.1, 0.01}, "few"),
                  std::invalid_argument);
}

TEST_CASE("survivor clouds: itinerary points shadow the invariant set") {
  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto cloud = survivor_cloud(hs, 10, 500, 77);
  int long_lived = 0;
  for (const auto& x : cloud) {
    auto fwd = iterate(hs, hs.make_point(x), 8);
    auto bwd = iterate(hs, hs.make_point(x), -8);
    if (!fwd.escaped && !bwd.escaped) ++long_lived;
  }
  CHECK(long_lived == 500);
  // determinism
  auto again = survivor_cloud(hs, 10, 500, 77);
  for (size_t i = 0; i < cloud.size(); ++i)
    CHECK((cloud[i] - again[i]).norm() == 0.0);
}

TEST_CASE("dimension bound: horseshoe closed form and the zero-rate edge") {
  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto escape = escape_rate(hs, RegionSpec::full(hs), 14, 200000, 42, {6, 14}, 2);
  auto expansion = expansion_rate(hs, 64, {1, 6});
  auto cloud = survivor_cloud(hs, 10, 20000, 123);
  std::vector<double> scales;
  for (int k = 1; k <= 5; ++k) scales.push_back(std::pow(4.0, -k));
  auto measured = box_dimension(cloud, scales, "survivor");
  auto bound = dimension_bound(hs, escape, expansion, measured);
  CHECK(std::abs(bound.bound - 1.5) <= 0.05);  // 2 + (-log 2)/log 4
  REQUIRE(bound.pass);
  CHECK(*bound.pass);

  // escape rate 0 gives bound = dim M exactly
  auto cat = make_cat_map();
  auto esc0 = escape_rate(cat, RegionSpec::full(cat), 8, 20000, 1, {2, 8});
  auto exp0 = expansion_rate(cat, 32, {2, 8});
  auto b0 = dimension_bound(cat, esc0, exp0, std::nullopt);
  CHECK(b0.bound == doctest::Approx(2.0));

  // s <= 0 violates the hypothesis
  ExpansionEstimate flat;
  flat.ns = {1};
  flat.a = {0.0};
  flat.s_fekete = 0.0;
  auto bad = dimension_bound(cat, esc0, flat, std::nullopt);
  CHECK(bad.status != "ok");
}

TEST_CASE("example-3 style configuration: trivial bound, no contradiction") {
  // composite system: the sink basin pins the escape rate at 0, so the
  // dimension bound degenerates to dim M; the invariant set has a
  // positive-volume component whose measured dimension is the full 2
  auto comp = make_composite_horseshoe_sink();
  auto escape = escape_rate(comp, RegionSpec::full(comp), 14, 100000, 3, {8, 14});
  auto expansion = expansion_rate(comp, 48, {1, 8});

  // sample a positive-volume patch of the survivor set; the window is
  // aligned to the dyadic scale lattice so edge cells do not inflate counts
  auto sink_view = comp;
  sink_view.domain = Box(vec2(2.25, 0.25), vec2(2.75, 0.75));
  auto cloud = survivor_cloud(sink_view, 10, 60000, 9, /*two_sided=*/false);
  auto measured = box_dimension(
      cloud, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256},
      "survivor");
  auto bound = dimension_bound(comp, escape, expansion, measured);
  CHECK(std::abs(bound.bound - 2.0) <= 0.05);
  CHECK(std::abs(*bound.measured_dimension - 2.0) <= 0.1);
  CHECK(*bound.pass);
}

TEST_CASE("young sandwich and bowen equality on the linear horseshoe") {
  auto hs = make_linear_horseshoe(4.0, 0.25);
  auto escape = escape_rate(hs, RegionSpec::full(hs), 14, 500000, 42, {6, 14}, 4);
  double oracle_sup = *phiu_oracle_sup(hs);  // sup(h + int phi^u) = -log 2
  CHECK(oracle_sup == doctest::Approx(-std::log(2.0)).epsilon(1e-10));
  CHECK(oracle_sup <= escape.rate_regression + 0.05);
  CHECK(escape.rate_regression <= 0.05);
  CHECK(std::abs(oracle_sup - escape.rate_regression) <= 0.07);
}
