#include <doctest.h>

#include "common.hpp"

using namespace orbitherm;
using namespace orbitherm::test;

namespace {
const double kCatLambda = (3.0 + std::sqrt(5.0)) / 2.0;

double orbit_set_mismatch(const std::vector<PeriodicOrbit>& a,
                          const std::vector<PeriodicOrbit>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].period != b[i].period) return std::numeric_limits<double>::infinity();
    for (int k = 0; k < a[i].period; ++k)
      worst = std::max(worst, distance(a[i].points[k], b[i].points[k]));
  }
  return worst;
}
}  // namespace

TEST_CASE("cat map point counts match the exact formula") {
  auto cat = make_cat_map();
  OrbitDatabase db(cat, EnumMethod::Symbolic);
  for (int n = 1; n <= 12; ++n) {
    db.ensure(n);
    long expect = std::lround(std::pow(kCatLambda, n) + std::pow(kCatLambda, -n) - 2.0);
    CHECK_MESSAGE(db.point_count(n) == expect, "n=" << n);
  }
}

TEST_CASE("cat map n=2: one fixed point plus two period-2 orbits") {
  auto cat = make_cat_map();
  auto orbits = enumerate_periodic(cat, 2, EnumMethod::Symbolic);
  REQUIRE(orbits.size() == 3);
  CHECK(orbits[0].period == 1);
  CHECK(orbits[1].period == 2);
  CHECK(orbits[2].period == 2);
}

TEST_CASE("horseshoe symbolic counts are powers of the branch number") {
  auto hs = make_linear_horseshoe(4.0, 0.25, 2);
  OrbitDatabase db(hs, EnumMethod::Symbolic);
  db.ensure(3);
  CHECK(db.point_count(3) == 8);

  auto hs3 = make_linear_horseshoe(6.0, 1.0 / 6.0, 3);
  OrbitDatabase db3(hs3, EnumMethod::Symbolic);
  db3.ensure(3);
  CHECK(db3.point_count(3) == 27);

  auto nl = make_nonlinear_horseshoe();
  OrbitDatabase dbn(nl, EnumMethod::Symbolic);
  for (int n = 1; n <= 8; ++n) {
    dbn.ensure(n);
    CHECK(dbn.point_count(n) == (1L << n));
  }
}

TEST_CASE("orbit residuals stay within tolerance") {
  auto nl = make_nonlinear_horseshoe();
  OrbitDatabase db(nl, EnumMethod::Symbolic);
  db.ensure(8);
  for (const auto* o : db.fix(8)) CHECK(o->residual <= 1e-8);
}

TEST_CASE("henon fixed points by Newton against the quadratic formula") {
  const double a = 1.4, b = 0.3;
  auto henon = make_henon(a, b);
  auto orbits = enumerate_periodic(henon, 1, EnumMethod::Newton, SeedGrid{60});
  REQUIRE(orbits.size() == 2);

  double disc = std::sqrt((1 - b) * (1 - b) + 4 * a);
  double xs[2] = {(b - 1 - disc) / (2 * a), (b - 1 + disc) / (2 * a)};  // sorted
  for (int i = 0; i < 2; ++i) {
    auto o = classify_orbit(henon, orbits[i]);
    CHECK(std::abs(o.points[0].x[0] - xs[i]) <= 1e-10);
    CHECK(std::abs(o.points[0].x[1] - b * xs[i]) <= 1e-10);
    CHECK(o.saddle);
    // multipliers are the roots of t^2 + 2 a x t - b
    double t1 = -a * xs[i] + std::sqrt(a * a * xs[i] * xs[i] + b);
    double t2 = -a * xs[i] - std::sqrt(a * a * xs[i] * xs[i] + b);
    CHECK(std::abs(std::abs(o.multipliers[0]) - std::min(std::abs(t1), std::abs(t2))) <= 1e-8);
    CHECK(std::abs(std::abs(o.multipliers[1]) - std::max(std::abs(t1), std::abs(t2))) <= 1e-8);
  }
}

TEST_CASE("classification: cat saddle, composite sink") {
  auto cat = make_cat_map();
  auto o = classify_orbit(cat, enumerate_periodic(cat, 1, EnumMethod::Symbolic)[0]);
  CHECK(o.saddle);
  CHECK(o.exponents[0] == doctest::Approx(-std::log(kCatLambda)).epsilon(1e-10));
  CHECK(o.exponents[1] == doctest::Approx(std::log(kCatLambda)).epsilon(1e-10));
  CHECK(o.stable_dim() == 1);
  CHECK(o.unstable_dim() == 1);

  auto comp = make_composite_horseshoe_sink();
  auto orbits = enumerate_periodic(comp, 1, EnumMethod::Symbolic);
  bool saw_sink = false;
  for (const auto& fixed : orbits) {
    auto c = classify_orbit(comp, fixed);
    if (c.points[0].x[0] > 2.0) {
      saw_sink = true;
      CHECK(!c.saddle);
      CHECK(c.exponents[0] < 0);
      CHECK(c.exponents[1] < 0);
    }
  }
  CHECK(saw_sink);
}

TEST_CASE("spectra agree along the orbit") {
  auto nl = make_nonlinear_horseshoe();
  for (const auto& o : enumerate_periodic(nl, 6, EnumMethod::Symbolic)) {
    if (o.period < 2) continue;
    auto cl = classify_orbit(nl, o);
    for (int i = 1; i < cl.period; ++i) {
      Mat m = Mat::Identity(2, 2);
      for (int k = 0; k < cl.period; ++k)
        m = cl.jacobians[(i + k) % cl.period] * m;
      Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(m).eigenvalues();
      std::vector<double> mags{std::abs(ev[0]), std::abs(ev[1])};
      std::sort(mags.begin(), mags.end());
      for (int j = 0; j < 2; ++j)
        CHECK(std::abs(mags[j] - std::abs(cl.multipliers[j])) <=
              1e-7 * std::abs(cl.multipliers[j]));
    }
  }
}

TEST_CASE("empirical constants: exact uniform cases") {
  auto cat = make_cat_map();
  auto o = classify_orbit(cat, enumerate_periodic(cat, 1, EnumMethod::Symbolic)[0]);
  CHECK(empirical_constant(o, 0.9) == doctest::Approx(1.0));
  CHECK(empirical_constant(o, 2.0) == 0.0);  // alpha above every exponent

  auto hs = make_linear_horseshoe(4.0, 0.25);
  for (const auto& ho : enumerate_periodic(hs, 3, EnumMethod::Symbolic)) {
    auto c = classify_orbit(hs, ho);
    CHECK(empirical_constant(c, 1.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("empirical constant needs classification and reports diagnostics") {
  auto cat = make_cat_map();
  auto raw = enumerate_periodic(cat, 1, EnumMethod::Symbolic)[0];
  CHECK_THROWS_AS(empirical_constant(raw, 0.9), std::invalid_argument);
  auto o = classify_orbit(cat, raw);
  ConstantDiagnostics diag;
  empirical_constant(o, 0.9, {}, &diag);
  CHECK(diag.argmin_k >= 1);
}

TEST_CASE("K_cap policy formula and override") {
  KCapPolicy policy;
  CHECK(policy.cap(4, 0.9) == 3 * 4 + 45);
  policy.override_cap = 7;
  CHECK(policy.cap(4, 0.9) == 7);
}

TEST_CASE("filter membership on the cat map") {
  auto cat = make_cat_map();
  OrbitDatabase db(cat, EnumMethod::Symbolic);
  db.ensure(4);
  SaddleFilter accept{0.9, std::nullopt, 1.0, {}};
  SaddleFilter reject{2.0, std::nullopt, 0.5, {}};
  for (const auto* o : db.fix(4)) {
    CHECK(db.membership(*o, accept));
    CHECK(!db.membership(*o, reject));
  }
}

TEST_CASE("filtration monotonicity over random filter pairs") {
  RngStream rng(23, 1);
  for (const char* name : {"cat_map", "nonlinear_horseshoe"}) {
    auto sys = make_system(name);
    OrbitDatabase db(sys, EnumMethod::Symbolic);
    db.ensure(6);
    for (int trial = 0; trial < 40; ++trial) {
      double a2 = 0.2 + 1.6 * rng.next01();
      double a1 = a2 + 0.8 * rng.next01();
      double c2 = 0.05 + 0.9 * rng.next01();
      double c1 = c2 + (1.0 - c2) * rng.next01();
      SaddleFilter strong{a1, std::nullopt, c1, {}};
      SaddleFilter weak{a2, std::nullopt, c2, {}};
      for (const auto* o : db.fix(6))
        if (db.membership(*o, strong)) CHECK(db.membership(*o, weak));
    }
  }
}

TEST_CASE("symbolic and newton enumeration agree on the nonlinear horseshoe") {
  auto nl = make_nonlinear_horseshoe();
  for (int n = 1; n <= 8; ++n) {
    auto sym = enumerate_periodic(nl, n, EnumMethod::Symbolic);
    auto newt = enumerate_periodic(nl, n, EnumMethod::Newton, SeedGrid{200}, nullptr, 4);
    CHECK_MESSAGE(orbit_set_mismatch(sym, newt) <= 1e-8, "n=" << n);
  }
}

TEST_CASE("newton enumeration agrees with the lattice on the cat map") {
  auto cat = make_cat_map();
  for (int n : {1, 2, 3, 4, 5}) {
    auto sym = enumerate_periodic(cat, n, EnumMethod::Symbolic);
    auto newt = enumerate_periodic(cat, n, EnumMethod::Newton, SeedGrid{150}, nullptr, 4);
    CHECK_MESSAGE(orbit_set_mismatch(sym, newt) <= 1e-8, "n=" << n);
  }
}

TEST_CASE("product system has no periodic orbits") {
  auto prod = make_rotation_cat_product();
  EnumDiagnostics diag;
  auto orbits = enumerate_periodic(prod, 4, EnumMethod::Newton, SeedGrid{8}, &diag);
  CHECK(orbits.empty());
  CHECK(diag.dropped == diag.seeds_total);
}

TEST_CASE("splitting angle floor does not collapse with the period") {
  for (const char* name : {"cat_map", "linear_horseshoe", "nonlinear_horseshoe"}) {
    auto sys = make_system(name);
    SaddleFilter f{0.9, std::nullopt, 0.25, {}};
    auto min_angle = [&](int n) {
      double worst = M_PI;
      for (const auto& o : enumerate_periodic(sys, n, EnumMethod::Symbolic)) {
        auto c = classify_orbit(sys, o);
        if (!filter_membership(c, f, empirical_constant(c, f.alpha))) continue;
        for (int i = 0; i < c.period; ++i)
          worst = std::min(worst, subspace_angle(c.basis_s[i], c.basis_u[i]));
      }
      return worst;
    };
    double at4 = min_angle(4), at10 = min_angle(10);
    CHECK_MESSAGE(at10 >= 0.9 * at4, name << " angle4=" << at4 << " angle10=" << at10);
    CHECK(at4 > 0.0);
  }
}

TEST_CASE("orbit database requires enumeration before queries") {
  auto cat = make_cat_map();
  OrbitDatabase db(cat, EnumMethod::Symbolic);
  CHECK_THROWS_AS(db.fix(3), std::logic_error);
  db.ensure(6);
  CHECK(db.has(3));  // divisors come along
  CHECK_NOTHROW(db.fix(3));
}
