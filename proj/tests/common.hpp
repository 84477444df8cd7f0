#pragma once

// Shared test utilities: reproducible samplers of recurrent points, a
// finite-difference Jacobian oracle, subspace angles.

#include <cmath>
#include <vector>

#include "orbitherm/catalog.hpp"
#include "orbitherm/dynamics.hpp"
#include "orbitherm/orbits.hpp"
#include "orbitherm/rng.hpp"

namespace orbitherm::test {

inline Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }
inline Vec vec3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

// Points whose forward and backward orbits stay in the chart: random torus
// points for torus systems, periodic-orbit points for horseshoes, sink-ball
// points for the composite, attractor points for Henon.
inline std::vector<Point> recurrent_points(const SmoothSystem& sys, int count,
                                           uint64_t seed = 7) {
  std::vector<Point> pts;
  RngStream rng(seed, 99);
  if (sys.chart == Chart::Torus) {
    for (int i = 0; i < count; ++i) {
      Vec v(sys.dim);
      for (int a = 0; a < sys.dim; ++a) v[a] = rng.next01();
      pts.push_back(sys.make_point(v));
    }
    return pts;
  }
  if (sys.symbolic && sys.symbolic->symbols >= 2) {
    for (int n = 1; n <= 7 && static_cast<int>(pts.size()) < count; ++n)
      for (const auto& o : enumerate_periodic(sys, n, EnumMethod::Symbolic))
        for (const auto& p : o.points) {
          pts.push_back(p);
          if (static_cast<int>(pts.size()) >= count) break;
        }
    auto sx = sys.params.find("sink_x");
    if (sx != sys.params.end()) {
      double r = sys.params.at("sink_radius");
      for (int i = 0; i < count / 4; ++i) {
        double ang = 2 * M_PI * rng.next01(), rad = 0.8 * r * rng.next01();
        pts.push_back(sys.make_point(vec2(sx->second + rad * std::cos(ang),
                                          sys.params.at("sink_y") + rad * std::sin(ang))));
      }
    }
    return pts;
  }
  // dissipative planar: walk onto the attractor
  Point cur = sys.make_point(vec2(0.0, 0.0));
  for (int k = 0; k < 200; ++k) {
    auto nxt = sys.step(cur, false);
    if (!nxt) break;
    cur = *nxt;
  }
  for (int i = 0; static_cast<int>(pts.size()) < count && i < 100 * count; ++i) {
    auto nxt = sys.step(cur, false);
    if (!nxt) break;
    cur = *nxt;
    pts.push_back(cur);
  }
  return pts;
}

// Central finite differences of the map, step h; the independent oracle for
// derivative_rule.
inline Mat fd_jacobian(const SmoothSystem& sys, const Point& p, double h = 1e-6) {
  const int d = sys.dim;
  Mat J(d, d);
  for (int a = 0; a < d; ++a) {
    Vec hi = p.x, lo = p.x;
    hi[a] += h;
    lo[a] -= h;
    auto fhi = sys.forward_rule(hi);
    auto flo = sys.forward_rule(lo);
    REQUIRE(fhi);
    REQUIRE(flo);
    Point phi_pt = sys.make_point(*fhi), plo_pt = sys.make_point(*flo);
    Vec diff = displacement(phi_pt, plo_pt);
    J.col(a) = diff / (2.0 * h);
  }
  return J;
}

// Smallest principal angle between the column spans of two orthonormal bases.
inline double subspace_angle(const Mat& A, const Mat& B) {
  Mat C = A.transpose() * B;
  double smax = C.jacobiSvd().singularValues()(0);
  return std::acos(std::min(1.0, smax));
}

// Largest honest round-trip horizon: e^{beta0 k} * 1e-14 <= 1e-10.
inline int roundtrip_kmax(double beta0) {
  if (beta0 < 0.15) return 50;
  return std::min(50, static_cast<int>(std::floor(9.2 / beta0)));
}

}  // namespace orbitherm::test
