#pragma once

// Basic geometric types shared by every module: points on a chart (flat
// torus or a planar box), axis-aligned boxes, and the chart-aware metric.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitherm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Chart { Torus, Planar };

inline double wrap01(double t) {
  double r = t - std::floor(t);
  // snap the seam so a value and its wrapped twin cannot both appear
  if (r >= 1.0 - 1e-9) r = 0.0;
  return r;
}

inline Vec torus_normalize(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = wrap01(v[i]);
  return v;
}

// Signed representative of a - b in [-1/2, 1/2) per axis.
inline double torus_diff1(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return d;
}

struct Point {
  Vec x;
  Chart chart = Chart::Planar;

  Point() = default;
  Point(Vec coords, Chart c) : x(std::move(coords)), chart(c) {
    if (chart == Chart::Torus) x = torus_normalize(x);
  }
  int dim() const { return static_cast<int>(x.size()); }
};

inline Vec displacement(const Point& a, const Point& b) {
  if (a.chart != b.chart || a.x.size() != b.x.size())
    throw std::invalid_argument("displacement: chart/dimension mismatch");
  Vec d = a.x - b.x;
  if (a.chart == Chart::Torus)
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = torus_diff1(a.x[i], b.x[i]);
  return d;
}

// Torus metric = min over integer translates of the Euclidean distance.
inline double distance(const Point& a, const Point& b) {
  return displacement(a, b).norm();
}

struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("Box: size mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("Box: lo must be < hi");
  }
  static Box unit(int d) {
    return Box(Vec::Zero(d), Vec::Ones(d));
  }
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const Vec& p, double tol = 0.0) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }
  Vec at(const Vec& unit_coords) const {
    Vec p = lo;
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      p[i] += (hi[i] - lo[i]) * unit_coords[i];
    return p;
  }
};

// Lexicographic comparison with an absolute tolerance; used for the canonical
// orbit representative so float noise cannot flip the ordering.
inline bool lex_less(const Vec& a, const Vec& b, double tol = 1e-9) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - tol) return true;
    if (a[i] > b[i] + tol) return false;
  }
  return false;
}

// Largest/smallest singular values; matrices here are d x d with d <= 3 or
// small restricted blocks, so JacobiSVD is exact enough and cheap.
inline double sigma_max(const Mat& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  return m.jacobiSvd().singularValues()(0);
}
inline double sigma_min(const Mat& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  auto sv = m.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

inline double operator_norm(const Mat& m) { return sigma_max(m); }

}  // namespace orbitherm
