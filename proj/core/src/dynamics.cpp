#include "orbitherm/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace orbitherm {

IterateResult iterate(const SmoothSystem& system, const Point& p, int k) {
  if (std::abs(k) > kMaxIterate)
    throw std::invalid_argument("iterate: |k| exceeds the configured maximum");
  IterateResult res{p, false, 0};
  const bool backward = k < 0;
  for (int i = 0; i < std::abs(k); ++i) {
    auto next = system.step(res.point, backward);
    if (!next) {
      res.escaped = true;
      return res;
    }
    res.point = *next;
    ++res.escape_step;
  }
  return res;
}

CocycleResult tangent_cocycle(const SmoothSystem& system, const Point& p, int n,
                              bool backward) {
  if (n <= 0) throw std::invalid_argument("tangent_cocycle: n must be positive");
  CocycleResult res{Mat::Identity(system.dim, system.dim), false, 0};
  Point cur = p;
  for (int i = 0; i < n; ++i) {
    if (backward) {
      // Df^{-1}(x) = (Df(f^{-1}x))^{-1}
      auto prev = system.step(cur, true);
      if (!prev) { res.escaped = true; return res; }
      auto J = system.jacobian(*prev);
      if (!J) { res.escaped = true; return res; }
      res.matrix = Mat(J->inverse()) * res.matrix;
      cur = *prev;
    } else {
      auto J = system.jacobian(cur);
      if (!J) { res.escaped = true; return res; }
      res.matrix = *J * res.matrix;
      auto next = system.step(cur, false);
      if (!next) { res.escaped = true; return res; }
      cur = *next;
    }
    ++res.escape_step;
  }
  return res;
}

double birkhoff_sum(const SmoothSystem& system, const Potential& phi,
                    const Point& p, int n) {
  if (n <= 0) throw std::invalid_argument("birkhoff_sum: n must be positive");
  if (phi.kind == PotentialKind::VolumeUnstable)
    throw std::invalid_argument(
        "birkhoff_sum: volume-unstable potential; use volume_birkhoff on a "
        "classified saddle orbit");
  double sum = 0.0;
  Point cur = p;
  for (int k = 0; k < n; ++k) {
    sum += phi(cur);
    if (k + 1 < n) {
      auto next = system.step(cur, false);
      if (!next)
        throw std::domain_error("birkhoff_sum: orbit escaped the chart at step " +
                                std::to_string(k + 1));
      cur = *next;
    }
  }
  return sum;
}

std::vector<Point> domain_grid(const SmoothSystem& system, int resolution) {
  if (resolution < 2) throw std::invalid_argument("domain_grid: resolution >= 2");
  const int d = system.dim;
  std::vector<Point> pts;
  std::vector<int> idx(d, 0);
  const Box& U = system.domain;
  while (true) {
    Vec u(d);
    for (int i = 0; i < d; ++i) {
      if (system.chart == Chart::Torus)
        u[i] = double(idx[i]) / double(resolution);           // periodic lattice
      else
        u[i] = double(idx[i]) / double(resolution - 1);       // endpoints included
    }
    pts.push_back(system.make_point(U.at(u)));
    int axis = 0;
    while (axis < d) {
      if (++idx[axis] < resolution) break;
      idx[axis] = 0;
      ++axis;
    }
    if (axis == d) break;
  }
  return pts;
}

SystemBounds derivative_log_bound(const SmoothSystem& system, int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("derivative_log_bound: resolution >= 2 per axis");
  double best = 0.0;
  for (const Point& p : domain_grid(system, resolution)) {
    auto J = system.jacobian(p);
    if (!J) continue;  // off the map's branch domains
    best = std::max(best, std::log(operator_norm(*J)));
    best = std::max(best, std::log(operator_norm(Mat(J->inverse()))));
  }
  return SystemBounds{best, resolution};
}

double grid_min_potential(const SmoothSystem& system, const Potential& phi,
                          int resolution) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : domain_grid(system, resolution))
    best = std::min(best, phi(p));
  return best;
}

}  // namespace orbitherm
