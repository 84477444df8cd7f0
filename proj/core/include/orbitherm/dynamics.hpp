#pragma once

// Orbit iteration, derivative cocycles, Birkhoff sums and the global
// derivative bound beta0 = max over U of max(log||Df||, log||Df^-1||).

#include <optional>
#include <vector>

#include "orbitherm/system.hpp"

namespace orbitherm {

inline constexpr int kMaxIterate = 1 << 20;

struct IterateResult {
  Point point;        // f^k(p), or the last defined iterate on escape
  bool escaped = false;
  int escape_step = 0;  // number of map applications that succeeded
};

// f^k(p); k < 0 applies the inverse rule. Torus charts renormalize per step.
IterateResult iterate(const SmoothSystem& system, const Point& p, int k);

struct CocycleResult {
  Mat matrix;           // Df^n(p) (or Df^-n with backward=true)
  bool escaped = false;
  int escape_step = 0;
};

// Df^n(p) = Df(f^{n-1}p) ... Df(p) by the chain rule.
CocycleResult tangent_cocycle(const SmoothSystem& system, const Point& p, int n,
                              bool backward = false);

// S_n phi(p) = sum_{k=0}^{n-1} phi(f^k p). Continuous / locally constant
// potentials only; escape mid-orbit raises std::domain_error.
double birkhoff_sum(const SmoothSystem& system, const Potential& phi,
                    const Point& p, int n);

// Grid of points over U: `resolution` points per axis (torus charts use a
// periodic lattice so refinement r -> 2r nests; boxes include endpoints and
// nest under r -> 2r-1).
std::vector<Point> domain_grid(const SmoothSystem& system, int resolution);

SystemBounds derivative_log_bound(const SmoothSystem& system, int resolution);

// min over the same grid of phi (the Q_n empty-set fallback uses this as the
// computable stand-in for min over the invariant set).
double grid_min_potential(const SmoothSystem& system, const Potential& phi,
                          int resolution);

}  // namespace orbitherm
