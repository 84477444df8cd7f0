#pragma once

// SmoothSystem: an invertible map with derivative, domain chart and reference
// neighborhood U. Maps are partial: applying f outside its domain of
// definition (a horseshoe point off the branch strips, a planar point leaving
// the chart) reports escape through an empty optional rather than throwing.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbitherm/types.hpp"

namespace orbitherm {

// Symbolic structure attached to shift-conjugate catalog systems.
// Two flavors:
//  * skew full shift: s branches of a skew product (expanding y-coordinate,
//    contracting x-coordinate). y_inverse_branch(j, Y) = V_j^{-1}(Y) maps
//    [0,1] into strip j; x_forward(j, x, y) is the contracting coordinate
//    map of branch j. Periodic points follow from branch-inverse refinement.
//  * toral lattice: an integer-matrix torus automorphism; Fix(f^n) solves
//    (A^n - I)x = k over integer vectors k, exactly.
struct SymbolicModel {
  int symbols = 0;
  std::function<double(int, double)> y_inverse_branch;
  std::function<double(int, double, double)> x_forward;
  // y-strip [lo, hi] per branch, for itinerary checks.
  std::vector<std::pair<double, double>> strips;
  // Isolated extra fixed points outside the shift part (composite systems).
  std::vector<Vec> extra_fixed_points;

  bool lattice = false;
  Eigen::Matrix2d lattice_matrix;

  // Per-symbol value of phi^u = -log|det Df|E^u| when it is constant on
  // cylinders (affine models); empty otherwise.
  std::vector<double> phiu_symbol_values;
};

struct SmoothSystem {
  std::string name;
  std::map<std::string, double> params;
  int dim = 2;
  Chart chart = Chart::Planar;
  Box domain;             // the reference neighborhood U
  bool full_torus = false;

  std::function<std::optional<Vec>(const Vec&)> forward_rule;
  std::function<std::optional<Vec>(const Vec&)> inverse_rule;
  std::function<std::optional<Mat>(const Vec&)> derivative_rule;

  // Globally defined smooth extension used by Newton solves; chooses the
  // nearest branch where the true map is partial. Returns {image, Jacobian}.
  std::function<std::optional<std::pair<Vec, Mat>>(const Vec&)> newton_map;

  std::shared_ptr<const SymbolicModel> symbolic;

  Point make_point(Vec coords) const { return Point(std::move(coords), chart); }

  std::optional<Point> step(const Point& p, bool backward = false) const {
    const auto& rule = backward ? inverse_rule : forward_rule;
    auto img = rule(p.x);
    if (!img) return std::nullopt;
    return make_point(std::move(*img));
  }

  std::optional<Mat> jacobian(const Point& p) const { return derivative_rule(p.x); }
};

enum class PotentialKind { Continuous, LocallyConstant, VolumeUnstable };

// phi: U -> R. The volume-unstable potential phi^u is evaluable only on
// saddle-orbit data (it needs the unstable splitting), so its pointwise
// eval throws; pressure code routes it through volume_birkhoff instead.
struct Potential {
  std::string name;
  PotentialKind kind = PotentialKind::Continuous;
  std::function<double(const Point&)> eval;

  double operator()(const Point& p) const {
    if (kind == PotentialKind::VolumeUnstable)
      throw std::invalid_argument(
          "potential '" + name + "' is volume-unstable: evaluate along saddle orbits "
          "via volume_birkhoff, not at bare points");
    return eval(p);
  }
};

inline Potential zero_potential() {
  return {"zero", PotentialKind::Continuous, [](const Point&) { return 0.0; }};
}
inline Potential constant_potential(double v) {
  return {"constant", PotentialKind::Continuous, [v](const Point&) { return v; }};
}
inline Potential coordinate_potential(int axis) {
  return {"coordinate", PotentialKind::Continuous,
          [axis](const Point& p) { return p.x[axis]; }};
}
inline Potential volume_potential() {
  return {"phi_u", PotentialKind::VolumeUnstable, nullptr};
}

// Global log-scale derivative bound beta0 over a grid of U.
struct SystemBounds {
  double beta0 = 0.0;
  int resolution = 0;
};

}  // namespace orbitherm
