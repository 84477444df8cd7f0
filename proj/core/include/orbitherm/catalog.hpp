#pragma once

// The fixed catalog of example systems. Each factory pins the map, its
// inverse, the exact Jacobian, the reference neighborhood U, and (where the
// system is shift-conjugate) the symbolic model handle.

#include <map>
#include <string>
#include <vector>

#include "orbitherm/system.hpp"

namespace orbitherm {

// Arnold cat map (x,y) -> (2x+y, x+y) on T^2.
SmoothSystem make_cat_map();

// Piecewise-affine Smale horseshoe on the unit square: `branches` vertical
// strips of height 1/lambda mapped over the full height, x contracted by mu,
// orientation alternating between branches. Requires lambda > branches and
// branches*mu < 1.
SmoothSystem make_linear_horseshoe(double lambda = 4.0, double mu = 0.25,
                                   int branches = 2);

// Smooth perturbation of the 2-branch horseshoe: quadratic branch maps plus
// a shear coupling, still conjugate to the full 2-shift.
SmoothSystem make_nonlinear_horseshoe(double lambda = 4.0, double mu = 0.25,
                                      double gamma = 0.5, double eta = 0.05,
                                      double shear = 0.03);

// Henon map (x,y) -> (1 + y - a x^2, b x) on a reference box.
SmoothSystem make_henon(double a = 1.4, double b = 0.3);

// Linear horseshoe on [0,1]^2 plus a disjoint attracting fixed point at
// `sink` with contraction factor rho; U is the bounding box of both parts.
SmoothSystem make_composite_horseshoe_sink(double lambda = 4.0, double mu = 0.25,
                                           double rho = 0.5,
                                           double sink_x = 2.5, double sink_y = 0.5,
                                           double sink_radius = 0.35);

// Rigid irrational rotation times the cat map on S^1 x T^2. No periodic
// points, no hyperbolic invariant measure.
SmoothSystem make_rotation_cat_product(double omega = 0.6180339887498949);

// Potential that is `value` at the composite system's sink and 0 on the
// horseshoe component (linear ramp inside the sink ball).
Potential sink_bump_potential(const SmoothSystem& composite, double value);

// Locally constant potential taking values[j] on branch strip j of a
// shift-conjugate system.
Potential cylinder_potential(const SmoothSystem& system, std::vector<double> values);

// name -> factory with a parameter record; unknown names list the catalog.
SmoothSystem make_system(const std::string& name,
                         const std::map<std::string, double>& params = {});
std::vector<std::string> catalog_names();

}  // namespace orbitherm
