#pragma once

// Pressure estimators over periodic-orbit data: saddle-point pressure (plain
// and banded), Bowen's periodic-point pressure, separated-set topological
// pressure, the volume pressure of phi^u, and the alpha(phi) gap proxy.

#include <optional>
#include <string>
#include <vector>

#include "orbitherm/orbits.hpp"
#include "orbitherm/shift.hpp"

namespace orbitherm {

// Runtime status distinct from config/programmer errors ("no saddles at this
// alpha" and friends); the CLI maps it to exit code 3.
struct StatusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Window {
  int lo = 0;
  int hi = 0;
  int length() const { return hi - lo + 1; }
};

struct SeriesRow {
  int n = 0;
  double q = 0.0;            // Q_n = sum over the filtered set of exp S_n(phi)
  double log_q_over_n = 0.0;
  long count = 0;            // contributing periodic points
  bool fallback = false;     // empty set at this n; q = exp(n * min phi)
};

struct PressureSeries {
  std::string potential;
  std::optional<SaddleFilter> filter;
  std::vector<SeriesRow> rows;
};

struct GrowthEstimate {
  double estimate = 0.0;     // tail-slope regression of log Q_n against n
  double tail_max = 0.0;     // max of log Q_n / n over the window
  std::string method = "tail-slope-regression";
  Window window;
  double slope_stderr = 0.0;
  double max_deviation = 0.0;
  bool any_fallback = false;
  bool all_fallback = false;
};

// One partition-sum row. Every point of an orbit of minimal period d | n
// contributes exp S_n(phi) with S_n = (n/d) * S_d over the cycle. Orbits for
// n must already be enumerated in the database.
SeriesRow q_sp_row(const OrbitDatabase& db, const Potential& phi,
                   const std::optional<SaddleFilter>& filter, int n,
                   double fallback_min_phi);

PressureSeries q_sp_series(OrbitDatabase& db, const Potential& phi,
                           const std::optional<SaddleFilter>& filter,
                           Window window, double fallback_min_phi);

GrowthEstimate growth_estimate(const PressureSeries& series, Window window);

struct PressureLimit {
  double alpha = 0.0;
  std::vector<double> c_schedule;
  std::vector<PressureSeries> series_per_c;
  std::vector<GrowthEstimate> per_c;
  GrowthEstimate limit;              // value at the smallest c
  bool monotone_ok = true;           // estimates nondecreasing as c decreases
  std::vector<int> violations;       // schedule indices breaking monotonicity
  bool no_saddles = false;           // every row at every c fell back
};

// P_SP(phi, alpha, c -> 0): per-c growth estimates along a strictly
// decreasing schedule; the reported limit is the estimate at the smallest c.
PressureLimit p_sp_limit(OrbitDatabase& db, const Potential& phi, double alpha,
                         const std::vector<double>& c_schedule, Window window,
                         double fallback_min_phi, const KCapPolicy& kcap = {});

struct BandedResult {
  PressureSeries series;
  GrowthEstimate estimate;
};

// Banded filtration SFix(f^n, [alpha,beta], c); with beta = beta0 the series
// reproduces the unbanded one row for row.
BandedResult p_sp_banded(OrbitDatabase& db, const Potential& phi, double alpha,
                         double beta, double c, Window window,
                         double fallback_min_phi, const KCapPolicy& kcap = {});

struct BowenResult {
  PressureSeries series;
  GrowthEstimate estimate;
};

// Growth rate of sum over all of Fix(f^n) of exp S_n(phi) (no filter).
BowenResult bowen_fixpoint_pressure(OrbitDatabase& db, const Potential& phi,
                                    Window window, double fallback_min_phi);

struct SeparatedGrid {
  bool use_cloud = false;      // survivor-cloud points instead of a lattice
  double spacing_factor = 4.0; // lattice spacing = epsilon / factor
  long cloud_samples = 20000;
  int cloud_depth = 8;
  uint64_t seed = 1;
};

struct SeparatedResult {
  double estimate = 0.0;  // (1/n) log sum over F_n(eps) of exp S_n(phi)
  long grid_points = 0;
  long survivors = 0;
  long selected = 0;      // |F_n(eps)|
};

// Greedy maximal (n,eps)-separated subset of the survivor sample, in
// canonical grid order. A grid-relative estimate: finite resolution caps the
// separated count, so single-(n,eps) values carry O(log(grid)/n) bias; use
// across an n-window for slopes.
SeparatedResult separated_pressure(const SmoothSystem& system, const Potential& phi,
                                   int n, double epsilon, const SeparatedGrid& grid);

// S_n phi^u over one minimal period of a classified saddle orbit:
// -log |det Df^n(x)|E^u_x| = -(n) * sum of positive exponents.
double volume_birkhoff(const PeriodicOrbit& orbit);

struct VolumeCell {
  double alpha = 0.0;
  double c = 0.0;
  GrowthEstimate estimate;
};

struct VolumePressureResult {
  std::vector<VolumeCell> grid;                 // full (alpha, c) record
  std::vector<GrowthEstimate> per_alpha_limits; // inner c->0 limits
  double estimate = 0.0;                        // at the smallest alpha
  std::optional<double> oracle_sup;             // sup(h + int phi^u) when exact
};

// Nested extrapolation (inner c -> 0, outer alpha -> 0) of P_SP(phi^u).
// Throws StatusError when no saddle orbit exists at all.
VolumePressureResult volume_pressure(OrbitDatabase& db,
                                     const std::vector<double>& alpha_schedule,
                                     const std::vector<double>& c_schedule,
                                     Window window, const KCapPolicy& kcap = {});

// sup(h + int phi^u dnu) over invariant measures of the conjugate symbolic
// model, exact where phi^u is constant on cylinders.
std::optional<double> phiu_oracle_sup(const SmoothSystem& system);

struct GapEstimate {
  double p_top = 0.0;            // Bowen regression estimate
  double max_orbit_average = 0.0;  // ergodic-optimization proxy for sup int phi
  double gap = 0.0;              // alpha(phi) proxy; an over-estimate in general
};

GapEstimate gap_estimate(OrbitDatabase& db, const Potential& phi, Window window,
                         double fallback_min_phi);

}  // namespace orbitherm
