#pragma once

// Escape rates from neighborhoods, the maximal expansion rate s, box-counting
// dimension, and the dimension bound dim M + E/s.

#include <optional>
#include <string>
#include <vector>

#include "orbitherm/rng.hpp"
#include "orbitherm/system.hpp"

namespace orbitherm {

struct RegionSpec {
  bool full_torus = false;
  Box box;

  static RegionSpec full(const SmoothSystem& sys) {
    RegionSpec r;
    r.full_torus = sys.full_torus;
    r.box = sys.domain;
    return r;
  }
  static RegionSpec of_box(Box b) {
    RegionSpec r;
    r.box = std::move(b);
    return r;
  }
  double volume() const { return full_torus ? 1.0 : box.volume(); }
  bool contains(const Vec& p, double tol = 1e-12) const {
    return full_torus || box.contains(p, tol);
  }
};

struct EscapeRateEstimate {
  long samples = 0;
  uint64_t seed = 0;
  int n_max = 0;
  std::vector<long> survivors;      // survivors[n-1] = #{f^0..f^{n-1} in V}
  std::vector<double> p;            // survival fractions, nonincreasing
  std::pair<int, int> window;       // regression window actually used
  double rate_regression = 0.0;     // upper-rate surrogate (tail slope of log p_n)
  double rate_min_step = 0.0;       // min one-step slope over the window
  double slope_stderr = 0.0;
  double ci_halfwidth = 0.0;        // binomial half-width of log p at the window end
  bool truncated = false;           // p_n hit zero before n_max
  int truncated_at = 0;
  double region_volume = 0.0;       // vol(V); vol of the n-survivor set = vol(V)*p_n
};

// Monte Carlo estimate of the exponential escape rate from V: p_n = fraction
// of V-uniform samples whose first n iterates stay in V. Deterministic for a
// fixed (seed, samples) regardless of threads.
EscapeRateEstimate escape_rate(const SmoothSystem& system, const RegionSpec& V,
                               int n_max, long samples, uint64_t seed,
                               std::pair<int, int> window, int threads = 1);

struct ExpansionEstimate {
  std::vector<int> ns;
  std::vector<double> a;        // a_n = (1/n) max over grid of log||Df^n||
  double s_fekete = 0.0;        // min over the window of a_n
  int resolution = 0;
};

ExpansionEstimate expansion_rate(const SmoothSystem& system, int resolution,
                                 std::pair<int, int> window);

struct BoxDimEstimate {
  std::vector<double> scales;
  std::vector<long> counts;
  double estimate = 0.0;        // slope of log N vs log(1/rho)
  double slope_stderr = 0.0;
  std::string provenance;
};

// Least-squares box-counting slope; scales must span >= 1.5 decades with at
// least 4 entries, the cloud must hold >= 1e4 points and not collapse into a
// single cell at the smallest scale.
BoxDimEstimate box_dimension(const std::vector<Vec>& cloud,
                             const std::vector<double>& scales,
                             const std::string& provenance = "cloud");

struct DimensionBound {
  double bound = 0.0;           // dim M + E(V)/s
  double escape_rate_used = 0.0;
  double expansion_used = 0.0;
  std::optional<double> measured_dimension;
  std::optional<bool> pass;     // measured <= bound (when measured supplied)
  std::string status = "ok";    // "hypothesis-violation" when s <= 0
};

DimensionBound dimension_bound(const SmoothSystem& system,
                               const EscapeRateEstimate& escape,
                               const ExpansionEstimate& expansion,
                               const std::optional<BoxDimEstimate>& measured);

// Approximate survivor set: points whose orbit stays in U for |k| <= depth
// (two_sided) or 0 <= k <= depth. Shift-conjugate systems sample random
// itineraries through the branch-inverse refinement when two-sided (rejection
// would accept ~2^-2K of draws); everything else rejection-samples uniform
// seeds.
std::vector<Vec> survivor_cloud(const SmoothSystem& system, int depth,
                                long count, uint64_t seed,
                                bool two_sided = true,
                                long rejection_budget = 20'000'000);

// Forward orbit sample {f^k(p0)}, k < count, for attractor-style clouds.
std::vector<Vec> orbit_cloud(const SmoothSystem& system, const Point& start,
                             long count, long burn_in = 100);

}  // namespace orbitherm
