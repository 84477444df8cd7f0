#pragma once

// Periodic orbits of f^n: enumeration (symbolic itineraries or multi-start
// Newton), saddle classification with stable/unstable splittings, and the
// (alpha,c) / banded [alpha,beta] saddle filtrations.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "orbitherm/dynamics.hpp"
#include "orbitherm/system.hpp"

namespace orbitherm {

struct PeriodicOrbit {
  int period = 0;                  // minimal period
  std::vector<Point> points;       // forward orbit; points[0] = lex-smallest
  double residual = 0.0;           // ||f^period(x0) - x0||

  // Filled by classify_orbit:
  bool classified = false;
  Eigen::VectorXcd multipliers;    // eigenvalues of Df^period, |.| ascending
  std::vector<double> exponents;   // (1/period) log|delta_i|, ascending
  bool saddle = false;
  bool neutral = false;            // some multiplier within 1e-8 of the unit circle
  bool degenerate = false;         // Df^n - I numerically singular at the root
  std::vector<Mat> jacobians;      // Df at each orbit point
  std::vector<Mat> basis_s, basis_u;   // orthonormal splitting bases per point
  // Per-step cocycle restricted to the splitting:
  //   restr_u[i] = basis_u[i+1]^T Df(x_i) basis_u[i]   (and likewise restr_s)
  std::vector<Mat> restr_s, restr_u;
  std::vector<double> phiu;        // phi^u(x_i) = -log|det restr_u[i]|

  int stable_dim() const { return basis_s.empty() ? 0 : int(basis_s[0].cols()); }
  int unstable_dim() const { return basis_u.empty() ? 0 : int(basis_u[0].cols()); }
  double min_abs_exponent() const;
};

// How far in k the uniform-growth inequalities are checked. Past one period
// the cocycle is a power of Df^period, so growth is eigenvalue dominated;
// the additive term guards non-normal transients.
struct KCapPolicy {
  int period_multiple = 3;
  double additive = 40.0;
  std::optional<int> override_cap;
  int cap(int period, double alpha) const;
};

struct SaddleFilter {
  double alpha = 0.0;
  std::optional<double> beta;      // banded variant when present
  double c = 1.0;
  KCapPolicy kcap;
};

struct ConstantDiagnostics {
  int argmin_k = 0;
  int argmin_point = 0;
  bool unstable_side = true;
};

// Largest c in (0,1] such that the orbit satisfies the rate-alpha co-norm
// inequalities at every orbit point for k = 1..K_cap; 0 when alpha >= min
// |Lyapunov exponent| (no c can work asymptotically) or the orbit is not a
// saddle. Requires classification.
double empirical_constant(const PeriodicOrbit& orbit, double alpha,
                          const KCapPolicy& policy = {},
                          ConstantDiagnostics* diag = nullptr);

// Largest c in (0,1] satisfying the banded upper bounds
// ||Df^k|E^u|| <= c^-1 e^{k beta}, ||Df^-k|E^s|| <= c^-1 e^{k beta}.
double band_upper_constant(const PeriodicOrbit& orbit, double beta, int k_cap);

// Membership in SFix(f^n, alpha, c) (banded when filter.beta is set).
// `c_max` must be the empirical_constant for filter.alpha.
bool filter_membership(const PeriodicOrbit& orbit, const SaddleFilter& filter,
                       double c_max);

PeriodicOrbit classify_orbit(const SmoothSystem& system, PeriodicOrbit orbit);

enum class EnumMethod { Symbolic, Newton };

struct SeedGrid {
  int per_axis = 200;
};

struct NewtonSettings {
  int max_iter = 50;
  double tol = 1e-12;        // max single-step orbit defect
  double dedup_tol = 1e-8;   // min over cyclic shifts of max pointwise distance
};

struct EnumDiagnostics {
  long seeds_total = 0;
  long converged = 0;
  long dropped = 0;          // non-convergent seeds (silently dropped)
  long off_itinerary = 0;    // converged to the smooth extension, not the map
  long degenerate = 0;
  long duplicates = 0;
};

// All periodic orbits with minimal period dividing n, classified = false,
// sorted by (period, canonical representative).
std::vector<PeriodicOrbit> enumerate_periodic(const SmoothSystem& system, int n,
                                              EnumMethod method,
                                              const SeedGrid& seeds = {},
                                              EnumDiagnostics* diag = nullptr,
                                              int threads = 1,
                                              const NewtonSettings& settings = {});

// Enumerates, classifies and caches orbits per minimal period; the shared
// substrate for every pressure estimator.
class OrbitDatabase {
 public:
  OrbitDatabase(const SmoothSystem& system, EnumMethod method,
                SeedGrid seeds = {}, int threads = 1);

  void ensure(int n);
  bool has(int n) const { return computed_.count(n) > 0; }

  // Orbits whose minimal period divides n (i.e. the orbits of Fix(f^n)).
  std::vector<const PeriodicOrbit*> fix(int n) const;
  long point_count(int n) const;

  double cmax(const PeriodicOrbit& orbit, double alpha,
              const KCapPolicy& policy = {}) const;
  bool membership(const PeriodicOrbit& orbit, const SaddleFilter& filter) const;

  const SmoothSystem& system() const { return *system_; }
  const EnumDiagnostics& diagnostics() const { return diag_; }
  std::vector<const PeriodicOrbit*> all_orbits() const;

  // Smallest phi^u value seen on any classified saddle point; the fallback
  // floor for volume-potential partition sums.
  std::optional<double> min_saddle_phiu() const;
  bool any_saddle() const;

 private:
  const SmoothSystem* system_;
  EnumMethod method_;
  SeedGrid seeds_;
  int threads_;
  std::map<int, std::deque<PeriodicOrbit>> by_period_;
  std::set<int> computed_;
  EnumDiagnostics diag_;
  mutable std::map<std::tuple<const PeriodicOrbit*, long long, int>, double> cmax_cache_;
};

std::vector<int> divisors(int n);

}  // namespace orbitherm
