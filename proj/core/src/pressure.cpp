#include "orbitherm/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "orbitherm/geometry.hpp"

namespace orbitherm {

namespace {

bool lex_orbit_ptr_less(const PeriodicOrbit* a, const PeriodicOrbit* b) {
  if (a->period != b->period) return a->period < b->period;
  return lex_less(a->points[0].x, b->points[0].x);
}

// Canonically ordered orbit list for Fix(f^n), independent of enumeration
// call history, so identical sets sum in identical order.
std::vector<const PeriodicOrbit*> sorted_fix(const OrbitDatabase& db, int n) {
  auto orbits = db.fix(n);
  std::sort(orbits.begin(), orbits.end(), lex_orbit_ptr_less);
  return orbits;
}

double cycle_sum(const SmoothSystem& sys, const Potential& phi,
                 const PeriodicOrbit& orbit) {
  if (phi.kind == PotentialKind::VolumeUnstable) return volume_birkhoff(orbit);
  (void)sys;
  double s = 0.0;
  for (const Point& p : orbit.points) s += phi(p);
  return s;
}

void check_schedule(const std::vector<double>& schedule, const char* what) {
  if (schedule.empty())
    throw std::invalid_argument(std::string(what) + " schedule must be nonempty");
  for (size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0))
      throw std::invalid_argument(std::string(what) + " schedule must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1]))
      throw std::invalid_argument(std::string(what) + " schedule must be strictly decreasing");
  }
}

}  // namespace

SeriesRow q_sp_row(const OrbitDatabase& db, const Potential& phi,
                   const std::optional<SaddleFilter>& filter, int n,
                   double fallback_min_phi) {
  if (phi.kind == PotentialKind::VolumeUnstable && !filter)
    throw std::invalid_argument("q_sp: phi^u sums run over saddle filtrations only");

  SeriesRow row;
  row.n = n;
  double q = 0.0;
  long count = 0;
  for (const PeriodicOrbit* o : sorted_fix(db, n)) {
    if (filter && !db.membership(*o, *filter)) continue;
    // S_n is constant along the orbit: every one of its `period` points in
    // Fix(f^n) contributes the same exp((n/period) * S_period).
    double s_cycle = cycle_sum(db.system(), phi, *o);
    q += double(o->period) * std::exp(double(n) / o->period * s_cycle);
    count += o->period;
  }
  if (count == 0) {
    row.fallback = true;
    q = std::exp(double(n) * fallback_min_phi);
  }
  row.q = q;
  row.count = count;
  row.log_q_over_n = std::log(q) / n;
  return row;
}

PressureSeries q_sp_series(OrbitDatabase& db, const Potential& phi,
                           const std::optional<SaddleFilter>& filter,
                           Window window, double fallback_min_phi) {
  if (window.lo < 1 || window.hi < window.lo)
    throw std::invalid_argument("q_sp_series: bad n window");
  PressureSeries series;
  series.potential = phi.name;
  series.filter = filter;
  for (int n = window.lo; n <= window.hi; ++n) {
    db.ensure(n);
    series.rows.push_back(q_sp_row(db, phi, filter, n, fallback_min_phi));
  }
  return series;
}

GrowthEstimate growth_estimate(const PressureSeries& series, Window window) {
  std::vector<const SeriesRow*> rows;
  for (const auto& r : series.rows)
    if (r.n >= window.lo && r.n <= window.hi) rows.push_back(&r);
  if (rows.size() < 4)
    throw std::invalid_argument("growth_estimate: window must contain >= 4 values of n");

  GrowthEstimate est;
  est.window = window;
  double xbar = 0.0, ybar = 0.0;
  for (const auto* r : rows) { xbar += r->n; ybar += std::log(r->q); }
  xbar /= rows.size();
  ybar /= rows.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto* r : rows) {
    sxx += (r->n - xbar) * (r->n - xbar);
    sxy += (r->n - xbar) * (std::log(r->q) - ybar);
  }
  est.estimate = sxy / sxx;
  double intercept = ybar - est.estimate * xbar;
  double ss = 0.0;
  est.tail_max = -std::numeric_limits<double>::infinity();
  est.all_fallback = true;
  for (const auto* r : rows) {
    double resid = std::log(r->q) - (intercept + est.estimate * r->n);
    ss += resid * resid;
    est.max_deviation = std::max(est.max_deviation, std::abs(resid));
    est.tail_max = std::max(est.tail_max, r->log_q_over_n);
    est.any_fallback = est.any_fallback || r->fallback;
    est.all_fallback = est.all_fallback && r->fallback;
  }
  est.slope_stderr = std::sqrt(ss / double(rows.size() - 2) / sxx);
  return est;
}

PressureLimit p_sp_limit(OrbitDatabase& db, const Potential& phi, double alpha,
                         const std::vector<double>& c_schedule, Window window,
                         double fallback_min_phi, const KCapPolicy& kcap) {
  check_schedule(c_schedule, "c");
  if (c_schedule.front() > 1.0)
    throw std::invalid_argument("p_sp_limit: c values must lie in (0,1]");

  PressureLimit out;
  out.alpha = alpha;
  out.c_schedule = c_schedule;
  for (double c : c_schedule) {
    SaddleFilter f{alpha, std::nullopt, c, kcap};
    out.series_per_c.push_back(q_sp_series(db, phi, f, window, fallback_min_phi));
    out.per_c.push_back(growth_estimate(out.series_per_c.back(), window));
  }
  out.limit = out.per_c.back();
  out.no_saddles = true;
  for (const auto& e : out.per_c) out.no_saddles = out.no_saddles && e.all_fallback;

  // Prop.-3 style monotonicity: shrinking c enlarges the saddle set, so the
  // estimates should not decrease (up to regression noise).
  for (size_t i = 1; i < out.per_c.size(); ++i) {
    double slack = 2.0 * std::max(out.per_c[i].slope_stderr, out.per_c[i - 1].slope_stderr);
    if (out.per_c[i].estimate < out.per_c[i - 1].estimate - slack) {
      out.monotone_ok = false;
      out.violations.push_back(static_cast<int>(i));
    }
  }
  return out;
}

BandedResult p_sp_banded(OrbitDatabase& db, const Potential& phi, double alpha,
                         double beta, double c, Window window,
                         double fallback_min_phi, const KCapPolicy& kcap) {
  if (!(alpha < beta))
    throw std::invalid_argument("p_sp_banded: alpha < beta required");
  SaddleFilter f{alpha, beta, c, kcap};
  BandedResult out;
  out.series = q_sp_series(db, phi, f, window, fallback_min_phi);
  out.estimate = growth_estimate(out.series, window);
  return out;
}

BowenResult bowen_fixpoint_pressure(OrbitDatabase& db, const Potential& phi,
                                    Window window, double fallback_min_phi) {
  BowenResult out;
  out.series = q_sp_series(db, phi, std::nullopt, window, fallback_min_phi);
  out.estimate = growth_estimate(out.series, window);
  return out;
}

SeparatedResult separated_pressure(const SmoothSystem& system, const Potential& phi,
                                   int n, double epsilon, const SeparatedGrid& grid) {
  if (n < 1) throw std::invalid_argument("separated_pressure: n >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("separated_pressure: epsilon > 0");

  std::vector<Point> candidates;
  if (grid.use_cloud) {
    auto cloud = survivor_cloud(system, grid.cloud_depth, grid.cloud_samples, grid.seed);
    std::sort(cloud.begin(), cloud.end(),
              [](const Vec& a, const Vec& b) { return lex_less(a, b, 0.0); });
    for (auto& v : cloud) candidates.push_back(system.make_point(std::move(v)));
  } else {
    if (grid.spacing_factor < 4.0)
      throw std::invalid_argument("separated_pressure: grid spacing must be <= eps/4");
    double spacing = epsilon / grid.spacing_factor;
    double extent = 0.0;
    for (int a = 0; a < system.dim; ++a)
      extent = std::max(extent, system.domain.hi[a] - system.domain.lo[a]);
    int res = std::max(2, static_cast<int>(std::ceil(extent / spacing)));
    candidates = domain_grid(system, res);
  }

  SeparatedResult out;
  out.grid_points = static_cast<long>(candidates.size());

  // Survivors: the first n iterates exist and stay in U.
  std::vector<std::vector<Point>> orbits;
  for (const Point& p : candidates) {
    std::vector<Point> orbit{p};
    bool ok = system.full_torus || system.domain.contains(p.x, 1e-9);
    for (int k = 1; k < n && ok; ++k) {
      auto next = system.step(orbit.back(), false);
      ok = next && (system.full_torus || system.domain.contains(next->x, 1e-9));
      if (ok) orbit.push_back(*next);
    }
    if (ok) orbits.push_back(std::move(orbit));
  }
  out.survivors = static_cast<long>(orbits.size());
  if (orbits.empty()) throw std::domain_error("separated_pressure: empty survivor grid");

  // Greedy maximal d_n-separated subset in canonical order.
  std::vector<size_t> selected;
  for (size_t cand = 0; cand < orbits.size(); ++cand) {
    bool accept = true;
    for (size_t sel : selected) {
      bool separated = false;
      for (int k = 0; k < n; ++k)
        if (distance(orbits[cand][k], orbits[sel][k]) > epsilon) {
          separated = true;
          break;
        }
      if (!separated) { accept = false; break; }
    }
    if (accept) selected.push_back(cand);
  }
  out.selected = static_cast<long>(selected.size());

  double log_sum = -std::numeric_limits<double>::infinity();
  for (size_t sel : selected) {
    double s = 0.0;
    for (const Point& p : orbits[sel]) s += phi(p);
    log_sum = log_sum > s ? log_sum + std::log1p(std::exp(s - log_sum))
                          : s + std::log1p(std::exp(log_sum - s));
  }
  out.estimate = log_sum / n;
  return out;
}

double volume_birkhoff(const PeriodicOrbit& orbit) {
  if (!orbit.classified)
    throw std::invalid_argument("volume_birkhoff: classification required");
  if (!orbit.saddle)
    throw std::invalid_argument("volume_birkhoff: phi^u needs a saddle orbit");
  double s = 0.0;
  for (double v : orbit.phiu) s += v;
  return s;
}

std::optional<double> phiu_oracle_sup(const SmoothSystem& system) {
  if (!system.symbolic) return std::nullopt;
  const auto& model = *system.symbolic;
  if (model.lattice) {
    // Constant derivative: every invariant measure has the same unstable
    // volume growth, and h_top equals it, so sup(h + int phi^u) = 0.
    return 0.0;
  }
  if (model.phiu_symbol_values.empty()) return std::nullopt;
  std::vector<double> w;
  for (double v : model.phiu_symbol_values) w.push_back(std::exp(v));
  return transfer_pressure(WeightedShift::full_shift(w));
}

VolumePressureResult volume_pressure(OrbitDatabase& db,
                                     const std::vector<double>& alpha_schedule,
                                     const std::vector<double>& c_schedule,
                                     Window window, const KCapPolicy& kcap) {
  check_schedule(alpha_schedule, "alpha");
  check_schedule(c_schedule, "c");

  for (int n = window.lo; n <= window.hi; ++n) db.ensure(n);
  if (!db.any_saddle())
    throw StatusError("no saddles at this alpha: the system has no saddle orbit "
                      "in the computed range");
  double fallback_min = *db.min_saddle_phiu();

  Potential phiu = volume_potential();
  VolumePressureResult out;
  for (double alpha : alpha_schedule) {
    auto lim = p_sp_limit(db, phiu, alpha, c_schedule, window, fallback_min, kcap);
    if (lim.no_saddles)
      throw StatusError("no saddles at this alpha: SFix(f^n, alpha, c) empty for "
                        "alpha=" + std::to_string(alpha));
    for (size_t i = 0; i < c_schedule.size(); ++i)
      out.grid.push_back({alpha, c_schedule[i], lim.per_c[i]});
    out.per_alpha_limits.push_back(lim.limit);
  }
  out.estimate = out.per_alpha_limits.back().estimate;
  out.oracle_sup = phiu_oracle_sup(db.system());
  return out;
}

GapEstimate gap_estimate(OrbitDatabase& db, const Potential& phi, Window window,
                         double fallback_min_phi) {
  auto bowen = bowen_fixpoint_pressure(db, phi, window, fallback_min_phi);
  GapEstimate out;
  out.p_top = bowen.estimate.estimate;
  out.max_orbit_average = -std::numeric_limits<double>::infinity();
  for (int n = window.lo; n <= window.hi; ++n)
    for (const PeriodicOrbit* o : db.fix(n)) {
      double avg = cycle_sum(db.system(), phi, *o) / o->period;
      out.max_orbit_average = std::max(out.max_orbit_average, avg);
    }
  if (!std::isfinite(out.max_orbit_average)) out.max_orbit_average = 0.0;
  out.gap = out.p_top - out.max_orbit_average;
  return out;
}

}  // namespace orbitherm
