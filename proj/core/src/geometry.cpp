#include "orbitherm/geometry.hpp"

#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "orbitherm/detail/parallel.hpp"
#include "orbitherm/dynamics.hpp"

namespace orbitherm {

namespace {

struct Fit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double max_dev = 0.0;
};

Fit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t m = xs.size();
  double xbar = 0.0, ybar = 0.0;
  for (size_t i = 0; i < m; ++i) { xbar += xs[i]; ybar += ys[i]; }
  xbar /= double(m);
  ybar /= double(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  Fit f;
  f.slope = sxy / sxx;
  double intercept = ybar - f.slope * xbar;
  double ss = 0.0;
  for (size_t i = 0; i < m; ++i) {
    double r = ys[i] - (intercept + f.slope * xs[i]);
    ss += r * r;
    f.max_dev = std::max(f.max_dev, std::abs(r));
  }
  if (m > 2) f.stderr_ = std::sqrt(ss / double(m - 2) / sxx);
  return f;
}

}  // namespace

EscapeRateEstimate escape_rate(const SmoothSystem& system, const RegionSpec& V,
                               int n_max, long samples, uint64_t seed,
                               std::pair<int, int> window, int threads) {
  if (samples < 10000)
    throw std::invalid_argument("escape_rate: at least 1e4 samples required");
  if (n_max < 2) throw std::invalid_argument("escape_rate: n_max >= 2");
  if (!V.full_torus) {
    if (!system.domain.contains(V.box.lo, 1e-9) || !system.domain.contains(V.box.hi, 1e-9))
      throw std::invalid_argument("escape_rate: V must lie inside the chart region U");
  }

  const int d = system.dim;
  const Box& sample_box = V.full_torus ? system.domain : V.box;
  CounterRng rng(seed, 0xE5CA9Eull);

  const long batch = 65536;
  const long nbatches = (samples + batch - 1) / batch;
  std::vector<std::vector<long>> partial(nbatches, std::vector<long>(n_max, 0));

  detail::parallel_for(nbatches, threads, [&](long b0, long b1) {
    for (long b = b0; b < b1; ++b) {
      auto& surv = partial[b];
      long lo = b * batch, hi = std::min(samples, (b + 1) * batch);
      for (long sidx = lo; sidx < hi; ++sidx) {
        Vec u(d);
        for (int a = 0; a < d; ++a)
          u[a] = rng.uniform01(static_cast<uint64_t>(sidx) * d + a);
        Point cur = system.make_point(sample_box.at(u));
        int alive = 1;  // f^0 = id stays in V by construction
        for (int k = 1; k < n_max; ++k) {
          auto next = system.step(cur, false);
          if (!next || !V.contains(next->x)) break;
          cur = *next;
          ++alive;
        }
        for (int n = 1; n <= alive; ++n) ++surv[n - 1];
      }
    }
  });

  EscapeRateEstimate est;
  est.samples = samples;
  est.seed = seed;
  est.n_max = n_max;
  est.region_volume = V.volume();
  est.survivors.assign(n_max, 0);
  for (const auto& part : partial)
    for (int n = 0; n < n_max; ++n) est.survivors[n] += part[n];
  est.p.resize(n_max);
  for (int n = 0; n < n_max; ++n) est.p[n] = double(est.survivors[n]) / double(samples);

  int usable = n_max;
  for (int n = 0; n < n_max; ++n)
    if (est.survivors[n] == 0) {
      est.truncated = true;
      est.truncated_at = n + 1;
      usable = n;
      break;
    }

  int lo = std::max(1, window.first);
  int hi = std::min({window.second, n_max, usable});
  if (hi - lo < 1)
    throw std::domain_error("escape_rate: empty regression window (all samples escaped)");
  est.window = {lo, hi};

  std::vector<double> xs, ys;
  for (int n = lo; n <= hi; ++n) {
    xs.push_back(double(n));
    ys.push_back(std::log(est.p[n - 1]));
  }
  Fit f = least_squares(xs, ys);
  est.rate_regression = f.slope;
  est.slope_stderr = f.stderr_;
  est.rate_min_step = 0.0;
  for (size_t i = 1; i < ys.size(); ++i)
    est.rate_min_step = std::min(est.rate_min_step, ys[i] - ys[i - 1]);

  double p_end = est.p[hi - 1];
  est.ci_halfwidth =
      1.96 * std::sqrt(std::max(0.0, (1.0 - p_end) / (p_end * double(samples))));
  return est;
}

ExpansionEstimate expansion_rate(const SmoothSystem& system, int resolution,
                                 std::pair<int, int> window) {
  if (resolution < 32)
    throw std::invalid_argument("expansion_rate: resolution >= 32 per axis");
  if (window.first < 1 || window.second < window.first)
    throw std::invalid_argument("expansion_rate: bad window");

  const int n_hi = window.second;
  std::vector<double> best(n_hi + 1, -std::numeric_limits<double>::infinity());

  // max over finite-time U-survivors: orbits that leave the reference
  // neighborhood stop contributing (the supremum lives on the invariant set)
  for (const Point& p0 : domain_grid(system, resolution)) {
    Point cur = p0;
    Mat P = Mat::Identity(system.dim, system.dim);
    for (int n = 1; n <= n_hi; ++n) {
      auto J = system.jacobian(cur);
      if (!J) break;
      P = *J * P;
      best[n] = std::max(best[n], std::log(operator_norm(P)));
      auto next = system.step(cur, false);
      if (!next || !(system.full_torus || system.domain.contains(next->x, 1e-9)))
        break;
      cur = *next;
    }
  }

  ExpansionEstimate est;
  est.resolution = resolution;
  double fekete = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_hi; ++n) {
    if (!std::isfinite(best[n])) continue;
    est.ns.push_back(n);
    est.a.push_back(best[n] / n);
    if (n >= window.first) fekete = std::min(fekete, best[n] / n);
  }
  if (est.ns.empty())
    throw std::domain_error("expansion_rate: no grid point survives one step");
  est.s_fekete = std::isfinite(fekete) ? fekete : est.a.back();
  return est;
}

BoxDimEstimate box_dimension(const std::vector<Vec>& cloud,
                             const std::vector<double>& scales,
                             const std::string& provenance) {
  if (cloud.size() < 10000)
    throw std::invalid_argument("box_dimension: >= 1e4 points required");
  if (scales.size() < 4)
    throw std::invalid_argument("box_dimension: >= 4 scales required");
  std::vector<double> rho(scales);
  std::sort(rho.begin(), rho.end(), std::greater<double>());
  if (!(rho.front() > 0.0 && rho.back() > 0.0))
    throw std::invalid_argument("box_dimension: scales must be positive");
  if (std::log10(rho.front() / rho.back()) < 1.5)
    throw std::invalid_argument("box_dimension: scales must span >= 1.5 decades");

  BoxDimEstimate est;
  est.provenance = provenance;
  est.scales = rho;
  for (double r : rho) {
    std::set<std::array<long, 3>> cells;
    for (const Vec& p : cloud) {
      std::array<long, 3> key{0, 0, 0};
      for (int a = 0; a < p.size() && a < 3; ++a)
        key[a] = static_cast<long>(std::floor(p[a] / r));
      cells.insert(key);
    }
    est.counts.push_back(static_cast<long>(cells.size()));
  }
  if (est.counts.back() <= 1)
    throw std::domain_error("box_dimension: degenerate cloud (one cell at the smallest scale)");

  std::vector<double> xs, ys;
  for (size_t i = 0; i < rho.size(); ++i) {
    xs.push_back(std::log(1.0 / rho[i]));
    ys.push_back(std::log(double(est.counts[i])));
  }
  Fit f = least_squares(xs, ys);
  est.estimate = f.slope;
  est.slope_stderr = f.stderr_;
  return est;
}

DimensionBound dimension_bound(const SmoothSystem& system,
                               const EscapeRateEstimate& escape,
                               const ExpansionEstimate& expansion,
                               const std::optional<BoxDimEstimate>& measured) {
  DimensionBound out;
  out.escape_rate_used = escape.rate_regression;
  out.expansion_used = expansion.s_fekete;
  if (!(expansion.s_fekete > 0.0)) {
    out.status = "hypothesis-violation: expansion rate s <= 0";
    out.bound = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.bound = double(system.dim) + escape.rate_regression / expansion.s_fekete;
  if (measured) {
    out.measured_dimension = measured->estimate;
    out.pass = measured->estimate <= out.bound + 0.1;
  }
  return out;
}

std::vector<Vec> survivor_cloud(const SmoothSystem& system, int depth, long count,
                                uint64_t seed, bool two_sided, long rejection_budget) {
  if (count < 1) throw std::invalid_argument("survivor_cloud: count >= 1");
  const int d = system.dim;
  std::vector<Vec> cloud;
  cloud.reserve(count);

  const auto* model = system.symbolic.get();
  if (two_sided && model && !model->lattice && model->symbols >= 2) {
    // Random itineraries w_{-K..K}; y from the forward word by backward
    // branch-inverse contraction, x rolled forward along the past word.
    RngStream rng(seed, 0xC10DDull);
    const int K = depth;
    for (long i = 0; i < count; ++i) {
      std::vector<int> w(2 * K + 1);
      for (auto& sym : w) sym = static_cast<int>(rng.next_bits() % model->symbols);
      double y = 0.5;
      for (int t = 2 * K; t >= K; --t) y = model->y_inverse_branch(w[t], y);
      // y at times -K..-1, walking back from time 0
      std::vector<double> ypast(K);
      double yb = y;
      for (int t = K - 1; t >= 0; --t) {
        yb = model->y_inverse_branch(w[t], yb);
        ypast[t] = yb;
      }
      double x = 0.5;
      for (int t = 0; t < K; ++t) x = model->x_forward(w[t], x, ypast[t]);
      cloud.push_back((Vec(2) << x, y).finished());
    }
    return cloud;
  }

  CounterRng rng(seed, 0xC10DDull);
  const Box& U = system.domain;
  for (long trial = 0; trial < rejection_budget; ++trial) {
    Vec u(d);
    for (int a = 0; a < d; ++a)
      u[a] = rng.uniform01(static_cast<uint64_t>(trial) * d + a);
    Point p = system.make_point(U.at(u));
    bool ok = true;
    Point cur = p;
    for (int k = 0; k < depth && ok; ++k) {
      auto next = system.step(cur, false);
      ok = next && (system.full_torus || U.contains(next->x, 1e-12));
      if (ok) cur = *next;
    }
    if (ok && two_sided) {
      cur = p;
      for (int k = 0; k < depth && ok; ++k) {
        auto prev = system.step(cur, true);
        ok = prev && (system.full_torus || U.contains(prev->x, 1e-12));
        if (ok) cur = *prev;
      }
    }
    if (ok) {
      cloud.push_back(p.x);
      if (static_cast<long>(cloud.size()) >= count) break;
    }
  }
  if (cloud.empty())
    throw std::domain_error("survivor_cloud: no survivors found within the budget");
  return cloud;
}

std::vector<Vec> orbit_cloud(const SmoothSystem& system, const Point& start,
                             long count, long burn_in) {
  std::vector<Vec> cloud;
  cloud.reserve(count);
  Point cur = start;
  for (long k = 0; k < burn_in + count; ++k) {
    auto next = system.step(cur, false);
    if (!next) break;
    cur = *next;
    if (k >= burn_in) cloud.push_back(cur.x);
  }
  return cloud;
}

}  // namespace orbitherm
