#include "orbitherm/orbits.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "orbitherm/detail/parallel.hpp"
#include "orbitherm/rng.hpp"

namespace orbitherm {

namespace {

constexpr double kNeutralTol = 1e-8;
constexpr double kLogSlack = 1e-9;  // log-domain slack so exact ties cannot flip

// Rotate the orbit so the lexicographically smallest point comes first.
void canonicalize(PeriodicOrbit& o) {
  int best = 0;
  for (int i = 1; i < o.period; ++i)
    if (lex_less(o.points[i].x, o.points[best].x)) best = i;
  if (best > 0)
    std::rotate(o.points.begin(), o.points.begin() + best, o.points.end());
}

// Dedup metric: min over cyclic shifts of the max pointwise distance.
double orbit_distance(const PeriodicOrbit& a, const PeriodicOrbit& b) {
  if (a.period != b.period) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (int shift = 0; shift < a.period; ++shift) {
    double worst = 0.0;
    for (int i = 0; i < a.period; ++i)
      worst = std::max(worst, distance(a.points[i], b.points[(i + shift) % a.period]));
    best = std::min(best, worst);
  }
  return best;
}

bool lex_orbit_less(const PeriodicOrbit& a, const PeriodicOrbit& b) {
  if (a.period != b.period) return a.period < b.period;
  return lex_less(a.points[0].x, b.points[0].x);
}

// Duplicate detection by spatial hash on the canonical representative;
// orbit_distance is only evaluated against same-cell neighbors.
class OrbitDeduper {
 public:
  explicit OrbitDeduper(double tol = 1e-8) : tol_(tol) {}

  bool is_duplicate(const PeriodicOrbit& o) const {
    auto scan = [&](long long key) {
      auto it = cells_.find(key);
      if (it == cells_.end()) return false;
      for (const PeriodicOrbit* cand : it->second)
        if (orbit_distance(*cand, o) <= tol_) return true;
      return false;
    };
    const Vec& r = o.points[0].x;
    int d = static_cast<int>(r.size());
    int span = d >= 3 ? 27 : 9;
    for (int nb = 0; nb < span; ++nb) {
      int q = nb;
      Vec shifted = r;
      for (int a = 0; a < d && a < 3; ++a) {
        shifted[a] += ((q % 3) - 1) * kCell;
        q /= 3;
      }
      if (scan(key_of(o.period, shifted))) return true;
    }
    return false;
  }

  void insert(const PeriodicOrbit& o) {
    cells_[key_of(o.period, o.points[0].x)].push_back(&o);
  }

 private:
  static constexpr double kCell = 1e-6;
  static long long key_of(int period, const Vec& r) {
    long long h = period * 1469598103934665603LL;
    for (int a = 0; a < r.size() && a < 3; ++a) {
      h ^= static_cast<long long>(std::llround(r[a] / kCell)) + 0x9E3779B9LL;
      h *= 1099511628211LL;
    }
    return h;
  }
  double tol_;
  std::unordered_map<long long, std::vector<const PeriodicOrbit*>> cells_;
};

double true_residual(const SmoothSystem& sys, const PeriodicOrbit& o) {
  auto round_trip = iterate(sys, o.points[0], o.period);
  if (round_trip.escaped) return std::numeric_limits<double>::infinity();
  return distance(round_trip.point, o.points[0]);
}

// ---------------------------------------------------------------------------
// Cyclic multiple-shooting Newton: unknowns are all orbit points, residuals
// the single-step defects f(x_i) - x_{i+1}. Conditioning stays O(||Df||)
// instead of O(||Df^n||), so the 1e-12 defect tolerance is attainable at any
// period.
std::optional<std::vector<Point>> newton_polish(const SmoothSystem& sys,
                                                std::vector<Point> pts,
                                                const NewtonSettings& cfg,
                                                bool* singular) {
  const int n = static_cast<int>(pts.size());
  const int d = sys.dim;
  if (singular) *singular = false;

  auto residual = [&](const std::vector<Point>& z, std::vector<Mat>* jacs) -> std::optional<Vec> {
    Vec r(n * d);
    for (int i = 0; i < n; ++i) {
      auto img = sys.newton_map(z[i].x);
      if (!img) return std::nullopt;
      Point image = sys.make_point(img->first);
      r.segment(i * d, d) = displacement(image, z[(i + 1) % n]);
      if (jacs) (*jacs)[i] = img->second;
    }
    return r;
  };

  std::vector<Mat> jacs(n);
  auto r_opt = residual(pts, &jacs);
  if (!r_opt) return std::nullopt;
  Vec r = *r_opt;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    double rmax = r.lpNorm<Eigen::Infinity>();
    if (rmax <= cfg.tol) return pts;

    Mat J = Mat::Zero(n * d, n * d);
    for (int i = 0; i < n; ++i) {
      J.block(i * d, i * d, d, d) = jacs[i];
      J.block(i * d, ((i + 1) % n) * d, d, d) -= Mat::Identity(d, d);
    }
    Vec delta = J.partialPivLu().solve(-r);
    if (!delta.allFinite() || delta.lpNorm<Eigen::Infinity>() > 1e6) {
      if (singular) *singular = true;
      return std::nullopt;
    }

    // Damped step: halve until ||F|| decreases.
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 256.0; t *= 0.5) {
      std::vector<Point> cand = pts;
      for (int i = 0; i < n; ++i)
        cand[i] = sys.make_point(cand[i].x + t * delta.segment(i * d, d));
      std::vector<Mat> cand_jacs(n);
      auto rc = residual(cand, &cand_jacs);
      if (!rc) continue;
      if (rc->lpNorm<Eigen::Infinity>() < rmax) {
        pts = std::move(cand);
        r = std::move(*rc);
        jacs = std::move(cand_jacs);
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return r.lpNorm<Eigen::Infinity>() <= cfg.tol ? std::optional(pts) : std::nullopt;
}

// Converged Newton points solve the smooth branch extension; keep only orbits
// of the actual map.
bool on_true_map(const SmoothSystem& sys, const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    auto img = sys.step(pts[i], false);
    if (!img) return false;
    if (distance(*img, pts[(i + 1) % n]) > 1e-8) return false;
  }
  return true;
}

std::optional<PeriodicOrbit> finish_orbit(const SmoothSystem& sys,
                                          std::vector<Point> pts,
                                          const NewtonSettings& cfg) {
  const int n = static_cast<int>(pts.size());
  // Minimal period: smallest divisor under which the orbit is shift-invariant.
  int period = n;
  for (int dd : divisors(n)) {
    if (dd == n) break;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, distance(pts[i], pts[(i + dd) % n]));
    if (worst <= cfg.dedup_tol) { period = dd; break; }
  }
  PeriodicOrbit o;
  o.period = period;
  o.points.assign(pts.begin(), pts.begin() + period);
  canonicalize(o);
  o.residual = true_residual(sys, o);
  if (!std::isfinite(o.residual) || o.residual > 1e-8) return std::nullopt;
  return o;
}

// ---------------------------------------------------------------------------
// Symbolic enumeration, toral-automorphism flavor: Fix(A^n) on T^2 is the
// finite subgroup (A^n - I)^{-1} Z^2 / Z^2 with exactly |det(A^n - I)|
// elements; enumerate it as the closure of the two generator columns.
std::vector<PeriodicOrbit> enumerate_lattice(const SmoothSystem& sys, int n,
                                             const NewtonSettings& cfg) {
  Eigen::Matrix2d A = sys.symbolic->lattice_matrix;
  Eigen::Matrix2d An = Eigen::Matrix2d::Identity();
  for (int i = 0; i < n; ++i) An = A * An;
  Eigen::Matrix2d M = An - Eigen::Matrix2d::Identity();
  double det = std::abs(M.determinant());
  if (det < 0.5) return {};
  long expected = static_cast<long>(std::llround(det));
  if (expected > 2'000'000)
    throw std::invalid_argument("symbolic enumeration: |Fix(f^n)| too large at n=" +
                                std::to_string(n));
  Eigen::Matrix2d Minv = M.inverse();
  Eigen::Vector2d g1 = Minv.col(0), g2 = Minv.col(1);

  std::vector<Vec> solutions;
  solutions.reserve(expected);
  std::unordered_map<long long, std::vector<int>> by_cell;
  by_cell.reserve(2 * expected);
  auto cell_key = [](double x, double y) {
    return static_cast<long long>(std::llround(x * 1e7)) * 1000003LL +
           static_cast<long long>(std::llround(y * 1e7));
  };
  auto find_near = [&](const Vec& p) -> int {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        auto it = by_cell.find(cell_key(p[0] + dx * 1e-7, p[1] + dy * 1e-7));
        if (it == by_cell.end()) continue;
        for (int idx : it->second) {
          double dsq = 0.0;
          for (int a = 0; a < 2; ++a) {
            double diff = torus_diff1(p[a], solutions[idx][a]);
            dsq += diff * diff;
          }
          if (std::sqrt(dsq) <= 1e-7) return idx;
        }
      }
    return -1;
  };
  auto add = [&](const Vec& p) -> bool {
    if (find_near(p) >= 0) return false;
    by_cell[cell_key(p[0], p[1])].push_back(static_cast<int>(solutions.size()));
    solutions.push_back(p);
    return true;
  };

  // BFS closure over the Cayley graph; elements recomputed from integer
  // coefficients so rounding does not accumulate along generator chains.
  std::vector<std::pair<long, long>> frontier{{0, 0}};
  add(torus_normalize(Vec::Zero(2)));
  while (!frontier.empty()) {
    std::vector<std::pair<long, long>> next;
    for (auto [a, b] : frontier) {
      const std::pair<long, long> nbrs[2] = {{a + 1, b}, {a, b + 1}};
      for (auto [na, nb] : nbrs) {
        Eigen::Vector2d x = double(na) * g1 + double(nb) * g2;
        Vec p = torus_normalize((Vec(2) << x[0], x[1]).finished());
        if (add(p)) next.emplace_back(na, nb);
      }
    }
    frontier = std::move(next);
  }
  if (static_cast<long>(solutions.size()) != expected)
    throw std::runtime_error("lattice closure found " +
                             std::to_string(solutions.size()) + " points, expected " +
                             std::to_string(expected));

  // Group into orbits by following the map.
  std::vector<char> used(solutions.size(), 0);
  std::vector<PeriodicOrbit> orbits;
  for (size_t start = 0; start < solutions.size(); ++start) {
    if (used[start]) continue;
    std::vector<Point> pts;
    Vec cur = solutions[start];
    for (int step = 0; step < n; ++step) {
      int idx = find_near(cur);
      if (idx < 0 || (step > 0 && static_cast<size_t>(idx) == start)) break;
      used[idx] = 1;
      pts.push_back(sys.make_point(solutions[idx]));
      cur = *sys.forward_rule(solutions[idx]);
    }
    if (pts.empty()) continue;
    auto polished = newton_polish(sys, pts, cfg, nullptr);
    auto o = finish_orbit(sys, polished ? *polished : pts, cfg);
    if (o) orbits.push_back(std::move(*o));
  }
  return orbits;
}

// Symbolic enumeration, full-shift flavor: one orbit per primitive necklace,
// located through the skew structure (y by backward branch-inverse
// contraction, x by forward contraction), then Newton-polished.
bool primitive_minimal_word(const std::vector<int>& w) {
  const int d = static_cast<int>(w.size());
  for (int r = 1; r < d; ++r) {
    int cmp = 0;
    for (int t = 0; t < d; ++t) {
      int a = w[(t + r) % d], b = w[t];
      if (a != b) { cmp = a < b ? -1 : 1; break; }
    }
    if (cmp <= 0) return false;  // smaller rotation, or a period r < d
  }
  return true;
}

std::optional<PeriodicOrbit> locate_word_orbit(const SmoothSystem& sys,
                                               const std::vector<int>& w,
                                               const NewtonSettings& cfg,
                                               EnumDiagnostics* diag) {
  const auto& model = *sys.symbolic;
  const int d = static_cast<int>(w.size());

  std::vector<double> ys(d), xs(d);
  for (int i = 0; i < d; ++i) {
    double y = 0.5;
    for (int sweep = 0; sweep < 200; ++sweep) {
      double prev = y;
      for (int t = d - 1; t >= 0; --t) y = model.y_inverse_branch(w[(i + t) % d], y);
      if (std::abs(y - prev) < 1e-15) break;
    }
    ys[i] = y;
  }
  double x = 0.5;
  for (int sweep = 0; sweep < 400; ++sweep) {
    double prev = x;
    for (int t = 0; t < d; ++t) x = model.x_forward(w[t], x, ys[t]);
    if (std::abs(x - prev) < 1e-15) break;
  }
  xs[0] = x;
  for (int t = 0; t + 1 < d; ++t) xs[t + 1] = model.x_forward(w[t], xs[t], ys[t]);

  std::vector<Point> pts(d);
  for (int i = 0; i < d; ++i)
    pts[i] = sys.make_point((Vec(2) << xs[i], ys[i]).finished());

  auto polished = newton_polish(sys, pts, cfg, nullptr);
  if (polished) pts = *polished;
  if (!on_true_map(sys, pts)) {
    if (diag) ++diag->off_itinerary;
    return std::nullopt;
  }
  return finish_orbit(sys, pts, cfg);
}

std::vector<PeriodicOrbit> enumerate_skew_words(const SmoothSystem& sys, int n,
                                                const NewtonSettings& cfg,
                                                EnumDiagnostics* diag) {
  const auto& model = *sys.symbolic;
  const int s = model.symbols;
  std::vector<PeriodicOrbit> orbits;
  for (int d : divisors(n)) {
    double total = std::pow(double(s), double(d));
    if (total > 5e6)
      throw std::invalid_argument("symbolic enumeration: word space too large at n=" +
                                  std::to_string(d));
    std::vector<int> w(d, 0);
    for (long long code = 0; code < static_cast<long long>(total); ++code) {
      long long c = code;
      for (int t = d - 1; t >= 0; --t) { w[t] = int(c % s); c /= s; }
      if (d > 1 && !primitive_minimal_word(w)) continue;
      if (d == 1 && code > s - 1) continue;
      auto o = locate_word_orbit(sys, w, cfg, diag);
      if (o && o->period == d) orbits.push_back(std::move(*o));
    }
  }
  for (const Vec& e : model.extra_fixed_points) {
    PeriodicOrbit o;
    o.period = 1;
    o.points = {sys.make_point(e)};
    o.residual = true_residual(sys, o);
    orbits.push_back(std::move(o));
  }
  return orbits;
}

std::vector<PeriodicOrbit> enumerate_newton(const SmoothSystem& sys, int n,
                                            const SeedGrid& grid,
                                            const NewtonSettings& cfg,
                                            EnumDiagnostics* diag, int threads) {
  if (!sys.newton_map)
    throw std::invalid_argument("newton enumeration: system has no smooth extension");
  const int d = sys.dim;

  // Seed points: a uniform grid over U, plus any isolated fixed points the
  // symbolic model knows about.
  std::vector<Point> seeds = domain_grid(sys, grid.per_axis);
  if (sys.symbolic)
    for (const Vec& e : sys.symbolic->extra_fixed_points)
      seeds.push_back(sys.make_point(e));
  if (diag) diag->seeds_total += static_cast<long>(seeds.size());

  Box inflated(sys.domain.lo.array() - 1.0, sys.domain.hi.array() + 1.0);

  std::vector<std::optional<PeriodicOrbit>> results(seeds.size());
  std::vector<char> singular_flags(seeds.size(), 0);

  // Orbit-space initialization: the seed becomes the first shooting point and
  // the remaining segments are drawn from U by a counter RNG. Independent
  // segments spread the guesses over all branch patterns, which is what the
  // damped Newton's basins follow; a forward rollout of the seed explores
  // only the seed's own itinerary.
  CounterRng segment_rng(0x5EEDull, n);

  detail::parallel_for(static_cast<long>(seeds.size()), threads, [&](long b, long e) {
    for (long si = b; si < e; ++si) {
      std::vector<Point> pts;
      pts.reserve(n);
      pts.push_back(seeds[si]);
      for (int i = 1; i < n; ++i) {
        Vec u(d);
        for (int a = 0; a < d; ++a)
          u[a] = segment_rng.uniform01((static_cast<uint64_t>(si) * n + i) * d + a);
        pts.push_back(sys.make_point(sys.domain.at(u)));
      }
      bool singular = false;
      auto polished = newton_polish(sys, pts, cfg, &singular);
      singular_flags[si] = singular ? 1 : 0;
      if (!polished) continue;
      if (!on_true_map(sys, *polished)) {
        if (diag) singular_flags[si] = 2;
        continue;
      }
      results[si] = finish_orbit(sys, *polished, cfg);
    }
  });

  std::deque<PeriodicOrbit> accepted;
  OrbitDeduper dedupe(cfg.dedup_tol);
  for (size_t si = 0; si < results.size(); ++si) {
    if (!results[si]) {
      if (diag) {
        ++diag->dropped;
        if (singular_flags[si] == 1) ++diag->degenerate;
        if (singular_flags[si] == 2) ++diag->off_itinerary;
      }
      continue;
    }
    if (diag) ++diag->converged;
    if (dedupe.is_duplicate(*results[si])) {
      if (diag) ++diag->duplicates;
      continue;
    }
    accepted.push_back(std::move(*results[si]));
    dedupe.insert(accepted.back());
  }
  return {accepted.begin(), accepted.end()};
}

}  // namespace

std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

double PeriodicOrbit::min_abs_exponent() const {
  double m = std::numeric_limits<double>::infinity();
  for (double l : exponents) m = std::min(m, std::abs(l));
  return m;
}

int KCapPolicy::cap(int period, double alpha) const {
  if (override_cap) return std::max(1, *override_cap);
  if (!(alpha > 0.0)) throw std::invalid_argument("KCapPolicy: alpha must be > 0");
  return std::max(1, period_multiple * period +
                         static_cast<int>(std::ceil(additive / alpha)));
}

PeriodicOrbit classify_orbit(const SmoothSystem& system, PeriodicOrbit o) {
  const int d = o.period;
  const int dim = system.dim;

  o.jacobians.clear();
  o.jacobians.reserve(d);
  for (const Point& p : o.points) {
    auto J = system.jacobian(p);
    if (!J) throw std::domain_error("classify_orbit: derivative undefined on orbit");
    o.jacobians.push_back(*J);
  }
  o.residual = true_residual(system, o);

  Mat monodromy = Mat::Identity(dim, dim);
  for (int i = 0; i < d; ++i) monodromy = o.jacobians[i] * monodromy;
  Eigen::EigenSolver<Mat> es(monodromy);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("classify_orbit: eigensolver failed");

  std::vector<int> order(dim);
  for (int i = 0; i < dim; ++i) order[i] = i;
  auto vals = es.eigenvalues();
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(vals[a]) < std::abs(vals[b]); });

  o.multipliers.resize(dim);
  o.exponents.resize(dim);
  o.neutral = false;
  o.degenerate = false;
  for (int i = 0; i < dim; ++i) {
    std::complex<double> delta = vals[order[i]];
    o.multipliers[i] = delta;
    o.exponents[i] = std::log(std::abs(delta)) / d;
    if (std::abs(std::abs(delta) - 1.0) <= kNeutralTol) o.neutral = true;
    if (std::abs(delta - std::complex<double>(1.0, 0.0)) <= kNeutralTol)
      o.degenerate = true;  // Df^n - I singular here
  }
  std::sort(o.exponents.begin(), o.exponents.end());

  bool has_stable = std::abs(o.multipliers[0]) < 1.0 - kNeutralTol;
  bool has_unstable = std::abs(o.multipliers[dim - 1]) > 1.0 + kNeutralTol;
  o.saddle = !o.neutral && has_stable && has_unstable;

  o.basis_s.clear();
  o.basis_u.clear();
  o.restr_s.clear();
  o.restr_u.clear();
  o.phiu.clear();

  if (o.saddle) {
    auto build_basis = [&](bool unstable) -> Mat {
      std::vector<int> idx;
      for (int i = 0; i < dim; ++i) {
        double a = std::abs(vals[i]);
        if (unstable ? a > 1.0 : a < 1.0) idx.push_back(i);
      }
      Mat B(dim, static_cast<int>(idx.size()));
      std::vector<char> used(dim, 0);
      int col = 0;
      for (int i : idx) {
        if (used[i]) continue;
        Eigen::VectorXcd v = es.eigenvectors().col(i);
        if (std::abs(vals[i].imag()) <= 1e-10 * (1.0 + std::abs(vals[i]))) {
          // real eigenvalue: strip any phase left by the solver
          int mi = 0;
          v.cwiseAbs().maxCoeff(&mi);
          v *= std::polar(1.0, -std::arg(v[mi]));
          B.col(col++) = v.real();
          used[i] = 1;
        } else {
          B.col(col++) = v.real();
          B.col(col++) = v.imag();
          used[i] = 1;
          for (int j : idx)
            if (!used[j] &&
                std::abs(vals[j] - std::conj(vals[i])) <= 1e-9 * (1.0 + std::abs(vals[i]))) {
              used[j] = 1;
              break;
            }
        }
      }
      Eigen::HouseholderQR<Mat> qr(B);
      return Mat(qr.householderQ()) * Mat::Identity(dim, static_cast<int>(B.cols()));
    };
    auto orthonormalize = [&](const Mat& m) -> Mat {
      Eigen::HouseholderQR<Mat> qr(m);
      return Mat(qr.householderQ()) * Mat::Identity(dim, static_cast<int>(m.cols()));
    };

    o.basis_s.resize(d);
    o.basis_u.resize(d);
    o.basis_s[0] = build_basis(false);
    o.basis_u[0] = build_basis(true);
    for (int i = 0; i + 1 < d; ++i) {
      o.basis_s[i + 1] = orthonormalize(o.jacobians[i] * o.basis_s[i]);
      o.basis_u[i + 1] = orthonormalize(o.jacobians[i] * o.basis_u[i]);
    }
    o.restr_s.resize(d);
    o.restr_u.resize(d);
    o.phiu.resize(d);
    for (int i = 0; i < d; ++i) {
      const Mat& Bs_out = o.basis_s[(i + 1) % d];
      const Mat& Bu_out = o.basis_u[(i + 1) % d];
      o.restr_s[i] = Bs_out.transpose() * o.jacobians[i] * o.basis_s[i];
      o.restr_u[i] = Bu_out.transpose() * o.jacobians[i] * o.basis_u[i];
      o.phiu[i] = -std::log(std::abs(o.restr_u[i].determinant()));
    }
  }

  o.classified = true;
  return o;
}

namespace {

// min over start points and k = 1..K of (log sigma(P) - k*rate) for the
// cyclic restricted products; products are renormalized per step so only
// their log scale grows.
struct ProductScan {
  double min_logc = std::numeric_limits<double>::infinity();
  int argmin_k = 0;
  int argmin_start = 0;
};

template <typename Score>
ProductScan scan_products(const std::vector<Mat>& blocks, int k_cap, Score score) {
  ProductScan out;
  const int d = static_cast<int>(blocks.size());
  for (int j = 0; j < d; ++j) {
    Mat P = Mat::Identity(blocks[0].rows(), blocks[0].cols());
    double logscale = 0.0;
    for (int k = 1; k <= k_cap; ++k) {
      P = blocks[(j + k - 1) % d] * P;
      double a = P.cwiseAbs().maxCoeff();
      if (a <= 0.0 || !std::isfinite(a)) {
        out.min_logc = -std::numeric_limits<double>::infinity();
        return out;
      }
      P /= a;
      logscale += std::log(a);
      double candidate = score(P, logscale, k);
      if (candidate < out.min_logc) {
        out.min_logc = candidate;
        out.argmin_k = k;
        out.argmin_start = j;
      }
    }
  }
  return out;
}

}  // namespace

double empirical_constant(const PeriodicOrbit& orbit, double alpha,
                          const KCapPolicy& policy, ConstantDiagnostics* diag) {
  if (!orbit.classified)
    throw std::invalid_argument("empirical_constant: classification required");
  if (!(alpha > 0.0)) throw std::invalid_argument("empirical_constant: alpha > 0");
  if (!orbit.saddle) return 0.0;
  if (alpha >= orbit.min_abs_exponent() - 1e-12) return 0.0;

  const int k_cap = policy.cap(orbit.period, alpha);
  // Unstable side: ||(Df^k|E^u)^{-1}||^{-1} = sigma_min >= c e^{k alpha}.
  auto u_scan = scan_products(orbit.restr_u, k_cap,
                              [alpha](const Mat& P, double ls, int k) {
                                return std::log(sigma_min(P)) + ls - k * alpha;
                              });
  // Stable side: ||(Df^{-k}|E^s)^{-1}||^{-1} = 1/sigma_max(forward product).
  auto s_scan = scan_products(orbit.restr_s, k_cap,
                              [alpha](const Mat& P, double ls, int k) {
                                return -(std::log(sigma_max(P)) + ls) - k * alpha;
                              });
  if (diag) {
    const ProductScan& worst = u_scan.min_logc <= s_scan.min_logc ? u_scan : s_scan;
    diag->argmin_k = worst.argmin_k;
    diag->argmin_point = worst.argmin_start;
    diag->unstable_side = u_scan.min_logc <= s_scan.min_logc;
  }
  double logc = std::min(u_scan.min_logc, s_scan.min_logc);
  if (!std::isfinite(logc)) return 0.0;
  return std::min(1.0, std::exp(logc));
}

double band_upper_constant(const PeriodicOrbit& orbit, double beta, int k_cap) {
  if (!orbit.classified || !orbit.saddle) return 0.0;
  // ||Df^k|E^u|| <= c^{-1} e^{k beta}  and  ||Df^{-k}|E^s|| <= c^{-1} e^{k beta}.
  auto u_scan = scan_products(orbit.restr_u, k_cap,
                              [beta](const Mat& P, double ls, int k) {
                                return k * beta - (std::log(sigma_max(P)) + ls);
                              });
  auto s_scan = scan_products(orbit.restr_s, k_cap,
                              [beta](const Mat& P, double ls, int k) {
                                return k * beta + std::log(sigma_min(P)) + ls;
                              });
  double logc = std::min(u_scan.min_logc, s_scan.min_logc);
  if (!std::isfinite(logc)) return 0.0;
  return std::min(1.0, std::exp(logc));
}

bool filter_membership(const PeriodicOrbit& orbit, const SaddleFilter& filter,
                       double c_max) {
  if (!orbit.classified)
    throw std::invalid_argument("filter_membership: classification required");
  if (!orbit.saddle || orbit.degenerate) return false;
  if (!(filter.c > 0.0 && filter.c <= 1.0))
    throw std::invalid_argument("filter_membership: c must be in (0,1]");
  if (c_max <= 0.0) return false;
  if (std::log(filter.c) > std::log(c_max) + kLogSlack) return false;

  if (filter.beta) {
    double beta = *filter.beta;
    if (!(beta > filter.alpha))
      throw std::invalid_argument("filter_membership: beta must exceed alpha");
    for (double l : orbit.exponents)
      if (std::abs(l) > beta + kLogSlack) return false;
    int k_cap = filter.kcap.cap(orbit.period, filter.alpha);
    double c_up = band_upper_constant(orbit, beta, k_cap);
    if (c_up <= 0.0) return false;
    if (std::log(filter.c) > std::log(c_up) + kLogSlack) return false;
  }
  return true;
}

std::vector<PeriodicOrbit> enumerate_periodic(const SmoothSystem& system, int n,
                                              EnumMethod method, const SeedGrid& seeds,
                                              EnumDiagnostics* diag, int threads,
                                              const NewtonSettings& settings) {
  if (n <= 0) throw std::invalid_argument("enumerate_periodic: n must be positive");
  std::vector<PeriodicOrbit> orbits;
  if (method == EnumMethod::Symbolic) {
    if (!system.symbolic)
      throw std::invalid_argument("enumerate_periodic: system '" + system.name +
                                  "' has no symbolic model");
    orbits = system.symbolic->lattice ? enumerate_lattice(system, n, settings)
                                      : enumerate_skew_words(system, n, settings, diag);
  } else {
    orbits = enumerate_newton(system, n, seeds, settings, diag, threads);
  }
  std::sort(orbits.begin(), orbits.end(), lex_orbit_less);
  return orbits;
}

OrbitDatabase::OrbitDatabase(const SmoothSystem& system, EnumMethod method,
                             SeedGrid seeds, int threads)
    : system_(&system), method_(method), seeds_(seeds), threads_(threads) {}

void OrbitDatabase::ensure(int n) {
  if (computed_.count(n)) return;
  auto found = enumerate_periodic(*system_, n, method_, seeds_, &diag_, threads_);
  OrbitDeduper dedupe;
  for (const auto& [d, bucket] : by_period_)
    for (const auto& o : bucket) dedupe.insert(o);
  for (auto& o : found) {
    if (dedupe.is_duplicate(o)) continue;
    auto& bucket = by_period_[o.period];
    bucket.push_back(classify_orbit(*system_, std::move(o)));
    dedupe.insert(bucket.back());
  }
  for (int d : divisors(n)) computed_.insert(d);
}

std::vector<const PeriodicOrbit*> OrbitDatabase::fix(int n) const {
  if (!computed_.count(n))
    throw std::logic_error("OrbitDatabase: orbits for n=" + std::to_string(n) +
                           " not enumerated (call ensure)");
  std::vector<const PeriodicOrbit*> out;
  for (int d : divisors(n)) {
    auto it = by_period_.find(d);
    if (it == by_period_.end()) continue;
    for (const auto& o : it->second) out.push_back(&o);
  }
  return out;
}

long OrbitDatabase::point_count(int n) const {
  long c = 0;
  for (const auto* o : fix(n)) c += o->period;
  return c;
}

double OrbitDatabase::cmax(const PeriodicOrbit& orbit, double alpha,
                           const KCapPolicy& policy) const {
  long long alpha_bits;
  static_assert(sizeof(alpha_bits) == sizeof(alpha));
  std::memcpy(&alpha_bits, &alpha, sizeof(alpha));
  auto key = std::make_tuple(&orbit, alpha_bits, policy.cap(orbit.period, alpha));
  auto it = cmax_cache_.find(key);
  if (it != cmax_cache_.end()) return it->second;
  double v = empirical_constant(orbit, alpha, policy);
  cmax_cache_.emplace(key, v);
  return v;
}

bool OrbitDatabase::membership(const PeriodicOrbit& orbit,
                               const SaddleFilter& filter) const {
  return filter_membership(orbit, filter, cmax(orbit, filter.alpha, filter.kcap));
}

std::vector<const PeriodicOrbit*> OrbitDatabase::all_orbits() const {
  std::vector<const PeriodicOrbit*> out;
  for (const auto& [d, bucket] : by_period_)
    for (const auto& o : bucket) out.push_back(&o);
  return out;
}

std::optional<double> OrbitDatabase::min_saddle_phiu() const {
  std::optional<double> best;
  for (const auto* o : all_orbits()) {
    if (!o->saddle) continue;
    for (double v : o->phiu)
      if (!best || v < *best) best = v;
  }
  return best;
}

bool OrbitDatabase::any_saddle() const {
  for (const auto* o : all_orbits())
    if (o->saddle) return true;
  return false;
}

}  // namespace orbitherm
