#include "orbitherm/shift.hpp"

#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace orbitherm {

namespace {

void validate(const WeightedShift& s) {
  if (s.symbols < 1 || s.symbols > 64)
    throw std::invalid_argument("WeightedShift: symbol count must be in [1,64]");
  if (s.transitions.rows() != s.symbols || s.transitions.cols() != s.symbols)
    throw std::invalid_argument("WeightedShift: transition matrix shape mismatch");
  if (static_cast<int>(s.weights.size()) != s.symbols)
    throw std::invalid_argument("WeightedShift: one weight per symbol required");
  for (double w : s.weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("WeightedShift: weights must be positive finite");
  for (int i = 0; i < s.symbols; ++i)
    for (int j = 0; j < s.symbols; ++j)
      if (s.transitions(i, j) != 0 && s.transitions(i, j) != 1)
        throw std::invalid_argument("WeightedShift: transitions must be 0/1");
}

std::vector<char> reachable(const Eigen::MatrixXi& A, int from, bool transpose) {
  const int s = static_cast<int>(A.rows());
  std::vector<char> seen(s, 0);
  std::queue<int> q;
  q.push(from);
  seen[from] = 1;
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    for (int j = 0; j < s; ++j) {
      int edge = transpose ? A(j, i) : A(i, j);
      if (edge && !seen[j]) {
        seen[j] = 1;
        q.push(j);
      }
    }
  }
  return seen;
}

// Leading eigenpair of the nonnegative irreducible M by power iteration on
// M + c I (the diagonal shift makes the Perron root strictly dominant even
// for periodic transition graphs); restarts from a perturbed vector if the
// estimate stalls.
std::pair<double, Vec> perron(const Mat& M) {
  const int s = static_cast<int>(M.rows());
  const double shift = std::max(1e-3, M.cwiseAbs().rowwise().sum().maxCoeff());
  Mat Ms = M + shift * Mat::Identity(s, s);

  for (int attempt = 0; attempt < 4; ++attempt) {
    Vec v = Vec::Ones(s);
    for (int i = 0; i < s; ++i) v[i] += 0.01 * attempt * (i + 1);  // restart pattern
    v /= v.norm();
    double rho_prev = 0.0;
    for (long it = 0; it < 200000; ++it) {
      Vec w = Ms * v;
      double rho = v.dot(w);  // Rayleigh quotient, v normalized
      v = w / w.norm();
      if (it > 2 && std::abs(rho - rho_prev) <= 1e-13 * std::abs(rho))
        return {rho - shift, v};
      rho_prev = rho;
    }
  }
  throw std::runtime_error("transfer_pressure: power iteration did not converge");
}

Vec stationary_of(const Mat& P) {
  const int s = static_cast<int>(P.rows());
  // Solve pi (P - I) = 0 with sum pi = 1 by least squares.
  Mat A(s + 1, s);
  A.topRows(s) = P.transpose() - Mat::Identity(s, s);
  A.row(s).setOnes();
  Vec b = Vec::Zero(s + 1);
  b[s] = 1.0;
  Vec pi = A.colPivHouseholderQr().solve(b);
  for (int i = 0; i < s; ++i) pi[i] = std::max(pi[i], 0.0);
  pi /= pi.sum();
  return pi;
}

}  // namespace

Mat WeightedShift::weighted_matrix() const {
  Mat M(symbols, symbols);
  for (int i = 0; i < symbols; ++i)
    for (int j = 0; j < symbols; ++j)
      M(i, j) = transitions(i, j) ? weights[i] : 0.0;
  return M;
}

WeightedShift WeightedShift::full_shift(std::vector<double> w) {
  WeightedShift s;
  s.symbols = static_cast<int>(w.size());
  s.transitions = Eigen::MatrixXi::Ones(s.symbols, s.symbols);
  s.weights = std::move(w);
  validate(s);
  return s;
}

WeightedShift WeightedShift::golden_mean(std::vector<double> w) {
  WeightedShift s;
  s.symbols = 2;
  s.transitions.resize(2, 2);
  s.transitions << 1, 1, 1, 0;  // "11" forbidden
  s.weights = std::move(w);
  validate(s);
  return s;
}

void require_irreducible(const WeightedShift& shift) {
  validate(shift);
  auto fwd = reachable(shift.transitions, 0, false);
  auto bwd = reachable(shift.transitions, 0, true);
  std::vector<int> missing;
  for (int i = 0; i < shift.symbols; ++i)
    if (!fwd[i] || !bwd[i]) missing.push_back(i);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "transition matrix is reducible; symbols not on a cycle through 0:";
    for (int i : missing) msg << " " << i;
    throw std::domain_error(msg.str());
  }
}

double transfer_pressure(const WeightedShift& shift) {
  require_irreducible(shift);
  return std::log(perron(shift.weighted_matrix()).first);
}

double log_trace_periodic_sum(const WeightedShift& shift, int n) {
  validate(shift);
  if (n < 1) throw std::invalid_argument("trace_periodic_sum: n >= 1");
  Mat M = shift.weighted_matrix();
  Mat P = Mat::Identity(shift.symbols, shift.symbols);
  double logscale = 0.0;
  for (int k = 0; k < n; ++k) {
    P = M * P;
    double a = P.cwiseAbs().maxCoeff();
    if (a <= 0.0) return -std::numeric_limits<double>::infinity();
    P /= a;
    logscale += std::log(a);
  }
  double tr = P.trace();
  if (tr <= 0.0) return -std::numeric_limits<double>::infinity();
  return logscale + std::log(tr);
}

double trace_periodic_sum(const WeightedShift& shift, int n) {
  return std::exp(log_trace_periodic_sum(shift, n));
}

MarkovMeasure markov_equilibrium(const WeightedShift& shift) {
  require_irreducible(shift);
  Mat M = shift.weighted_matrix();
  auto [rho, right] = perron(M);
  auto [rho_l, left] = perron(Mat(M.transpose()));
  (void)rho_l;

  const int s = shift.symbols;
  MarkovMeasure mu;
  mu.kernel = Mat::Zero(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      mu.kernel(i, j) = M(i, j) * right[j] / (rho * right[i]);
  Vec pi(s);
  for (int i = 0; i < s; ++i) pi[i] = left[i] * right[i];
  pi /= pi.sum();
  mu.stationary = pi;

  mu.entropy = 0.0;
  mu.potential_integral = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      double p = mu.kernel(i, j);
      if (p > 0.0) mu.entropy -= pi[i] * p * std::log(p);
    }
    mu.potential_integral += pi[i] * std::log(shift.weights[i]);
  }

  if (!shift.symbol_exponent_data.empty()) {
    if (static_cast<int>(shift.symbol_exponent_data.size()) != s)
      throw std::invalid_argument("markov_equilibrium: exponent data per symbol");
    Vec acc = Vec::Zero(shift.symbol_exponent_data[0].size());
    for (int i = 0; i < s; ++i) acc += pi[i] * shift.symbol_exponent_data[i];
    mu.exponents = acc;
  }
  return mu;
}

double kernel_free_energy(const WeightedShift& shift, const Mat& kernel) {
  validate(shift);
  const int s = shift.symbols;
  if (kernel.rows() != s || kernel.cols() != s)
    throw std::invalid_argument("kernel_free_energy: kernel shape mismatch");
  for (int i = 0; i < s; ++i) {
    if (std::abs(kernel.row(i).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("kernel_free_energy: rows must sum to 1");
    for (int j = 0; j < s; ++j)
      if (kernel(i, j) < -1e-15 || (kernel(i, j) > 1e-12 && !shift.transitions(i, j)))
        throw std::invalid_argument("kernel_free_energy: kernel off the transition support");
  }
  Vec pi = stationary_of(kernel);
  double h = 0.0, integral = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      double p = kernel(i, j);
      if (p > 0.0) h -= pi[i] * p * std::log(p);
    }
    integral += pi[i] * std::log(shift.weights[i]);
  }
  return h + integral;
}

}  // namespace orbitherm
