#pragma once

// Exact thermodynamics for subshifts of finite type with depth-1 cylinder
// weights: spectral pressure, trace-formula periodic sums, and the Parry
// equilibrium chain. This is the ground truth the smooth estimators are
// tested against.

#include <optional>
#include <vector>

#include "orbitherm/types.hpp"

namespace orbitherm {

struct WeightedShift {
  int symbols = 0;
  Eigen::MatrixXi transitions;   // 0/1; A(i,j)=1 iff i can be followed by j
  std::vector<double> weights;   // w_i = exp(phi on cylinder [i]), w_i > 0
  // Optional per-symbol annotations (e.g. log-derivatives of a conjugate
  // smooth model) carried through to MarkovMeasure::exponents.
  std::vector<Vec> symbol_exponent_data;

  Mat weighted_matrix() const;   // M_ij = w_i * A_ij

  static WeightedShift full_shift(std::vector<double> weights);
  static WeightedShift golden_mean(std::vector<double> weights = {1.0, 1.0});
};

// Throws std::domain_error naming the unreachable symbols if A is reducible.
void require_irreducible(const WeightedShift& shift);

// log of the spectral radius of M, power iteration to 1e-12 relative.
double transfer_pressure(const WeightedShift& shift);

// Exact sum over Fix(sigma^n) of exp S_n phi = trace(M^n).
double trace_periodic_sum(const WeightedShift& shift, int n);
// log trace(M^n); safe for n beyond double overflow.
double log_trace_periodic_sum(const WeightedShift& shift, int n);

struct MarkovMeasure {
  Vec stationary;          // pi, pi P = pi
  Mat kernel;              // P, rows sum to 1
  double entropy = 0.0;    // h (nats)
  double potential_integral = 0.0;  // int phi dmu = sum pi_i log w_i
  Vec exponents;           // filled from symbol_exponent_data when present
};

// Parry-type equilibrium chain built from the leading left/right
// eigenvectors; h + int phi dmu equals transfer_pressure to 1e-9.
MarkovMeasure markov_equilibrium(const WeightedShift& shift);

// Free energy h(P') + int phi dmu' of an arbitrary stochastic kernel P'
// compatible with the transitions; <= transfer_pressure for all of them.
double kernel_free_energy(const WeightedShift& shift, const Mat& kernel);

}  // namespace orbitherm
