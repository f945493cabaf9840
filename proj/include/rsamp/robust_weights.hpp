#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsamp::dro {

// Maximizer of sum_i p_i * loss_i over
//   P_n = { p >= 0, sum p = 1, 0.5 * ||n p - 1||^2 <= rho }.
struct RobustWeights {
  std::vector<double> p;
  double rho = 0.0;
  std::vector<std::size_t> active_support;  // ids with p_i > 0, ascending
  bool boundary = false;                    // chi-square constraint tight
  double objective = 0.0;                   // sum_i p_i * loss_i
  std::size_t iterations = 0;               // supports examined by the active-set loop
};

struct RobustRisk {
  double value = 0.0;          // optimal objective
  double mean_term = 0.0;      // mean loss
  double variance_term = 0.0;  // sqrt(2 rho / n * population variance)
};

// 0.5 * ||n p - 1||^2.
double chi_square_divergence(std::span<const double> p);

// Exact active-set solve. The optimum is an increasing affine function of the
// loss clipped at zero, so its support is always a top-s set of losses: on each
// candidate support the maximizer is the simplex centre pushed along the
// centred losses to the radius of the ball restricted to that face. Supports
// shrink one lowest-loss coordinate at a time until the candidate is
// non-negative and no pinned coordinate would want positive weight.
//
// Constant losses or rho == 0 return the uniform vector.
// Throws ArgumentError on empty input or invalid rho, NumericalError on
// non-finite losses.
RobustWeights solve_robust_weights(std::span<const double> losses, double rho);

// value = solver objective; mean_term + variance_term is the closed form that
// value equals whenever the solution keeps full support.
RobustRisk robust_risk(std::span<const double> losses, double rho);

}  // namespace rsamp::dro
