#include "rsamp/robust_weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rsamp/errors.hpp"
#include "rsamp/tensor.hpp"

namespace rsamp::dro {

namespace {

void validate(std::span<const double> losses, double rho) {
  if (losses.empty()) {
    throw ArgumentError("solve_robust_weights: empty loss vector");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw ArgumentError("solve_robust_weights: rho must be finite and >= 0, got " +
                        std::to_string(rho));
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i])) {
      throw NumericalError("solve_robust_weights: non-finite loss at index " + std::to_string(i));
    }
  }
}

void finish(RobustWeights& w, std::span<const double> losses) {
  w.objective = 0.0;
  w.active_support.clear();
  for (std::size_t i = 0; i < w.p.size(); ++i) {
    w.objective += w.p[i] * losses[i];
    if (w.p[i] > 0.0) {
      w.active_support.push_back(i);
    }
  }
  const double slack = w.rho - chi_square_divergence(w.p);
  w.boundary = w.rho > 0.0 && slack <= 1e-9 * std::max(1.0, w.rho);
}

}  // namespace

double chi_square_divergence(std::span<const double> p) {
  const auto n = static_cast<double>(p.size());
  double sq = 0.0;
  for (const double pi : p) {
    const double d = n * pi - 1.0;
    sq += d * d;
  }
  return 0.5 * sq;
}

RobustWeights solve_robust_weights(std::span<const double> losses, double rho) {
  validate(losses, rho);
  const std::size_t n = losses.size();
  const auto nd = static_cast<double>(n);

  RobustWeights w;
  w.rho = rho;
  w.p.assign(n, 1.0 / nd);

  const auto [lo, hi] = std::minmax_element(losses.begin(), losses.end());
  if (rho == 0.0 || *lo == *hi) {
    finish(w, losses);
    return w;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });

  std::vector<double> candidate;
  for (std::size_t s = n; s >= 1; --s) {
    ++w.iterations;
    const auto sd = static_cast<double>(s);
    // On the face supported by the top-s losses the ball becomes
    // ||q - 1/s||^2 <= (2 rho - (n - s) n / s) / n^2.
    const double radius_sq = (2.0 * rho - (nd - sd) * nd / sd) / (nd * nd);
    if (radius_sq < 0.0) {
      break;
    }
    double mean = 0.0;
    for (std::size_t t = 0; t < s; ++t) {
      mean += losses[order[t]];
    }
    mean /= sd;
    double norm_sq = 0.0;
    for (std::size_t t = 0; t < s; ++t) {
      const double d = losses[order[t]] - mean;
      norm_sq += d * d;
    }
    const double tol = 1e-12 / sd;
    candidate.assign(s, 1.0 / sd);
    if (norm_sq > 0.0) {
      const double slope = std::sqrt(radius_sq / norm_sq);
      for (std::size_t t = 0; t < s; ++t) {
        candidate[t] += slope * (losses[order[t]] - mean);
      }
      if (candidate[s - 1] < -tol) {
        continue;
      }
      // The best pinned coordinate must not want positive weight.
      if (s < n && 1.0 / sd + slope * (losses[order[s]] - mean) > tol) {
        continue;
      }
    }
    // norm_sq == 0: the support holds only maximal losses, which is optimal
    // once the face is feasible.
    std::fill(w.p.begin(), w.p.end(), 0.0);
    for (std::size_t t = 0; t < s; ++t) {
      w.p[order[t]] = std::max(candidate[t], 0.0);
    }
    finish(w, losses);
    return w;
  }
  throw NumericalError("solve_robust_weights: active-set loop found no KKT point (n=" +
                       std::to_string(n) + ", rho=" + std::to_string(rho) + ")");
}

RobustRisk robust_risk(std::span<const double> losses, double rho) {
  const RobustWeights w = solve_robust_weights(losses, rho);
  const MeanVar mv = reduce_mean_var(losses);
  RobustRisk r;
  r.value = w.objective;
  r.mean_term = mv.mean;
  r.variance_term = std::sqrt(2.0 * rho / static_cast<double>(losses.size()) * mv.variance);
  return r;
}

}  // namespace rsamp::dro
