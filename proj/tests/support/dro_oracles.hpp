#pragma once

// Reference maximizers for the chi-square-ball robust objective that do not
// share code with the library solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rsamp/rng.hpp"

namespace dro_oracle {

inline double divergence(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  double s = 0;
  for (double v : p) s += (n * v - 1) * (n * v - 1);
  return 0.5 * s;
}

// n = 2: p = (1/2 - d, 1/2 + d) toward the larger loss, 4 d^2 <= rho, d <= 1/2.
inline double two_point_closed_form(double a, double b, double rho) {
  const double d = std::min(0.5, 0.5 * std::sqrt(rho));
  return 0.5 * (a + b) + d * std::abs(b - a);
}

// Projected gradient ascent on t = p_2 over the feasible interval of the
// 1-simplex: |2t - 1| <= sqrt(rho), 0 <= t <= 1.
inline double two_point_projected_ascent(double a, double b, double rho) {
  const double half = 0.5 * std::sqrt(rho);
  const double lo = std::max(0.0, 0.5 - half);
  const double hi = std::min(1.0, 0.5 + half);
  double t = 0.5;
  for (int it = 0; it < 10000; ++it) {
    const double next = std::clamp(t + 0.01 * (b - a), lo, hi);
    if (next == t) break;
    t = next;
  }
  return (1 - t) * a + t * b;
}

namespace detail {

// Upper bound on sum_i q_i l_i over the remaining coordinates, given their
// total mass and the squared-deviation budget left in the ball. Drops q >= 0,
// so it is a relaxation: Cauchy-Schwarz around the mean of the rest, capped
// by putting all mass on the largest remaining loss.
inline double tail_bound(std::span<const double> rest, double mass, double budget, double u) {
  const auto m = static_cast<double>(rest.size());
  double mean = 0;
  for (double v : rest) mean += v;
  mean /= m;
  double spread = 0;
  for (double v : rest) spread += (v - mean) * (v - mean);
  const double dev = mass - m * u;  // sum of (q_i - u) over the rest
  const double room = budget - dev * dev / m;
  if (room < -1e-12) return -std::numeric_limits<double>::infinity();
  const double cs = mass * mean + std::sqrt(std::max(room, 0.0) * spread);
  return std::min(cs, mass * *std::max_element(rest.begin(), rest.end()));
}

}  // namespace detail

// Exact maximum over the simplex lattice with spacing 1e-3 (points k/1000 with
// integer k summing to 1000) that lie inside the ball. Depth-first branch and
// bound over the coordinates in decreasing loss order; children are visited
// best bound first and pruned once their bound cannot beat the incumbent.
inline double grid_search_max(std::span<const double> losses, double rho, long total = 1000) {
  const std::size_t n = losses.size();
  std::vector<double> l(losses.begin(), losses.end());
  std::sort(l.begin(), l.end(), std::greater<>());
  const double u = 1.0 / static_cast<double>(n);
  const double h = 1.0 / static_cast<double>(total);
  const double ball = 2.0 * rho / (static_cast<double>(n) * static_cast<double>(n));

  std::vector<long> k(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  // Membership in integers: sum (n k_i - total)^2 <= 2 rho total^2, so lattice
  // points on the sphere itself are not lost to rounding.
  const double limit = 2.0 * rho * static_cast<double>(total) * static_cast<double>(total);
  auto leaf = [&] {
    long long dev = 0;
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long long d = static_cast<long long>(n) * k[i] - total;
      dev += d * d;
      s += static_cast<double>(k[i]) * l[i];
    }
    if (static_cast<double>(dev) <= limit) best = std::max(best, s * h);
  };

  std::function<void(std::size_t, long, double, double)> rec = [&](std::size_t i, long left,
                                                                    double value, double used) {
    if (i + 1 == n) {
      k[i] = left;
      leaf();
      return;
    }
    const std::span<const double> rest(l.data() + i + 1, n - i - 1);
    std::vector<std::pair<double, long>> children;
    for (long v = 0; v <= left; ++v) {
      const double q = static_cast<double>(v) * h;
      const double spent = used + (q - u) * (q - u);
      if (spent > ball * (1 + 1e-12)) continue;
      const double bound = value + q * l[i] +
                           detail::tail_bound(rest, static_cast<double>(left - v) * h, ball - spent, u);
      if (bound > best) children.emplace_back(bound, v);
    }
    std::sort(children.begin(), children.end(), std::greater<>());
    for (const auto& [bound, v] : children) {
      if (bound <= best + 1e-13) break;
      const double q = static_cast<double>(v) * h;
      k[i] = v;
      rec(i + 1, left - v, value + q * l[i], used + (q - u) * (q - u));
    }
  };
  rec(0, total, 0.0, 0.0);
  return best;
}

// A point of the feasible set: a uniform Dirichlet draw on the simplex,
// pulled radially toward the centre onto the ball when it lies outside.
inline std::vector<double> random_feasible_point(rsamp::Rng& rng, std::size_t n, double rho) {
  std::vector<double> q(n);
  double sum = 0;
  for (auto& v : q) {
    v = -std::log(1.0 - rng.uniform01());
    sum += v;
  }
  for (auto& v : q) v /= sum;
  const double div = divergence(q);
  if (div > rho) {
    const double t = std::sqrt(rho / div) * (1 - 1e-12);
    const double u = 1.0 / static_cast<double>(n);
    for (auto& v : q) v = u + t * (v - u);
  }
  return q;
}

}  // namespace dro_oracle
