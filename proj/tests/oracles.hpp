#pragma once

// Reference computations written independently of the library: linear-space
// products, brute-force grids and textbook formulas. Tests compare the library
// against these rather than against itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "mixest/distribution.hpp"

namespace oracle {

// Smoothed occurrence probability straight from the counting formula.
inline double laplace(std::size_t containing, std::size_t n, double s) {
  return (static_cast<double>(containing) + s) / (static_cast<double>(n) + 2.0 * s);
}

// Product of p over present tokens and (1 - p) over absent ones, no logs.
inline double doc_probability(const std::vector<double>& p, const std::set<std::size_t>& present) {
  double prod = 1.0;
  for (std::size_t t = 0; t < p.size(); ++t) prod *= present.count(t) ? p[t] : 1.0 - p[t];
  return prod;
}

// Row-by-row log((1 - a) P + a Q), each row rescaled by its larger term.
inline double mixture_log_likelihood(const mixest::LikelihoodTable& table, double a) {
  double total = 0.0;
  for (const auto& r : table.rows) {
    const double m = std::max(r.log_human, r.log_ai);
    total += m + std::log((1.0 - a) * std::exp(r.log_human - m) + a * std::exp(r.log_ai - m));
  }
  return total;
}

// Exhaustive grid over [0, 1]; returns the first best point. Row terms are
// rescaled once so each grid point costs one log per row.
inline double grid_argmax(const mixest::LikelihoodTable& table, double step = 1e-4) {
  const std::size_t n = table.rows.size();
  std::vector<double> shift(n), eh(n), ea(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    shift[i] = std::max(r.log_human, r.log_ai);
    eh[i] = std::exp(r.log_human - shift[i]);
    ea[i] = std::exp(r.log_ai - shift[i]);
  }
  const auto points = static_cast<std::size_t>(std::llround(1.0 / step));
  double best_a = 0.0;
  double best = -INFINITY;
  for (std::size_t k = 0; k <= points; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(points);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += shift[i] + std::log((1.0 - a) * eh[i] + a * ea[i]);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace oracle
